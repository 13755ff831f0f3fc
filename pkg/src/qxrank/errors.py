"""Exception types shared across the toolkit.

All toolkit errors derive from :class:`QxrankError` so callers (and the CLI)
can distinguish expected, reportable failures from genuine bugs.
"""

from __future__ import annotations


class QxrankError(Exception):
    """Base class for all toolkit errors."""


class ParseError(QxrankError):
    """Malformed input: bad field count, bad value, or undecodable bytes."""

    def __init__(self, message: str, source: str | None = None, line_no: int | None = None):
        self.source = source
        self.line_no = line_no
        prefix = ""
        if source is not None:
            prefix = f"{source}:"
        if line_no is not None:
            prefix = f"{prefix}{line_no}:"
        super().__init__(f"{prefix} {message}" if prefix else message)


class DuplicateKeyError(QxrankError):
    """A key that must be unique appeared more than once."""


class CapacityError(QxrankError):
    """A size bound (e.g. candidates per query) was exceeded."""


class ValidationError(QxrankError):
    """Data violates a declared invariant (range, monotonicity, alignment)."""


class ContractViolation(QxrankError):
    """A caller-supplied argument breaks a documented precondition."""


class ConfigError(QxrankError):
    """A parameter or configuration value is out of its legal range."""


class NotFoundError(QxrankError):
    """A referenced id (query, passage, topic) does not resolve."""


class ServiceError(QxrankError):
    """Transport-level failure talking to the model service, after retries."""


class ProtocolError(QxrankError):
    """The model service answered, but the response breaks the wire contract."""
