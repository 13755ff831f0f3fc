"""Exception hierarchy for the model service."""


class RankserveError(Exception):
    """Base class for all service-side errors."""


class ConfigError(RankserveError):
    """Invalid configuration value or flag combination."""


class DataError(RankserveError):
    """Training or corpus data violates its contract."""


class ModelUnavailable(RankserveError):
    """The endpoint's model is not loaded; maps to HTTP 503."""
