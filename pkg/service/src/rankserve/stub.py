"""Deterministic stub backend values.

Stub responses are derived from SHA-256 of the inputs, so they are stable
across processes and platforms while exercising every protocol shape.
Probabilities are quantized to 6 decimal places, which makes them exactly
representable in the run files and score files downstream tooling writes.
"""

from __future__ import annotations

import hashlib


def _hash_fraction(*parts: str, modulus: int = 1_000_001) -> float:
    digest = hashlib.sha256("\x00".join(parts).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") % modulus / (modulus - 1)


def stub_probability(query: str, passage: str) -> float:
    """Stable pseudo-probability in [0, 1] with 6-decimal granularity."""
    return round(_hash_fraction("score", query, passage), 6)


def stub_paraphrases(text: str, num_beams: int) -> list[tuple[str, float]]:
    """Word rotations of ``text`` with descending hash-derived likelihoods.

    Returns up to ``num_beams`` (text, log_likelihood) entries with
    log-likelihoods <= 0 and strictly decreasing.
    """
    words = text.split()
    beams = []
    for i in range(num_beams):
        shift = i % len(words)
        rotated = " ".join(words[shift:] + words[:shift])
        log_likelihood = -(i + _hash_fraction("beam", text, str(i)))
        beams.append((rotated, log_likelihood))
    return beams
