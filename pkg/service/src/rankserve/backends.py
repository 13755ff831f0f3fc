"""Serving backends: deterministic stub and checkpoint-backed models.

A backend answers already-validated requests. Per-item problems (an empty
query text) become ``{"id", "error"}`` entries; a missing model raises
:class:`ModelUnavailable`, which the app maps to HTTP 503. Model inference
is serialized with a lock, so concurrent requests never share mutable
state inside torch modules.
"""

from __future__ import annotations

import threading

from .errors import ModelUnavailable
from .models import load_paraphraser, load_scorer
from .stub import stub_paraphrases, stub_probability


def _paraphrase_items(items, num_beams, generate):
    results = []
    for item in items:
        if not item.text.strip():
            results.append({"id": item.id, "error": "empty query text"})
            continue
        beams = [{"text": text, "log_likelihood": log_likelihood}
                 for text, log_likelihood in generate(item.text, num_beams)]
        results.append({"id": item.id, "beams": beams})
    return results


class StubBackend:
    """Hash-derived responses with valid shapes; no model needed."""

    def paraphrase(self, items, num_beams: int) -> list[dict]:
        return _paraphrase_items(items, num_beams, stub_paraphrases)

    def score(self, pairs) -> list[float]:
        return [stub_probability(pair.query, pair.passage) for pair in pairs]


class ModelBackend:
    """Backend serving trained checkpoints; endpoints without one give 503."""

    def __init__(self, paraphraser_path: str | None = None,
                 scorer_path: str | None = None):
        self._paraphraser = (load_paraphraser(paraphraser_path)
                             if paraphraser_path else None)
        self._scorer = load_scorer(scorer_path) if scorer_path else None
        self._lock = threading.Lock()

    def paraphrase(self, items, num_beams: int) -> list[dict]:
        if self._paraphraser is None:
            raise ModelUnavailable("no paraphraser checkpoint loaded")
        with self._lock:
            return _paraphrase_items(items, num_beams,
                                     self._paraphraser.beam_search)

    def score(self, pairs) -> list[float]:
        if self._scorer is None:
            raise ModelUnavailable("no scorer checkpoint loaded")
        with self._lock:
            return self._scorer.score_texts(
                [(pair.query, pair.passage) for pair in pairs])
