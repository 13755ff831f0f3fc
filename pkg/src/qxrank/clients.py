"""HTTP clients for the paraphrase and relevance-score services.

Both services speak JSON over POST. Transport failures and 503 responses are
retried a bounded number of times and then surfaced as ServiceError; any
response that breaks the wire contract (bad shape, out-of-range values,
misordered log-likelihoods) is a ProtocolError and is not retried.

The transport is injectable so tests can exercise the full validation and
retry logic without a network.
"""

from __future__ import annotations

import logging
import time
from typing import Any, Protocol, Sequence

from .errors import ConfigError, ProtocolError, ServiceError
from .expansion import ParaphraseBeam
from .corpus_io import QueryRecord

log = logging.getLogger(__name__)

DEFAULT_TIMEOUT = 30.0
DEFAULT_BATCH_SIZE = 32
DEFAULT_RETRIES = 3


class Transport(Protocol):
    def post(self, url: str, payload: dict) -> tuple[int, Any]:
        """Return (status code, decoded JSON body)."""


class RequestsTransport:
    """Default transport backed by the requests library."""

    def __init__(self, timeout: float = DEFAULT_TIMEOUT):
        self.timeout = timeout

    def post(self, url: str, payload: dict) -> tuple[int, Any]:
        import requests

        try:
            response = requests.post(url, json=payload, timeout=self.timeout)
        except requests.RequestException as e:
            raise ConnectionError(str(e)) from e
        try:
            body = response.json()
        except ValueError:
            body = None
        return response.status_code, body


class _ServiceClient:
    def __init__(self, base_url: str, transport: Transport | None = None,
                 batch_size: int = DEFAULT_BATCH_SIZE,
                 max_retries: int = DEFAULT_RETRIES,
                 backoff: float = 0.2):
        if batch_size < 1:
            raise ConfigError(f"batch size must be >= 1, got {batch_size}")
        if max_retries < 1:
            raise ConfigError(f"max retries must be >= 1, got {max_retries}")
        self.base_url = base_url.rstrip("/")
        self.transport = transport if transport is not None else RequestsTransport()
        self.batch_size = batch_size
        self.max_retries = max_retries
        self.backoff = backoff

    def _post(self, path: str, payload: dict) -> Any:
        """POST with bounded retries on transport errors and 503."""
        url = self.base_url + path
        last_failure = ""
        for attempt in range(1, self.max_retries + 1):
            try:
                status, body = self.transport.post(url, payload)
            except ConnectionError as e:
                last_failure = f"transport error: {e}"
            else:
                if status == 200:
                    return body
                if status == 503:
                    last_failure = "service unavailable (503)"
                else:
                    detail = body.get("error") if isinstance(body, dict) else body
                    raise ProtocolError(
                        f"{url} returned status {status}: {detail!r}")
            if attempt < self.max_retries:
                log.warning("request to %s failed (%s), retry %d/%d",
                            url, last_failure, attempt, self.max_retries - 1)
                if self.backoff > 0:
                    time.sleep(self.backoff * attempt)
        raise ServiceError(
            f"{url} failed after {self.max_retries} attempts: {last_failure}")


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ProtocolError(message)


class ParaphraseClient(_ServiceClient):
    """Client for POST /paraphrase; returns validated rank-ordered beams."""

    def expansions(self, queries: Sequence[QueryRecord], num_beams: int
                   ) -> dict[str, list[ParaphraseBeam]]:
        if num_beams < 1:
            raise ConfigError(f"num_beams must be >= 1, got {num_beams}")
        results: dict[str, list[ParaphraseBeam]] = {}
        for start in range(0, len(queries), self.batch_size):
            batch = queries[start:start + self.batch_size]
            payload = {"queries": [{"id": q.id, "text": q.text} for q in batch],
                       "num_beams": num_beams}
            body = self._post("/paraphrase", payload)
            results.update(self._parse_response(body, batch, num_beams))
        return results

    def _parse_response(self, body: Any, batch: Sequence[QueryRecord],
                        num_beams: int) -> dict[str, list[ParaphraseBeam]]:
        _require(isinstance(body, dict) and isinstance(body.get("results"), list),
                 f"paraphrase response is not {{'results': [...]}}: {body!r}")
        expected = {q.id for q in batch}
        parsed: dict[str, list[ParaphraseBeam]] = {}
        for item in body["results"]:
            _require(isinstance(item, dict) and isinstance(item.get("id"), str),
                     f"paraphrase result item missing string id: {item!r}")
            qid = item["id"]
            _require(qid in expected and qid not in parsed,
                     f"unexpected or duplicate result id {qid!r}")
            if "error" in item:
                log.warning("paraphrase service rejected query %s: %s",
                            qid, item["error"])
                parsed[qid] = []
                continue
            _require(isinstance(item.get("beams"), list),
                     f"paraphrase result for {qid!r} missing beams list")
            _require(len(item["beams"]) <= num_beams,
                     f"service returned {len(item['beams'])} beams for {qid!r}, "
                     f"asked for {num_beams}")
            beams = []
            previous = 0.0
            for rank, raw in enumerate(item["beams"], start=1):
                _require(isinstance(raw, dict) and isinstance(raw.get("text"), str)
                         and isinstance(raw.get("log_likelihood"), (int, float)),
                         f"malformed beam for {qid!r}: {raw!r}")
                ll = float(raw["log_likelihood"])
                _require(ll <= 0.0,
                         f"positive log-likelihood {ll} for {qid!r}")
                _require(ll <= previous,
                         f"log-likelihoods for {qid!r} are not non-increasing")
                previous = ll
                beams.append(ParaphraseBeam(raw["text"], ll, rank))
            parsed[qid] = beams
        missing = expected - parsed.keys()
        _require(not missing,
                 f"paraphrase response missing ids: {sorted(missing)}")
        return {qid: beams for qid, beams in parsed.items() if beams}


class ScoreClient(_ServiceClient):
    """Client for POST /score; returns probabilities aligned with the input."""

    def score_pairs(self, pairs: Sequence[tuple[str, str]]) -> list[float]:
        """Score (query text, passage text) pairs, preserving input order."""
        scores: list[float] = []
        for start in range(0, len(pairs), self.batch_size):
            batch = pairs[start:start + self.batch_size]
            payload = {"pairs": [
                {"id": str(i), "query": query, "passage": passage}
                for i, (query, passage) in enumerate(batch)]}
            body = self._post("/score", payload)
            scores.extend(self._parse_response(body, len(batch)))
        return scores

    def _parse_response(self, body: Any, batch_size: int) -> list[float]:
        _require(isinstance(body, dict) and isinstance(body.get("scores"), list),
                 f"score response is not {{'scores': [...]}}: {body!r}")
        items = body["scores"]
        _require(len(items) == batch_size,
                 f"score response has {len(items)} entries for "
                 f"{batch_size} pairs")
        by_id: dict[str, float] = {}
        for item in items:
            _require(isinstance(item, dict) and isinstance(item.get("id"), str)
                     and isinstance(item.get("probability"), (int, float)),
                     f"malformed score item: {item!r}")
            probability = float(item["probability"])
            _require(0.0 <= probability <= 1.0,
                     f"probability {probability} outside [0, 1]")
            _require(item["id"] not in by_id,
                     f"duplicate score id {item['id']!r}")
            by_id[item["id"]] = probability
        try:
            return [by_id[str(i)] for i in range(batch_size)]
        except KeyError as e:
            raise ProtocolError(f"score response missing id {e}")

    def health(self) -> bool:
        """True when GET /health answers ok; never raises."""
        try:
            import requests

            response = requests.get(self.base_url + "/health", timeout=5.0)
            return (response.status_code == 200
                    and response.json().get("status") == "ok")
        except Exception:
            return False
