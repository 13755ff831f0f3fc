"""Query expansion: append generated paraphrases to the original query.

An expanded query is the original text followed by its top-k paraphrase
beams, space-separated, so downstream tokenization sees one longer query.
Beams come either from a precomputed TSV (`query_id <TAB> rank <TAB>
log_likelihood <TAB> text`) or from the paraphrase service via a client.

Filter policies prune beams before assembly:

  none                      keep everything
  dedup-exact               drop beams identical to the original or an
                            earlier beam
  min-log-likelihood:THETA  keep beams with log-likelihood >= THETA
  lexical-overlap:TAU       keep beams whose token Jaccard with the
                            original is >= TAU (TAU in [0, 1])

Thresholded policies also accept the `name(value)` spelling.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import IO, Iterable, Mapping, Sequence

from sklearn.base import BaseEstimator

from .corpus_io import QueryRecord, _lines
from .errors import (ConfigError, ContractViolation, ParseError,
                     ValidationError)
from .tokenization import tokenize

log = logging.getLogger(__name__)

FILTER_POLICY_NAMES = ("none", "dedup-exact", "min-log-likelihood",
                       "lexical-overlap")


@dataclass(frozen=True)
class ParaphraseBeam:
    """One beam-search output with its model-estimated log-likelihood."""

    text: str
    log_likelihood: float
    beam_rank: int

    def __post_init__(self) -> None:
        if not self.log_likelihood <= 0.0:
            raise ValidationError(
                f"log-likelihood must be <= 0, got {self.log_likelihood}")
        if self.beam_rank < 1:
            raise ValidationError(f"beam rank must be >= 1, got {self.beam_rank}")


@dataclass(frozen=True)
class ExpandedQuery:
    """Original query plus the beams appended to form the assembled text."""

    query_id: str
    original_text: str
    beams_used: tuple[ParaphraseBeam, ...]
    assembled_text: str


@dataclass(frozen=True)
class FilterPolicy:
    """Parsed beam filter: a policy name plus optional threshold."""

    name: str
    threshold: float | None = None


def parse_filter_policy(text: str) -> FilterPolicy:
    """Parse a policy string such as ``dedup-exact`` or ``lexical-overlap:0.2``."""
    spec = text.strip()
    name, sep, arg = spec.partition(":")
    if not sep and spec.endswith(")") and "(" in spec:
        name, _, arg = spec[:-1].partition("(")
    name = name.strip()
    arg = arg.strip()
    if name in ("none", "dedup-exact"):
        if arg:
            raise ConfigError(f"filter policy {name!r} takes no threshold")
        return FilterPolicy(name)
    if name in ("min-log-likelihood", "lexical-overlap"):
        if not arg:
            raise ConfigError(f"filter policy {name!r} requires a threshold")
        try:
            threshold = float(arg)
        except ValueError:
            raise ConfigError(f"invalid threshold {arg!r} for policy {name!r}")
        if name == "lexical-overlap" and not 0.0 <= threshold <= 1.0:
            raise ConfigError(
                f"lexical-overlap threshold must be in [0, 1], got {threshold}")
        return FilterPolicy(name, threshold)
    raise ConfigError(
        f"unknown filter policy {name!r}; expected one of {FILTER_POLICY_NAMES}")


def _jaccard(a: set[str], b: set[str]) -> float:
    if not a and not b:
        return 0.0
    return len(a & b) / len(a | b)


def filter_beams(beams: Sequence[ParaphraseBeam], policy: FilterPolicy,
                 original_text: str | None = None) -> list[ParaphraseBeam]:
    """Apply a filter policy; returns an order-preserving subsequence."""
    if policy.name == "none":
        return list(beams)
    if policy.name == "dedup-exact":
        kept: list[ParaphraseBeam] = []
        seen = {original_text.strip()} if original_text is not None else set()
        for beam in beams:
            key = beam.text.strip()
            if key in seen:
                continue
            seen.add(key)
            kept.append(beam)
        return kept
    if policy.name == "min-log-likelihood":
        assert policy.threshold is not None
        return [b for b in beams if b.log_likelihood >= policy.threshold]
    if policy.name == "lexical-overlap":
        assert policy.threshold is not None
        if original_text is None:
            raise ConfigError(
                "lexical-overlap filtering needs the original query text")
        original_tokens = set(tokenize(original_text))
        return [b for b in beams
                if _jaccard(set(tokenize(b.text)), original_tokens)
                >= policy.threshold]
    raise ConfigError(f"unknown filter policy {policy.name!r}")


def assemble(original: QueryRecord, beams: Sequence[ParaphraseBeam],
             k: int) -> ExpandedQuery:
    """Append the first min(k, len(beams)) beams to the original query text."""
    if k < 0:
        raise ConfigError(f"beam count must be >= 0, got {k}")
    ranks = [b.beam_rank for b in beams]
    if any(r2 <= r1 for r1, r2 in zip(ranks, ranks[1:])):
        raise ContractViolation(
            f"beams for query {original.id!r} are not sorted by rank: {ranks}")
    used = tuple(beams[:k])
    parts = [original.text] + [b.text for b in used]
    return ExpandedQuery(original.id, original.text, used, " ".join(parts))


def load_precomputed_expansions(stream: Iterable[str],
                                source: str = "<expansions>"
                                ) -> dict[str, list[ParaphraseBeam]]:
    """Read the expansions TSV, returning rank-sorted beams per query."""
    grouped: dict[str, list[ParaphraseBeam]] = {}
    for line_no, line in _lines(stream):
        if not line:
            continue
        parts = line.split("\t", 3)
        if len(parts) != 4:
            raise ParseError("expected query_id<TAB>rank<TAB>log_likelihood"
                             "<TAB>text", source, line_no)
        qid, rank_s, ll_s, text = parts
        if not qid or not text:
            raise ParseError("empty query id or beam text", source, line_no)
        try:
            rank = int(rank_s)
            ll = float(ll_s)
        except ValueError:
            raise ParseError(f"bad rank or log-likelihood: {rank_s!r}, {ll_s!r}",
                             source, line_no)
        try:
            beam = ParaphraseBeam(text, ll, rank)
        except ValidationError as e:
            raise ValidationError(f"{source}:{line_no}: {e}")
        grouped.setdefault(qid, []).append(beam)
    for qid, beams in grouped.items():
        beams.sort(key=lambda b: b.beam_rank)
        _check_beam_invariants(qid, beams, source)
    return grouped


def _check_beam_invariants(query_id: str, beams: Sequence[ParaphraseBeam],
                           source: str) -> None:
    for prev, cur in zip(beams, beams[1:]):
        if cur.beam_rank == prev.beam_rank:
            raise ValidationError(
                f"{source}: duplicate beam rank {cur.beam_rank} "
                f"for query {query_id!r}")
        if cur.log_likelihood > prev.log_likelihood:
            raise ValidationError(
                f"{source}: log-likelihoods increase with rank for query "
                f"{query_id!r} ({prev.log_likelihood} -> {cur.log_likelihood})")


def write_expansions(beams_by_query: Mapping[str, Sequence[ParaphraseBeam]],
                     out: IO[str]) -> None:
    """Write the expansions TSV (query id order sorted, ranks ascending)."""
    for qid in sorted(beams_by_query):
        for beam in sorted(beams_by_query[qid], key=lambda b: b.beam_rank):
            if "\t" in beam.text or "\n" in beam.text or "\r" in beam.text:
                raise ValidationError(
                    f"beam text for query {qid!r} contains a tab or newline")
            out.write(f"{qid}\t{beam.beam_rank}\t{beam.log_likelihood:.6f}"
                      f"\t{beam.text}\n")


def fetch_expansions(queries: Sequence[QueryRecord], client,
                     num_beams: int,
                     persist_to: IO[str] | None = None
                     ) -> dict[str, list[ParaphraseBeam]]:
    """Fetch beams from a paraphrase service client, optionally persisting them.

    Queries the service rejected individually are logged and omitted from the
    result; they will proceed unexpanded downstream.
    """
    if num_beams < 1:
        raise ConfigError(f"num_beams must be >= 1, got {num_beams}")
    if not queries:
        return {}
    fetched = client.expansions(queries, num_beams)
    if persist_to is not None:
        write_expansions(fetched, persist_to)
    return fetched


class QueryExpander(BaseEstimator):
    """Estimator face of expansion: fit on a beam mapping, transform queries.

    Queries without beams pass through unexpanded with a logged warning, so
    one failed expansion cannot abort a whole run.
    """

    def __init__(self, num_beams: int = 3, filter_policy: str = "none"):
        self.num_beams = num_beams
        self.filter_policy = filter_policy

    def fit(self, beams_by_query: Mapping[str, Sequence[ParaphraseBeam]],
            y=None) -> "QueryExpander":
        if self.num_beams < 0:
            raise ConfigError(f"num_beams must be >= 0, got {self.num_beams}")
        self.policy_ = parse_filter_policy(self.filter_policy)
        self.beams_ = {qid: list(beams) for qid, beams in beams_by_query.items()}
        return self

    def transform(self, queries: Sequence[QueryRecord]) -> list[ExpandedQuery]:
        if not hasattr(self, "beams_"):
            raise ConfigError("QueryExpander.transform called before fit")
        expanded = []
        for query in queries:
            beams = self.beams_.get(query.id)
            if beams is None:
                log.warning("no expansions for query %s; proceeding unexpanded",
                            query.id)
                beams = []
            kept = filter_beams(beams, self.policy_, query.text)
            expanded.append(assemble(query, kept, self.num_beams))
        return expanded
