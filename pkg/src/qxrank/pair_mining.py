"""Equivalent-query pair mining from relevance judgments.

Queries judged relevant to the same passage are treated as near-equivalent
wordings of one information need.  This module groups judgments by passage,
reports the passage-vs-query-count histogram, enumerates the query pairs, and
exports them as aligned source/target text files for training a paraphraser.

Mining reads judgments only.  Candidate-file co-occurrence is deliberately
not supported as a pair source: queries sharing a retrieval candidate are
usually not equivalent, and pairs mined that way poison paraphrase training.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from itertools import combinations
from typing import IO, Iterable, Mapping, Sequence

from .corpus_io import Qrels
from .errors import ConfigError, NotFoundError, ValidationError

ORDERINGS = ("unordered", "both-directions")


@dataclass(frozen=True)
class PassageQueryGroup:
    """All queries judged relevant to one passage."""

    passage_id: str
    query_ids: frozenset[str]

    def __len__(self) -> int:
        return len(self.query_ids)


@dataclass(frozen=True)
class EquivalentQueryPair:
    """Two queries related through a shared relevant passage."""

    source_query_id: str
    target_query_id: str
    via_passage_id: str


@dataclass(frozen=True)
class PairMiningReport:
    """Histogram and pair statistics over the passage groups.

    ``histogram[k]`` counts passages with exactly ``k`` relevant queries.
    ``pair_occurrences`` is the per-passage sum of C(k, 2);
    ``unique_unordered_pairs`` deduplicates query pairs that share more than
    one passage.  The two coincide when no pair does.
    """

    histogram: dict[int, int]
    total_judgments: int
    unique_unordered_pairs: int
    pair_occurrences: int
    multi_query_fraction: float


def group_by_passage(qrels: Qrels, min_grade: int = 1) -> list[PassageQueryGroup]:
    """Group qualifying judgments (grade >= min_grade) by passage.

    Returns one group per passage that has at least one qualifying judgment,
    sorted by passage id.
    """
    if min_grade < 1:
        raise ConfigError(f"min_grade must be >= 1, got {min_grade}")
    queries_by_passage: dict[str, set[str]] = {}
    for (qid, pid), grade in qrels.judgments.items():
        if grade >= min_grade:
            queries_by_passage.setdefault(pid, set()).add(qid)
    return [
        PassageQueryGroup(pid, frozenset(qids))
        for pid, qids in sorted(queries_by_passage.items())
    ]


def mining_report(groups: Sequence[PassageQueryGroup]) -> PairMiningReport:
    """Compute the histogram, pair counts, and multi-query fraction."""
    histogram = dict(Counter(len(g) for g in groups))
    total_judgments = sum(k * n for k, n in histogram.items())
    pair_occurrences = sum(k * (k - 1) // 2 * n for k, n in histogram.items())
    unique: set[tuple[str, str]] = set()
    for g in groups:
        unique.update(combinations(sorted(g.query_ids), 2))
    multi = sum(n for k, n in histogram.items() if k >= 2)
    total_passages = sum(histogram.values())
    fraction = multi / total_passages if total_passages else 0.0
    return PairMiningReport(
        histogram=histogram,
        total_judgments=total_judgments,
        unique_unordered_pairs=len(unique),
        pair_occurrences=pair_occurrences,
        multi_query_fraction=fraction,
    )


def mine_pairs(groups: Sequence[PassageQueryGroup],
               ordering: str = "unordered") -> list[EquivalentQueryPair]:
    """Enumerate query pairs per group, in deterministic order.

    ``unordered`` emits each within-group pair once with the lexically
    smaller query as source; ``both-directions`` emits both directions.
    Output is sorted by (via_passage_id, source, target).
    """
    if ordering not in ORDERINGS:
        raise ConfigError(f"ordering must be one of {ORDERINGS}, got {ordering!r}")
    pairs: list[EquivalentQueryPair] = []
    for g in sorted(groups, key=lambda g: g.passage_id):
        for qa, qb in combinations(sorted(g.query_ids), 2):
            pairs.append(EquivalentQueryPair(qa, qb, g.passage_id))
            if ordering == "both-directions":
                pairs.append(EquivalentQueryPair(qb, qa, g.passage_id))
    pairs.sort(key=lambda p: (p.via_passage_id, p.source_query_id,
                              p.target_query_id))
    return pairs


def export_seq2seq(pairs: Iterable[EquivalentQueryPair], queries: Mapping[str, str],
                   source_out: IO[str], target_out: IO[str]) -> int:
    """Write aligned source/target files, one query text per line.

    Returns the number of lines written to each file.  Query texts must
    resolve and must not contain line breaks (they would silently desync the
    two files).
    """
    n = 0
    for pair in pairs:
        src = _resolve(queries, pair.source_query_id)
        tgt = _resolve(queries, pair.target_query_id)
        for qid, text in ((pair.source_query_id, src), (pair.target_query_id, tgt)):
            if "\n" in text or "\r" in text:
                raise ValidationError(f"query {qid!r} contains a line break")
        source_out.write(src + "\n")
        target_out.write(tgt + "\n")
        n += 1
    return n


def _resolve(queries: Mapping[str, str], qid: str) -> str:
    try:
        return queries[qid]
    except KeyError:
        raise NotFoundError(f"query id {qid!r} not present in the query store") from None


def write_mining_report(report: PairMiningReport, out: IO[str]) -> None:
    """Serialize the report as TSV histogram rows plus summary lines."""
    for k in sorted(report.histogram):
        out.write(f"{k}\t{report.histogram[k]}\n")
    out.write(f"total_judgments\t{report.total_judgments}\n")
    out.write(f"unique_unordered_pairs\t{report.unique_unordered_pairs}\n")
    out.write(f"pair_occurrences\t{report.pair_occurrences}\n")
    out.write(f"multi_query_fraction\t{report.multi_query_fraction:.6f}\n")


def write_pairs(pairs: Iterable[EquivalentQueryPair], out: IO[str]) -> None:
    """Serialize mined pairs as ``source <TAB> target <TAB> via_passage``."""
    for p in pairs:
        out.write(f"{p.source_query_id}\t{p.target_query_id}\t{p.via_passage_id}\n")
