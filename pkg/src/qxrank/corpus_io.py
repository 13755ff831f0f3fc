"""Streaming parsers and writers for the pipeline's file formats.

Formats handled here:

* queries / collection TSV: ``id <TAB> text`` (text may contain tabs; only
  the first tab separates)
* qrels: whitespace-separated ``query_id 0 passage_id grade``
* candidate file: ``query_id <TAB> passage_id <TAB> query_text <TAB>
  passage_text``, grouped contiguously by query
* run file: ``query_id Q0 passage_id rank score tag`` with 6-decimal scores

All ids are opaque strings (leading zeros preserved).  Input must be valid
UTF-8; undecodable bytes are a hard parse error.  Parsers are single-pass and
the structures they return are immutable in practice: safe to share across
concurrent readers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator, Mapping, Sequence

from .errors import (
    CapacityError,
    ContractViolation,
    DuplicateKeyError,
    NotFoundError,
    ParseError,
    ValidationError,
)

MAX_CANDIDATES_PER_QUERY = 1000


@dataclass(frozen=True)
class QueryRecord:
    """One query: opaque id plus its text."""

    id: str
    text: str


@dataclass(frozen=True)
class PassageRecord:
    """One passage: opaque id plus its text."""

    id: str
    text: str


class Qrels:
    """Graded relevance judgments keyed by (query_id, passage_id).

    Grades are integers >= 0; duplicate keys are rejected.  A per-query view
    is maintained alongside the flat mapping for evaluation and mining.
    """

    def __init__(self) -> None:
        self.judgments: dict[tuple[str, str], int] = {}
        self._by_query: dict[str, dict[str, int]] = {}

    def add(self, query_id: str, passage_id: str, grade: int) -> None:
        if grade < 0:
            raise ParseError(f"negative grade {grade} for ({query_id}, {passage_id})")
        key = (query_id, passage_id)
        if key in self.judgments:
            raise DuplicateKeyError(f"duplicate judgment for ({query_id}, {passage_id})")
        self.judgments[key] = grade
        self._by_query.setdefault(query_id, {})[passage_id] = grade

    def grade(self, query_id: str, passage_id: str) -> int | None:
        return self.judgments.get((query_id, passage_id))

    def grades_for_query(self, query_id: str) -> Mapping[str, int]:
        return self._by_query.get(query_id, {})

    def relevant_passages(self, query_id: str, min_grade: int = 1) -> set[str]:
        return {p for p, g in self.grades_for_query(query_id).items() if g >= min_grade}

    @property
    def query_ids(self) -> set[str]:
        return set(self._by_query)

    def __len__(self) -> int:
        return len(self.judgments)

    def __contains__(self, key: tuple[str, str]) -> bool:
        return key in self.judgments


@dataclass
class CandidateSet:
    """Unranked candidate passages for one query.

    ``passage_ids`` preserves file order but carries no rank meaning.  Texts
    co-located in the source file are kept when available.
    """

    query_id: str
    passage_ids: list[str] = field(default_factory=list)
    query_text: str | None = None
    passage_texts: dict[str, str] | None = None

    def __len__(self) -> int:
        return len(self.passage_ids)


@dataclass(frozen=True)
class RunFileEntry:
    """One ranked line of a run file."""

    query_id: str
    passage_id: str
    rank: int
    score: float
    tag: str


def _lines(stream: Iterable[str] | IO[str]) -> Iterator[tuple[int, str]]:
    for i, raw in enumerate(stream, start=1):
        line = raw.rstrip("\n")
        if line.endswith("\r"):
            line = line[:-1]
        yield i, line


def parse_queries(stream: Iterable[str], source: str = "<stream>") -> list[QueryRecord]:
    """Parse ``id <TAB> text`` lines into QueryRecords, order preserved."""
    records: list[QueryRecord] = []
    seen: set[str] = set()
    for line_no, line in _lines(stream):
        if "\t" not in line:
            raise ParseError("expected 'id<TAB>text'", source=source, line_no=line_no)
        qid, text = line.split("\t", 1)
        if not qid:
            raise ParseError("empty query id", source=source, line_no=line_no)
        if not text.strip():
            raise ParseError(f"empty text for query {qid!r}", source=source, line_no=line_no)
        if qid in seen:
            raise DuplicateKeyError(f"{source}:{line_no}: duplicate query id {qid!r}")
        seen.add(qid)
        records.append(QueryRecord(qid, text))
    return records


def parse_collection(stream: Iterable[str], source: str = "<stream>") -> dict[str, str]:
    """Parse ``id <TAB> text`` lines into a random-access passage store.

    Tabs after the first are part of the text.
    """
    store: dict[str, str] = {}
    for line_no, line in _lines(stream):
        if "\t" not in line:
            raise ParseError("expected 'id<TAB>text'", source=source, line_no=line_no)
        pid, text = line.split("\t", 1)
        if not pid:
            raise ParseError("empty passage id", source=source, line_no=line_no)
        if pid in store:
            raise DuplicateKeyError(f"{source}:{line_no}: duplicate passage id {pid!r}")
        store[pid] = text
    return store


def parse_qrels(stream: Iterable[str], source: str = "<stream>") -> Qrels:
    """Parse whitespace-separated ``query_id 0 passage_id grade`` lines."""
    qrels = Qrels()
    for line_no, line in _lines(stream):
        fields = line.split()
        if not fields:
            continue
        if len(fields) != 4:
            raise ParseError(
                f"expected 4 whitespace-separated fields, got {len(fields)}",
                source=source, line_no=line_no,
            )
        qid, _iteration, pid, grade_str = fields
        try:
            grade = int(grade_str)
        except ValueError:
            raise ParseError(
                f"non-integer grade {grade_str!r}", source=source, line_no=line_no
            ) from None
        try:
            qrels.add(qid, pid, grade)
        except ParseError as e:
            raise ParseError(str(e), source=source, line_no=line_no) from None
        except DuplicateKeyError as e:
            raise DuplicateKeyError(f"{source}:{line_no}: {e}") from None
    return qrels


def iter_candidate_sets(stream: Iterable[str],
                        source: str = "<stream>") -> Iterator[CandidateSet]:
    """Stream candidate sets from a 4-column candidate file, one per query.

    The file must be grouped contiguously by query id (the distributed files
    are).  Memory use is bounded by the largest single group plus the set of
    already-finished query ids, not by file size.
    """
    current: CandidateSet | None = None
    finished: set[str] = set()
    for line_no, line in _lines(stream):
        parts = line.split("\t", 3)
        if len(parts) != 4:
            raise ParseError(
                f"expected 4 tab-separated fields, got {len(parts)}",
                source=source, line_no=line_no,
            )
        qid, pid, query_text, passage_text = parts
        if current is None or qid != current.query_id:
            if current is not None:
                finished.add(current.query_id)
                yield current
            if qid in finished:
                raise ParseError(
                    f"query {qid!r} reappears after its group ended; "
                    "file is not grouped by query",
                    source=source, line_no=line_no,
                )
            current = CandidateSet(qid, query_text=query_text, passage_texts={})
        elif query_text != current.query_text:
            raise ParseError(
                f"inconsistent query text within group {qid!r}",
                source=source, line_no=line_no,
            )
        assert current.passage_texts is not None
        if pid in current.passage_texts:
            raise DuplicateKeyError(
                f"{source}:{line_no}: duplicate candidate {pid!r} for query {qid!r}"
            )
        if len(current.passage_ids) >= MAX_CANDIDATES_PER_QUERY:
            raise CapacityError(
                f"{source}:{line_no}: more than {MAX_CANDIDATES_PER_QUERY} "
                f"candidates for query {qid!r}"
            )
        current.passage_ids.append(pid)
        current.passage_texts[pid] = passage_text
    if current is not None:
        yield current


def parse_top1000(stream: Iterable[str],
                  source: str = "<stream>") -> dict[str, CandidateSet]:
    """Eagerly parse a candidate file into a mapping query_id -> CandidateSet."""
    return {cs.query_id: cs for cs in iter_candidate_sets(stream, source=source)}


def write_top1000(candidate_sets: Iterable[CandidateSet], out: IO[str]) -> None:
    """Write candidate sets in the 4-column candidate file format."""
    for cs in candidate_sets:
        if cs.query_text is None or cs.passage_texts is None:
            raise ContractViolation(
                f"candidate set for query {cs.query_id!r} lacks texts")
        for pid in cs.passage_ids:
            fields = (cs.query_id, pid, cs.query_text, cs.passage_texts[pid])
            for value in fields:
                if "\n" in value or "\r" in value:
                    raise ValidationError(
                        f"query {cs.query_id!r}: field contains a newline")
            for value in fields[:3]:
                if "\t" in value:
                    raise ValidationError(
                        f"query {cs.query_id!r}: only the passage text "
                        f"column may contain tabs")
            out.write("\t".join(fields) + "\n")


def write_run_file(rankings: Mapping[str, Sequence[tuple[str, float]]],
                   tag: str, out: IO[str]) -> None:
    """Write rankings as a 6-column TREC run file.

    Each per-query list must already be sorted by score descending with ties
    broken; queries are emitted in ascending query-id order.  Scores are
    printed with 6 decimal places.
    """
    if not tag or tag != tag.strip():
        raise ContractViolation(f"run tag must be non-empty with no edge whitespace: {tag!r}")
    for qid in sorted(rankings):
        entries = rankings[qid]
        seen_pids: set[str] = set()
        prev_score: float | None = None
        for rank, (pid, score) in enumerate(entries, start=1):
            if prev_score is not None and score > prev_score:
                raise ContractViolation(
                    f"query {qid!r}: scores not sorted descending at rank {rank}"
                )
            if pid in seen_pids:
                raise ContractViolation(f"query {qid!r}: duplicate passage {pid!r}")
            seen_pids.add(pid)
            prev_score = score
            out.write(f"{qid} Q0 {pid} {rank} {score:.6f} {tag}\n")


def parse_run_file(stream: Iterable[str],
                   source: str = "<stream>") -> dict[str, list[RunFileEntry]]:
    """Parse a run file, validating per-query rank contiguity and score order."""
    runs: dict[str, list[RunFileEntry]] = {}
    seen: dict[str, set[str]] = {}
    for line_no, line in _lines(stream):
        fields = line.split()
        if not fields:
            continue
        if len(fields) != 6:
            raise ParseError(
                f"expected 6 whitespace-separated fields, got {len(fields)}",
                source=source, line_no=line_no,
            )
        qid, _q0, pid, rank_str, score_str, tag = fields
        try:
            rank = int(rank_str)
            score = float(score_str)
        except ValueError:
            raise ParseError(
                f"bad rank/score {rank_str!r}/{score_str!r}",
                source=source, line_no=line_no,
            ) from None
        entries = runs.setdefault(qid, [])
        if rank != len(entries) + 1:
            raise ParseError(
                f"query {qid!r}: rank {rank} out of sequence "
                f"(expected {len(entries) + 1})",
                source=source, line_no=line_no,
            )
        if entries and score > entries[-1].score:
            raise ParseError(
                f"query {qid!r}: score increases at rank {rank}",
                source=source, line_no=line_no,
            )
        pids = seen.setdefault(qid, set())
        if pid in pids:
            raise DuplicateKeyError(
                f"{source}:{line_no}: duplicate passage {pid!r} for query {qid!r}"
            )
        pids.add(pid)
        entries.append(RunFileEntry(qid, pid, rank, score, tag))
    return runs


def write_qrels(qrels: Qrels, out: IO[str]) -> None:
    """Write judgments in the 4-column qrels format, sorted for determinism."""
    for (qid, pid), grade in sorted(qrels.judgments.items()):
        out.write(f"{qid} 0 {pid} {grade}\n")


def query_store(records: Iterable[QueryRecord]) -> dict[str, str]:
    """Index QueryRecords by id."""
    store: dict[str, str] = {}
    for r in records:
        if r.id in store:
            raise DuplicateKeyError(f"duplicate query id {r.id!r}")
        store[r.id] = r.text
    return store


def _open_text(path: str):
    return open(path, encoding="utf-8", errors="strict", newline="")


def _load(path: str, parser):
    try:
        with _open_text(path) as f:
            return parser(f, source=path)
    except UnicodeDecodeError as e:
        raise ParseError(f"invalid UTF-8: {e}", source=path) from e
    except OSError as e:
        raise NotFoundError(f"cannot read {path}: {e}") from e


def load_queries(path: str) -> list[QueryRecord]:
    return _load(path, parse_queries)


def load_collection(path: str) -> dict[str, str]:
    return _load(path, parse_collection)


def load_qrels(path: str) -> Qrels:
    return _load(path, parse_qrels)


def load_top1000(path: str) -> dict[str, CandidateSet]:
    return _load(path, parse_top1000)


def load_run_file(path: str) -> dict[str, list[RunFileEntry]]:
    return _load(path, parse_run_file)
