"""Second-stage reranking: truncate scorer inputs, score, sort.

The scorer input contract: the query keeps at most ``max_query_tokens``
leading tokens, and query + passage + special-token overhead never exceeds
``total_budget`` tokens (defaults 64 and 512 with an overhead of 3 for the
sequence-start marker and two separators). Tokens are whitespace tokens by
default; supplying a subword vocabulary switches the budget to subword
counts while still cutting at word boundaries so the truncated text remains
reconstructable.

Scorers are pluggable: a lexical-overlap baseline, precomputed score files,
a remote scoring service, and constant/oracle scorers for fixtures. Scoring
is all-or-nothing per query; a failure for any pair aborts that query's
ranking rather than emitting a partial one.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass
from typing import IO, Iterable, Mapping, Sequence

from .clients import ScoreClient
from .corpus_io import CandidateSet, PassageRecord, Qrels, _lines
from .errors import (ConfigError, ContractViolation, DuplicateKeyError,
                     NotFoundError, ParseError, ValidationError)
from .expansion import ExpandedQuery
from .tokenization import SubwordVocab, tokenize, truncate_words_by_subword_budget

log = logging.getLogger(__name__)

DEFAULT_MAX_QUERY_TOKENS = 64
DEFAULT_TOTAL_BUDGET = 512
DEFAULT_SPECIAL_TOKEN_OVERHEAD = 3


@dataclass(frozen=True)
class ScorerInput:
    """Token sequences ready for a budgeted scorer."""

    query_tokens: tuple[str, ...]
    passage_tokens: tuple[str, ...]
    total_budget: int
    special_token_overhead: int


def _check_budgets(max_query_tokens: int, total_budget: int,
                   special_token_overhead: int) -> None:
    if max_query_tokens < 1:
        raise ConfigError(
            f"max_query_tokens must be >= 1, got {max_query_tokens}")
    if special_token_overhead < 0:
        raise ConfigError(
            f"special_token_overhead must be >= 0, got {special_token_overhead}")
    if total_budget <= special_token_overhead + 1:
        raise ConfigError(
            f"total_budget {total_budget} leaves no room beyond "
            f"{special_token_overhead} special tokens")


def prepare_input(query_tokens: Sequence[str], passage_tokens: Sequence[str],
                  max_query_tokens: int = DEFAULT_MAX_QUERY_TOKENS,
                  total_budget: int = DEFAULT_TOTAL_BUDGET,
                  special_token_overhead: int = DEFAULT_SPECIAL_TOKEN_OVERHEAD
                  ) -> ScorerInput:
    """Truncate to the scorer budget, keeping leading tokens."""
    _check_budgets(max_query_tokens, total_budget, special_token_overhead)
    usable = total_budget - special_token_overhead
    query = tuple(query_tokens[:min(max_query_tokens, usable)])
    passage = tuple(passage_tokens[:usable - len(query)])
    return ScorerInput(query, passage, total_budget, special_token_overhead)


@dataclass(frozen=True)
class TruncationConfig:
    """Budget parameters plus the optional subword vocabulary."""

    max_query_tokens: int = DEFAULT_MAX_QUERY_TOKENS
    total_budget: int = DEFAULT_TOTAL_BUDGET
    special_token_overhead: int = DEFAULT_SPECIAL_TOKEN_OVERHEAD
    vocab: SubwordVocab | None = None

    def __post_init__(self) -> None:
        _check_budgets(self.max_query_tokens, self.total_budget,
                       self.special_token_overhead)


def _truncate_query(query_text: str, config: TruncationConfig
                    ) -> tuple[str, int]:
    """Truncated query text plus the passage room its cost leaves."""
    words = query_text.split()
    usable = config.total_budget - config.special_token_overhead
    budget = min(config.max_query_tokens, usable)
    if config.vocab is None:
        kept = words[:budget]
        cost = len(kept)
    else:
        kept, cost = truncate_words_by_subword_budget(words, config.vocab,
                                                      budget)
    return " ".join(kept), usable - cost


def _truncate_passage(passage_text: str, config: TruncationConfig,
                      room: int) -> str:
    words = passage_text.split()
    if config.vocab is None:
        kept = words[:room]
    else:
        kept, _ = truncate_words_by_subword_budget(words, config.vocab, room)
    return " ".join(kept)


def truncate_texts(query_text: str, passage_text: str,
                   config: TruncationConfig = TruncationConfig()
                   ) -> tuple[str, str]:
    """Apply the scorer budget to raw texts; returns (query, passage) texts.

    Whitespace tokens by default. With a vocabulary, budgets count subword
    tokens but cuts stay on word boundaries.
    """
    truncated_query, room = _truncate_query(query_text, config)
    return truncated_query, _truncate_passage(passage_text, config, room)


@dataclass(frozen=True)
class LabeledPair:
    """A (query, passage) training example: 1 relevant, 0 non-relevant."""

    query_id: str
    passage_id: str
    label: int

    def __post_init__(self) -> None:
        if self.label not in (0, 1):
            raise ValidationError(f"label must be 0 or 1, got {self.label}")


def sample_training_pairs(qrels: Qrels, candidates: Iterable[CandidateSet],
                          negatives_per_positive: int, seed: int,
                          min_grade: int = 1,
                          negatives_from: str = "candidates",
                          collection_ids: Iterable[str] | None = None
                          ) -> list[LabeledPair]:
    """Emit all qualifying positives plus seeded sampled negatives.

    Negatives come from the query's own candidate set by default, or
    uniformly from the whole collection with ``negatives_from="collection"``.
    Judged-relevant passages are never sampled as negatives. When a query's
    pool cannot supply ``negatives_per_positive`` negatives per positive, the
    shortfall is logged and the available ones are emitted.
    """
    if negatives_per_positive < 1:
        raise ConfigError(f"negatives_per_positive must be >= 1, "
                          f"got {negatives_per_positive}")
    if negatives_from not in ("candidates", "collection"):
        raise ConfigError(f"negatives_from must be 'candidates' or "
                          f"'collection', got {negatives_from!r}")
    if negatives_from == "collection" and collection_ids is None:
        raise ConfigError("collection negatives need collection_ids")
    by_query = {c.query_id: c for c in candidates}
    all_pids = sorted(collection_ids) if collection_ids is not None else []
    rng = random.Random(seed)
    pairs: list[LabeledPair] = []
    for qid in sorted(qrels.query_ids):
        positives = qrels.relevant_passages(qid, min_grade)
        if not positives:
            continue
        if negatives_from == "candidates":
            candidate_set = by_query.get(qid)
            if candidate_set is None:
                raise NotFoundError(f"no candidate set for query {qid!r}")
            pool = sorted(set(candidate_set.passage_ids) - positives)
        else:
            pool = [pid for pid in all_pids if pid not in positives]
        wanted = negatives_per_positive * len(positives)
        if len(pool) < wanted:
            log.warning("query %s: only %d negatives available, wanted %d",
                        qid, len(pool), wanted)
        negatives = sorted(rng.sample(pool, min(wanted, len(pool))))
        pairs.extend(LabeledPair(qid, pid, 1) for pid in sorted(positives))
        pairs.extend(LabeledPair(qid, pid, 0) for pid in negatives)
    return pairs


def write_labeled_pairs(pairs: Sequence[LabeledPair], out: IO[str]) -> None:
    for pair in pairs:
        out.write(f"{pair.query_id}\t{pair.passage_id}\t{pair.label}\n")


def load_labeled_pairs(stream: Iterable[str],
                       source: str = "<pairs>") -> list[LabeledPair]:
    pairs = []
    for line_no, line in _lines(stream):
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ParseError("expected query_id<TAB>passage_id<TAB>label",
                             source, line_no)
        qid, pid, label_s = parts
        try:
            label = int(label_s)
        except ValueError:
            raise ParseError(f"bad label {label_s!r}", source, line_no)
        try:
            pairs.append(LabeledPair(qid, pid, label))
        except ValidationError as e:
            raise ParseError(str(e), source, line_no)
    return pairs


@dataclass(frozen=True)
class Ranking:
    """Scored candidates for one query, best first."""

    query_id: str
    entries: tuple[tuple[str, float], ...]

    def __post_init__(self) -> None:
        previous_score: float | None = None
        seen = set()
        for pid, score in self.entries:
            if pid in seen:
                raise ValidationError(
                    f"duplicate passage {pid!r} in ranking for "
                    f"{self.query_id!r}")
            seen.add(pid)
            if previous_score is not None and score > previous_score:
                raise ValidationError(
                    f"scores increase at passage {pid!r} in ranking for "
                    f"{self.query_id!r}")
            previous_score = score

    def passage_ids(self) -> list[str]:
        return [pid for pid, _ in self.entries]


class LexicalOverlapScorer:
    """Token-set Jaccard between query and passage; no model needed."""

    needs_texts = True

    def score_batch(self, query_id: str, query_text: str,
                    items: Sequence[tuple[str, str]]) -> list[float]:
        query_tokens = set(tokenize(query_text))
        scores = []
        for _, passage_text in items:
            passage_tokens = set(tokenize(passage_text))
            if not query_tokens and not passage_tokens:
                scores.append(0.0)
            else:
                scores.append(len(query_tokens & passage_tokens)
                              / len(query_tokens | passage_tokens))
        return scores


def lexical_overlap_scorer(expanded: ExpandedQuery,
                           passage: PassageRecord) -> float:
    """Jaccard similarity of assembled-query and passage token sets."""
    return LexicalOverlapScorer().score_batch(
        expanded.query_id, expanded.assembled_text,
        [(passage.id, passage.text)])[0]


class PrecomputedScorer:
    """Looks pairs up in a (query_id, passage_id) -> score mapping."""

    needs_texts = False

    def __init__(self, scores: Mapping[tuple[str, str], float]):
        self.scores = scores

    def score_batch(self, query_id: str, query_text: str,
                    items: Sequence[tuple[str, str]]) -> list[float]:
        scores = []
        for pid, _ in items:
            try:
                scores.append(self.scores[(query_id, pid)])
            except KeyError:
                raise NotFoundError(
                    f"no precomputed score for query {query_id!r} "
                    f"passage {pid!r}")
        return scores


class RemoteScorer:
    """Delegates scoring to the relevance service through a ScoreClient."""

    needs_texts = True

    def __init__(self, client: ScoreClient):
        self.client = client

    def score_batch(self, query_id: str, query_text: str,
                    items: Sequence[tuple[str, str]]) -> list[float]:
        return self.client.score_pairs(
            [(query_text, passage_text) for _, passage_text in items])


class ConstantScorer:
    """Scores every pair the same; rankings fall back to passage-id order."""

    needs_texts = False

    def __init__(self, value: float = 0.5):
        if not 0.0 <= value <= 1.0:
            raise ConfigError(f"constant score must be in [0, 1], got {value}")
        self.value = value

    def score_batch(self, query_id: str, query_text: str,
                    items: Sequence[tuple[str, str]]) -> list[float]:
        return [self.value] * len(items)


class OracleScorer:
    """1.0 for judged-relevant pairs, 0.0 otherwise (fixture scorer)."""

    needs_texts = False

    def __init__(self, qrels: Qrels, min_grade: int = 1):
        self.qrels = qrels
        self.min_grade = min_grade

    def score_batch(self, query_id: str, query_text: str,
                    items: Sequence[tuple[str, str]]) -> list[float]:
        relevant = self.qrels.relevant_passages(query_id, self.min_grade)
        return [1.0 if pid in relevant else 0.0 for pid, _ in items]


def load_precomputed_scores(stream: Iterable[str], source: str = "<scores>"
                            ) -> dict[tuple[str, str], float]:
    """Read the scores TSV `query_id <TAB> passage_id <TAB> score`."""
    scores: dict[tuple[str, str], float] = {}
    for line_no, line in _lines(stream):
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ParseError("expected query_id<TAB>passage_id<TAB>score",
                             source, line_no)
        qid, pid, score_s = parts
        try:
            score = float(score_s)
        except ValueError:
            raise ParseError(f"bad score {score_s!r}", source, line_no)
        if not 0.0 <= score <= 1.0:
            raise ValidationError(
                f"{source}:{line_no}: score {score} outside [0, 1]")
        if (qid, pid) in scores:
            raise DuplicateKeyError(
                f"{source}:{line_no}: duplicate score for ({qid!r}, {pid!r})")
        scores[(qid, pid)] = score
    return scores


def write_precomputed_scores(scores: Mapping[tuple[str, str], float],
                             out: IO[str]) -> None:
    for qid, pid in sorted(scores):
        out.write(f"{qid}\t{pid}\t{scores[(qid, pid)]:.6f}\n")


def rerank(candidates: CandidateSet, expanded: ExpandedQuery, scorer,
           truncation: TruncationConfig | None = None) -> Ranking:
    """Score every candidate once and sort descending, ties by passage id.

    The scorer sees the expanded query text (truncated when a truncation
    config is given). A scorer failure for any pair aborts the query.
    """
    if candidates.query_id != expanded.query_id:
        raise ContractViolation(
            f"candidate set is for query {candidates.query_id!r} but "
            f"expansion is for {expanded.query_id!r}")
    query_text = expanded.assembled_text
    if getattr(scorer, "needs_texts", True):
        if candidates.passage_texts is None:
            raise ContractViolation(
                f"scorer needs passage texts but candidate set for "
                f"{candidates.query_id!r} has none")
        passage_room = None
        if truncation is not None:
            query_text, passage_room = _truncate_query(query_text, truncation)
        items = []
        for pid in candidates.passage_ids:
            passage_text = candidates.passage_texts[pid]
            if passage_room is not None:
                passage_text = _truncate_passage(passage_text, truncation,
                                                 passage_room)
            items.append((pid, passage_text))
    else:
        items = [(pid, "") for pid in candidates.passage_ids]
    scores = scorer.score_batch(expanded.query_id, query_text, items)
    if len(scores) != len(items):
        raise ContractViolation(
            f"scorer returned {len(scores)} scores for {len(items)} "
            f"candidates of query {expanded.query_id!r}")
    for (pid, _), score in zip(items, scores):
        if not 0.0 <= score <= 1.0:
            raise ContractViolation(
                f"score {score} outside [0, 1] for query "
                f"{expanded.query_id!r} passage {pid!r}")
    order = sorted(zip(candidates.passage_ids, scores),
                   key=lambda entry: (-entry[1], entry[0]))
    return Ranking(expanded.query_id, tuple(order))


def make_scorer(spec: str, qrels: Qrels | None = None):
    """Build a scorer from a spec string.

    Accepted specs: ``lexical``, ``file:<path>``, ``remote:<url>``,
    ``constant[:<value>]``, and ``oracle`` (needs qrels; fixture use).
    """
    if spec == "lexical":
        return LexicalOverlapScorer()
    if spec.startswith("file:"):
        path = spec[len("file:"):]
        if not path:
            raise ConfigError("file: scorer needs a path")
        with open(path, encoding="utf-8") as f:
            return PrecomputedScorer(load_precomputed_scores(f, path))
    if spec.startswith("remote:"):
        url = spec[len("remote:"):]
        if not url:
            raise ConfigError("remote: scorer needs a URL")
        return RemoteScorer(ScoreClient(url))
    if spec == "constant" or spec.startswith("constant:"):
        _, _, arg = spec.partition(":")
        return ConstantScorer(float(arg)) if arg else ConstantScorer()
    if spec == "oracle":
        if qrels is None:
            raise ConfigError("oracle scorer needs qrels")
        return OracleScorer(qrels)
    raise ConfigError(
        f"unknown scorer {spec!r}; expected lexical, file:<path>, "
        f"remote:<url>, constant[:<value>], or oracle")
