"""First-stage lexical retrieval: inverted index and BM25 scoring.

Scores use the non-negative idf variant ``ln(1 + (N - df + 0.5)/(df + 0.5))``
and the usual saturation/length-normalization term.  Query terms are
deduplicated by default (query term frequency ignored), which keeps heavily
repetitive expanded queries from over-weighting their original wording;
query-tf weighting is available behind a flag.

Determinism: terms are always processed in sorted order and ties in ranking
are broken by ascending passage id, so identical inputs give byte-identical
candidate lists.  A built index is immutable and safe for concurrent query
evaluation.
"""

from __future__ import annotations

import math
import struct
from bisect import bisect_left
from dataclasses import dataclass, field
from typing import IO, Callable, Iterable, Mapping, Sequence

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .corpus_io import CandidateSet
from .errors import ConfigError, ContractViolation, NotFoundError, ValidationError
from .tokenization import light_stem, tokenize

INDEX_MAGIC = b"QXRI"
INDEX_FORMAT_VERSION = 1


@dataclass(frozen=True)
class Bm25Params:
    """Saturation (k1) and length-normalization (b) parameters."""

    k1: float = 0.9
    b: float = 0.4

    def __post_init__(self) -> None:
        if not self.k1 > 0:
            raise ConfigError(f"k1 must be > 0, got {self.k1}")
        if not 0.0 <= self.b <= 1.0:
            raise ConfigError(f"b must be in [0, 1], got {self.b}")


def make_tokenizer(stem: bool = False,
                   stopwords: frozenset[str] = frozenset()) -> Callable[[str], list[str]]:
    """Compose the retrieval tokenizer with optional stopword removal/stemming.

    Stopwords are removed before stemming, so stopword files list surface
    forms.
    """
    if not stem and not stopwords:
        return tokenize

    def _tok(text: str) -> list[str]:
        tokens = tokenize(text)
        if stopwords:
            tokens = [t for t in tokens if t not in stopwords]
        if stem:
            tokens = [light_stem(t) for t in tokens]
        return tokens

    return _tok


@dataclass
class InvertedIndex:
    """Term postings plus document statistics for BM25.

    ``postings[term]`` is a list of (passage_id, term_frequency) sorted by
    passage id.  The tokenizer configuration used at build time travels with
    the index so queries tokenize consistently.
    """

    postings: dict[str, list[tuple[str, int]]]
    doc_lengths: dict[str, int]
    n_docs: int
    avgdl: float
    stem: bool = False
    stopwords: frozenset[str] = field(default_factory=frozenset)

    def df(self, term: str) -> int:
        return len(self.postings.get(term, ()))

    def term_frequency(self, term: str, passage_id: str) -> int:
        plist = self.postings.get(term)
        if not plist:
            return 0
        i = bisect_left(plist, (passage_id,))
        if i < len(plist) and plist[i][0] == passage_id:
            return plist[i][1]
        return 0

    def tokenizer(self) -> Callable[[str], list[str]]:
        return make_tokenizer(self.stem, self.stopwords)

    def save(self, out: IO[bytes]) -> None:
        """Write the versioned binary index format."""
        out.write(INDEX_MAGIC)
        out.write(struct.pack("<IB", INDEX_FORMAT_VERSION, int(self.stem)))
        _write_str_list(out, sorted(self.stopwords))
        out.write(struct.pack("<Qd", self.n_docs, self.avgdl))
        pids = sorted(self.doc_lengths)
        pid_index = {pid: i for i, pid in enumerate(pids)}
        out.write(struct.pack("<Q", len(pids)))
        for pid in pids:
            _write_str(out, pid)
            out.write(struct.pack("<I", self.doc_lengths[pid]))
        out.write(struct.pack("<Q", len(self.postings)))
        for term in sorted(self.postings):
            plist = self.postings[term]
            _write_str(out, term)
            out.write(struct.pack("<I", len(plist)))
            for pid, tf in plist:
                out.write(struct.pack("<II", pid_index[pid], tf))

    @classmethod
    def load(cls, inp: IO[bytes]) -> "InvertedIndex":
        magic = inp.read(4)
        if magic != INDEX_MAGIC:
            raise ValidationError(f"not an index file (magic {magic!r})")
        version, stem_flag = struct.unpack("<IB", _read_exact(inp, 5))
        if version != INDEX_FORMAT_VERSION:
            raise ValidationError(
                f"unsupported index format version {version} "
                f"(this build reads version {INDEX_FORMAT_VERSION})"
            )
        stopwords = frozenset(_read_str_list(inp))
        n_docs, avgdl = struct.unpack("<Qd", _read_exact(inp, 16))
        (n_pids,) = struct.unpack("<Q", _read_exact(inp, 8))
        pids: list[str] = []
        doc_lengths: dict[str, int] = {}
        for _ in range(n_pids):
            pid = _read_str(inp)
            (length,) = struct.unpack("<I", _read_exact(inp, 4))
            pids.append(pid)
            doc_lengths[pid] = length
        (n_terms,) = struct.unpack("<Q", _read_exact(inp, 8))
        postings: dict[str, list[tuple[str, int]]] = {}
        for _ in range(n_terms):
            term = _read_str(inp)
            (df,) = struct.unpack("<I", _read_exact(inp, 4))
            plist = []
            for _ in range(df):
                doc_i, tf = struct.unpack("<II", _read_exact(inp, 8))
                plist.append((pids[doc_i], tf))
            postings[term] = plist
        return cls(postings, doc_lengths, n_docs, avgdl,
                   stem=bool(stem_flag), stopwords=stopwords)

    def save_file(self, path: str) -> None:
        with open(path, "wb") as f:
            self.save(f)

    @classmethod
    def load_file(cls, path: str) -> "InvertedIndex":
        with open(path, "rb") as f:
            return cls.load(f)


def _write_str(out: IO[bytes], s: str) -> None:
    data = s.encode("utf-8")
    out.write(struct.pack("<I", len(data)))
    out.write(data)


def _read_str(inp: IO[bytes]) -> str:
    (n,) = struct.unpack("<I", _read_exact(inp, 4))
    return _read_exact(inp, n).decode("utf-8")


def _write_str_list(out: IO[bytes], items: Sequence[str]) -> None:
    out.write(struct.pack("<I", len(items)))
    for s in items:
        _write_str(out, s)


def _read_str_list(inp: IO[bytes]) -> list[str]:
    (n,) = struct.unpack("<I", _read_exact(inp, 4))
    return [_read_str(inp) for _ in range(n)]


def _read_exact(inp: IO[bytes], n: int) -> bytes:
    data = inp.read(n)
    if len(data) != n:
        raise ValidationError("truncated index file")
    return data


def build_index(passages: Mapping[str, str], stem: bool = False,
                stopwords: Iterable[str] = ()) -> InvertedIndex:
    """Build an inverted index over a nonempty passage store."""
    if not passages:
        raise ContractViolation("cannot index an empty passage store")
    stopset = frozenset(stopwords)
    tok = make_tokenizer(stem, stopset)
    postings: dict[str, list[tuple[str, int]]] = {}
    doc_lengths: dict[str, int] = {}
    for pid in sorted(passages):
        tokens = tok(passages[pid])
        doc_lengths[pid] = len(tokens)
        counts: dict[str, int] = {}
        for t in tokens:
            counts[t] = counts.get(t, 0) + 1
        for term, tf in counts.items():
            postings.setdefault(term, []).append((pid, tf))
    n = len(doc_lengths)
    avgdl = sum(doc_lengths.values()) / n
    return InvertedIndex(postings, doc_lengths, n, avgdl,
                         stem=stem, stopwords=stopset)


def idf(index: InvertedIndex, term: str) -> float:
    """Non-negative inverse document frequency; defined for df = 0 too."""
    df = index.df(term)
    return math.log(1.0 + (index.n_docs - df + 0.5) / (df + 0.5))


def _contribution(idf_value: float, tf: int, dl: int, avgdl: float,
                  k1: float, b: float) -> float:
    return idf_value * (tf * (k1 + 1.0)) / (tf + k1 * (1.0 - b + b * dl / avgdl))


def _query_terms(query_tokens: Sequence[str],
                 query_term_weighting: bool) -> list[tuple[str, int]]:
    counts: dict[str, int] = {}
    for t in query_tokens:
        counts[t] = counts.get(t, 0) + 1
    if not query_term_weighting:
        return [(t, 1) for t in sorted(counts)]
    return sorted(counts.items())


def bm25_score(index: InvertedIndex, query_tokens: Sequence[str], passage_id: str,
               params: Bm25Params = Bm25Params(),
               query_term_weighting: bool = False) -> float:
    """Score one passage against a tokenized query.

    Sums per-term contributions over sorted unique query terms, so the result
    is bit-identical to the accumulation done by :func:`retrieve_topk`.
    """
    if passage_id not in index.doc_lengths:
        raise NotFoundError(f"passage {passage_id!r} not in index")
    dl = index.doc_lengths[passage_id]
    score = 0.0
    for term, qweight in _query_terms(query_tokens, query_term_weighting):
        tf = index.term_frequency(term, passage_id)
        if tf == 0:
            continue
        score += qweight * _contribution(idf(index, term), tf, dl, avgdl=index.avgdl,
                                         k1=params.k1, b=params.b)
    return score


def retrieve_topk(index: InvertedIndex, query_text: str, k: int,
                  params: Bm25Params = Bm25Params(),
                  query_term_weighting: bool = False) -> list[tuple[str, float]]:
    """Top-k matching passages as (passage_id, score), best first.

    Only passages containing at least one query term are returned; ties are
    broken by ascending passage id.
    """
    if k < 1:
        raise ConfigError(f"k must be >= 1, got {k}")
    query_tokens = index.tokenizer()(query_text)
    scores: dict[str, float] = {}
    for term, qweight in _query_terms(query_tokens, query_term_weighting):
        plist = index.postings.get(term)
        if not plist:
            continue
        idf_value = idf(index, term)
        for pid, tf in plist:
            c = qweight * _contribution(idf_value, tf, index.doc_lengths[pid],
                                        avgdl=index.avgdl, k1=params.k1, b=params.b)
            scores[pid] = scores.get(pid, 0.0) + c
    ranked = sorted(scores.items(), key=lambda item: (-item[1], item[0]))
    return ranked[:k]


def to_candidate_set(query_id: str, scored: Sequence[tuple[str, float]],
                     query_text: str | None = None,
                     passages: Mapping[str, str] | None = None) -> CandidateSet:
    """Package retrieval output as a CandidateSet (scores dropped)."""
    pids = [pid for pid, _ in scored]
    texts = {pid: passages[pid] for pid in pids} if passages is not None else None
    return CandidateSet(query_id, pids, query_text=query_text, passage_texts=texts)


class Bm25Retriever(BaseEstimator):
    """Estimator face of the index: fit on a passage store, then search.

    Parameters mirror :class:`Bm25Params` plus the tokenizer options.
    ``stopwords`` may be a path to a word-per-line file or an iterable of
    words; it is resolved at fit time.
    """

    def __init__(self, k1: float = 0.9, b: float = 0.4, stem: bool = False,
                 stopwords: str | Iterable[str] | None = None,
                 query_term_weighting: bool = False):
        self.k1 = k1
        self.b = b
        self.stem = stem
        self.stopwords = stopwords
        self.query_term_weighting = query_term_weighting

    def _params(self) -> Bm25Params:
        return Bm25Params(k1=self.k1, b=self.b)

    def _stopword_set(self) -> frozenset[str]:
        if self.stopwords is None:
            return frozenset()
        if isinstance(self.stopwords, str):
            with open(self.stopwords, encoding="utf-8") as f:
                return frozenset(w.strip().lower() for w in f if w.strip())
        return frozenset(w.lower() for w in self.stopwords)

    def fit(self, passages: Mapping[str, str], y=None) -> "Bm25Retriever":
        self._params()  # validate k1/b before doing any work
        self.index_ = build_index(passages, stem=self.stem,
                                  stopwords=self._stopword_set())
        return self

    def search(self, query_text: str, k: int = 1000) -> list[tuple[str, float]]:
        check_is_fitted(self, "index_")
        return retrieve_topk(self.index_, query_text, k, self._params(),
                             self.query_term_weighting)

    def score_one(self, query_text: str, passage_id: str) -> float:
        check_is_fitted(self, "index_")
        tokens = self.index_.tokenizer()(query_text)
        return bm25_score(self.index_, tokens, passage_id, self._params(),
                          self.query_term_weighting)

    def save_index(self, path: str) -> None:
        check_is_fitted(self, "index_")
        self.index_.save_file(path)

    def load_index(self, path: str) -> "Bm25Retriever":
        """Attach a previously saved index (its tokenizer config wins)."""
        self.index_ = InvertedIndex.load_file(path)
        return self
