"""Token counting and the input budget contract.

The scorer sees at most ``max_query_tokens`` query tokens, and query plus
passage plus ``special_token_overhead`` reserved positions never exceed
``total_budget``. Tokens are whitespace words by default; with a subword
vocabulary, budgets count greedy longest-match pieces while cuts stay on
word boundaries.

The budget arithmetic here must agree decision-for-decision with the
retrieval pipeline's, since both sides of the wire truncate the same way.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .errors import ConfigError, DataError


class SubwordVocab:
    """Greedy longest-match subword vocabulary.

    File format: one piece per line, continuation pieces prefixed ``##``.
    A word with no full segmentation becomes a single unknown token.
    """

    def __init__(self, pieces: Iterable[str], unk_token: str = "[UNK]",
                 continuation_prefix: str = "##"):
        self.pieces = set(pieces)
        self.unk_token = unk_token
        self.continuation_prefix = continuation_prefix
        self._max_piece_len = max((len(p) for p in self.pieces), default=0)

    @classmethod
    def from_file(cls, path: str) -> "SubwordVocab":
        pieces = []
        with open(path, encoding="utf-8") as f:
            for raw in f:
                piece = raw.strip()
                if piece:
                    pieces.append(piece)
        if not pieces:
            raise DataError(f"empty vocabulary file: {path}")
        return cls(pieces)

    def split_word(self, word: str) -> list[str]:
        pieces: list[str] = []
        start = 0
        while start < len(word):
            end = min(len(word), start + self._max_piece_len)
            match = None
            while end > start:
                candidate = word[start:end]
                if start > 0:
                    candidate = self.continuation_prefix + candidate
                if candidate in self.pieces:
                    match = candidate
                    break
                end -= 1
            if match is None:
                return [self.unk_token]
            pieces.append(match)
            start = end
        return pieces


def subword_pieces(text: str, vocab: SubwordVocab) -> list[str]:
    """Subword pieces of whitespace-separated words, lowercased."""
    out: list[str] = []
    for word in text.lower().split():
        out.extend(vocab.split_word(word))
    return out


def truncate_words(words: list[str], vocab: SubwordVocab | None,
                   budget: int) -> tuple[list[str], int]:
    """Longest word prefix whose token cost fits ``budget``, plus that cost.

    Without a vocabulary each word costs one token; with one, a word costs
    its piece count and cuts never split a word.
    """
    if vocab is None:
        kept = words[:max(budget, 0)]
        return kept, len(kept)
    used = 0
    kept = 0
    for word in words:
        n = len(vocab.split_word(word))
        if used + n > budget:
            break
        used += n
        kept += 1
    return words[:kept], used


@dataclass(frozen=True)
class TruncationBudget:
    """Token budget contract applied before scoring."""

    max_query_tokens: int = 64
    total_budget: int = 512
    special_token_overhead: int = 3

    def __post_init__(self) -> None:
        if self.max_query_tokens < 1:
            raise ConfigError(
                f"max_query_tokens must be >= 1, got {self.max_query_tokens}")
        if self.special_token_overhead < 0:
            raise ConfigError(f"special_token_overhead must be >= 0, got "
                              f"{self.special_token_overhead}")
        if self.total_budget <= self.special_token_overhead + 1:
            raise ConfigError(
                f"total_budget {self.total_budget} leaves no room after "
                f"{self.special_token_overhead} special tokens")


def truncate_pair(query: str, passage: str,
                  vocab: SubwordVocab | None = None,
                  budget: TruncationBudget = TruncationBudget()
                  ) -> tuple[str, str]:
    """Apply the budget contract to one (query, passage) text pair."""
    usable = budget.total_budget - budget.special_token_overhead
    query_words = query.split()
    passage_words = passage.split()
    kept_query, query_cost = truncate_words(
        query_words, vocab, min(budget.max_query_tokens, usable))
    kept_passage, _ = truncate_words(passage_words, vocab,
                                     usable - query_cost)
    return " ".join(kept_query), " ".join(kept_passage)
