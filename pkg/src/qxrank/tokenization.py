"""Tokenizers used across the pipeline.

Two granularities exist:

* :func:`tokenize` — the retrieval tokenizer: lowercased maximal runs of
  Unicode letters/digits, everything else a separator.  Used for indexing,
  scoring, and lexical overlap.
* :func:`subword_tokenize` — greedy longest-match subword pieces driven by an
  external vocabulary file.  Only used to count tokens against a model's
  input budget when a vocabulary is supplied; the default budget counter is
  plain whitespace splitting.
"""

from __future__ import annotations

import re
from typing import Iterable

from .errors import ParseError

# \w minus underscore: Unicode letters and digits only.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Split ``text`` into lowercased runs of letters/digits.

    Idempotent over its own output: ``tokenize(" ".join(toks)) == toks``.
    Empty input yields an empty list.
    """
    return _TOKEN_RE.findall(text.lower())


def light_stem(word: str) -> str:
    """Light plural stemmer: strips s/es/ies endings with the usual guards.

    Conflates simple plurals (``cost``/``costs``, ``pony``/``ponies``)
    without the aggressive conflation of heavier stemmers.  Words shorter
    than four characters pass through unchanged.
    """
    if len(word) < 4 or not word.endswith("s"):
        return word
    if word.endswith("ies") and not word.endswith(("eies", "aies")):
        return word[:-3] + "y"
    if word.endswith("es") and not word.endswith(("aes", "ees", "oes")):
        return word[:-1]
    if not word.endswith(("ss", "us")):
        return word[:-1]
    return word


class SubwordVocab:
    """Vocabulary for greedy longest-match subword tokenization.

    The file format is one piece per line; continuation pieces carry the
    ``##`` prefix.  Words with no matching prefix piece map to ``unk_token``
    as a whole.
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
        try:
            with open(path, encoding="utf-8") as f:
                for raw in f:
                    piece = raw.strip()
                    if piece:
                        pieces.append(piece)
        except UnicodeDecodeError as e:
            raise ParseError(f"invalid UTF-8 in vocabulary: {e}", source=path) from e
        if not pieces:
            raise ParseError("empty vocabulary file", source=path)
        return cls(pieces)

    def __contains__(self, piece: str) -> bool:
        return piece in self.pieces

    def __len__(self) -> int:
        return len(self.pieces)


def subword_tokenize(text: str, vocab: SubwordVocab) -> list[str]:
    """Greedy longest-match subword split of whitespace-separated words.

    Each word is consumed left to right, always taking the longest vocabulary
    piece that matches at the current position (continuation positions try
    ``##``-prefixed pieces).  A word that cannot be fully segmented becomes a
    single unknown token.
    """
    out: list[str] = []
    for word in text.lower().split():
        out.extend(_split_word(word, vocab))
    return out


def _split_word(word: str, vocab: SubwordVocab) -> list[str]:
    pieces: list[str] = []
    start = 0
    while start < len(word):
        end = min(len(word), start + vocab._max_piece_len)
        match = None
        while end > start:
            candidate = word[start:end]
            if start > 0:
                candidate = vocab.continuation_prefix + candidate
            if candidate in vocab:
                match = candidate
                break
            end -= 1
        if match is None:
            return [vocab.unk_token]
        pieces.append(match)
        start = end
    return pieces


def truncate_words_by_subword_budget(words: list[str], vocab: SubwordVocab,
                                     budget: int) -> tuple[list[str], int]:
    """Longest word-prefix whose subword expansion stays within ``budget``.

    Cutting at word boundaries keeps the truncated text reconstructable by
    joining with spaces while the budget is honored in model tokens.
    Returns the kept words and their total subword count.
    """
    used = 0
    kept = 0
    for word in words:
        n = len(_split_word(word, vocab))
        if used + n > budget:
            break
        used += n
        kept += 1
    return words[:kept], used
