"""Toy-scale neural models: a seq2seq paraphraser and a pair scorer.

Both are deliberately small (word-level vocabulary, GRU encoder, mean-pool
scorer) so that training completes in seconds on a CPU. The deliverable is
the serving contract, not model quality.
"""

from __future__ import annotations

from collections import Counter
from typing import Iterable, Sequence

import torch
from torch import nn

from .errors import DataError
from .tokenizer import (SubwordVocab, TruncationBudget, subword_pieces,
                        truncate_pair)

PAD, BOS, EOS, UNK = 0, 1, 2, 3
SPECIALS = ("[pad]", "[bos]", "[eos]", "[unk]")

CHECKPOINT_VERSION = 1


def build_vocab(texts: Iterable[str], max_size: int) -> dict[str, int]:
    """Word -> id map: specials first, then by frequency desc, ties alpha."""
    counts = Counter(w for text in texts for w in text.lower().split())
    vocab = {piece: i for i, piece in enumerate(SPECIALS)}
    ranked = sorted(counts.items(), key=lambda e: (-e[1], e[0]))
    for word, _ in ranked[:max(max_size - len(SPECIALS), 0)]:
        vocab[word] = len(vocab)
    return vocab


def encode(text: str, vocab: dict[str, int]) -> list[int]:
    return [vocab.get(w, UNK) for w in text.lower().split()]


class ToyParaphraser(nn.Module):
    """GRU encoder-decoder over a word vocabulary."""

    def __init__(self, vocab: dict[str, int], embed_dim: int, hidden: int):
        super().__init__()
        self.vocab = dict(vocab)
        self.inverse = {i: w for w, i in self.vocab.items()}
        self.embed_dim = embed_dim
        self.hidden = hidden
        self.embedding = nn.Embedding(len(self.vocab), embed_dim,
                                      padding_idx=PAD)
        self.encoder = nn.GRU(embed_dim, hidden, batch_first=True)
        self.decoder_cell = nn.GRUCell(embed_dim, hidden)
        self.out = nn.Linear(hidden, len(self.vocab))

    def _encode_batch(self, src: torch.Tensor,
                      lengths: torch.Tensor) -> torch.Tensor:
        packed = nn.utils.rnn.pack_padded_sequence(
            self.embedding(src), lengths, batch_first=True,
            enforce_sorted=False)
        _, state = self.encoder(packed)
        return state.squeeze(0)

    def training_loss(self, src: torch.Tensor, src_lengths: torch.Tensor,
                      tgt: torch.Tensor) -> torch.Tensor:
        """Mean teacher-forced cross entropy; ``tgt`` includes BOS and EOS.

        Convention shared with :meth:`beam_search`: the decoder state first
        consumes a token, then predicts the one after it.
        """
        state = self._encode_batch(src, src_lengths)
        total = torch.zeros((), dtype=torch.float32)
        count = 0
        for step in range(tgt.shape[1] - 1):
            state = self.decoder_cell(self.embedding(tgt[:, step]), state)
            target = tgt[:, step + 1]
            mask = target != PAD
            if mask.any():
                total = total + nn.functional.cross_entropy(
                    self.out(state)[mask], target[mask], reduction="sum")
                count += int(mask.sum())
        return total / max(count, 1)

    @torch.no_grad()
    def beam_search(self, text: str, num_beams: int,
                    max_len: int = 24) -> list[tuple[str, float]]:
        """Up to ``num_beams`` decoded sequences, best log-likelihood first."""
        self.eval()
        ids = encode(text, self.vocab) or [UNK]
        src = torch.tensor([ids], dtype=torch.long)
        lengths = torch.tensor([len(ids)], dtype=torch.long)
        state = self._encode_batch(src, lengths)
        # beam: (log_likelihood, tokens after BOS, finished, state); the
        # stored state has consumed BOS plus all tokens but the last one
        beams = [(0.0, (), False, state.squeeze(0))]
        for _ in range(max_len):
            if all(done for _, _, done, _ in beams):
                break
            grown: list[tuple[float, tuple[int, ...], bool, torch.Tensor]] = []
            for ll, tokens, done, h in beams:
                if done:
                    grown.append((ll, tokens, done, h))
                    continue
                previous = tokens[-1] if tokens else BOS
                consumed = self.decoder_cell(
                    self.embedding(torch.tensor([previous])), h.unsqueeze(0)
                ).squeeze(0)
                logprobs = torch.log_softmax(self.out(consumed), dim=-1)
                top = torch.topk(logprobs,
                                 min(num_beams + 1, len(self.vocab)))
                for value, index in zip(top.values.tolist(),
                                        top.indices.tolist()):
                    if index == PAD:
                        continue
                    grown.append((ll + value, tokens + (index,),
                                  index == EOS, consumed))
            grown.sort(key=lambda b: (-b[0], b[1]))
            beams = grown[:num_beams]
        results = []
        for ll, tokens, _, _ in beams:
            words = [self.inverse[t] for t in tokens if t not in (PAD, EOS)]
            results.append((" ".join(words), min(ll, 0.0)))
        results.sort(key=lambda r: (-r[1], r[0]))
        return results[:num_beams]


class ToyScorer(nn.Module):
    """Mean-pooled embedding classifier over (query, passage) pairs."""

    def __init__(self, vocab: dict[str, int], embed_dim: int, hidden: int,
                 subword: SubwordVocab | None = None,
                 budget: TruncationBudget | None = None):
        super().__init__()
        self.vocab = dict(vocab)
        self.embed_dim = embed_dim
        self.hidden_dim = hidden
        self.subword = subword
        self.budget = budget or TruncationBudget()
        self.embedding = nn.Embedding(len(self.vocab), embed_dim,
                                      padding_idx=PAD)
        self.mix = nn.Linear(2 * embed_dim, hidden)
        self.out = nn.Linear(hidden, 1)

    def _pool(self, batch: Sequence[Sequence[int]]) -> torch.Tensor:
        pooled = torch.zeros((len(batch), self.embed_dim))
        for row, ids in enumerate(batch):
            if ids:
                pooled[row] = self.embedding(
                    torch.tensor(ids, dtype=torch.long)).mean(dim=0)
        return pooled

    def logits(self, queries: Sequence[Sequence[int]],
               passages: Sequence[Sequence[int]]) -> torch.Tensor:
        features = torch.cat([self._pool(queries), self._pool(passages)],
                             dim=1)
        return self.out(torch.relu(self.mix(features))).squeeze(1)

    def _ids(self, text: str) -> list[int]:
        if self.subword is not None:
            return [self.vocab.get(p, UNK)
                    for p in subword_pieces(text, self.subword)]
        return encode(text, self.vocab)

    @torch.no_grad()
    def score_texts(self, pairs: Sequence[tuple[str, str]]) -> list[float]:
        """Probabilities for text pairs; truncates to the budget first."""
        self.eval()
        queries = []
        passages = []
        for query, passage in pairs:
            kept_query, kept_passage = truncate_pair(
                query, passage, self.subword, self.budget)
            queries.append(self._ids(kept_query))
            passages.append(self._ids(kept_passage))
        if not pairs:
            return []
        return torch.sigmoid(self.logits(queries, passages)).tolist()


def save_paraphraser(model: ToyParaphraser, path: str) -> None:
    torch.save({"version": CHECKPOINT_VERSION, "kind": "paraphraser",
                "vocab": model.vocab, "embed_dim": model.embed_dim,
                "hidden": model.hidden,
                "state": model.state_dict()}, path)


def save_scorer(model: ToyScorer, path: str) -> None:
    torch.save({"version": CHECKPOINT_VERSION, "kind": "scorer",
                "vocab": model.vocab, "embed_dim": model.embed_dim,
                "hidden": model.hidden_dim,
                "subword_pieces": (sorted(model.subword.pieces)
                                   if model.subword is not None else None),
                "budget": {
                    "max_query_tokens": model.budget.max_query_tokens,
                    "total_budget": model.budget.total_budget,
                    "special_token_overhead":
                        model.budget.special_token_overhead},
                "state": model.state_dict()}, path)


def _load_checkpoint(path: str, kind: str) -> dict:
    try:
        payload = torch.load(path, map_location="cpu", weights_only=True)
    except Exception as e:
        raise DataError(f"cannot read checkpoint {path}: {e}") from e
    if not isinstance(payload, dict) or payload.get("kind") != kind:
        raise DataError(f"{path} is not a {kind} checkpoint")
    if payload.get("version") != CHECKPOINT_VERSION:
        raise DataError(f"unsupported checkpoint version "
                        f"{payload.get('version')} in {path}")
    return payload


def load_paraphraser(path: str) -> ToyParaphraser:
    payload = _load_checkpoint(path, "paraphraser")
    model = ToyParaphraser(payload["vocab"], payload["embed_dim"],
                           payload["hidden"])
    model.load_state_dict(payload["state"])
    model.eval()
    return model


def load_scorer(path: str) -> ToyScorer:
    payload = _load_checkpoint(path, "scorer")
    subword = (SubwordVocab(payload["subword_pieces"])
               if payload["subword_pieces"] is not None else None)
    budget = TruncationBudget(**payload["budget"])
    model = ToyScorer(payload["vocab"], payload["embed_dim"],
                      payload["hidden"], subword, budget)
    model.load_state_dict(payload["state"])
    model.eval()
    return model
