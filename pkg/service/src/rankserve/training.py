"""Training loops for the toy models.

Both trainers run full-batch gradient descent on purpose: the corpora are
tiny, every step is deterministic for a fixed seed, and the recorded loss
curve is smooth enough to assert on in tests.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import torch

from .errors import ConfigError, DataError
from .models import (BOS, EOS, PAD, UNK, ToyParaphraser, ToyScorer,
                     build_vocab, encode, save_paraphraser, save_scorer)
from .tokenizer import SubwordVocab, TruncationBudget, subword_pieces

logger = logging.getLogger(__name__)

MAX_EMBED_DIM = 128
MAX_HIDDEN = 256
MAX_STEPS = 2000
MAX_VOCAB = 20000
MAX_CORPUS_LINES = 20000


@dataclass(frozen=True)
class TrainingConfig:
    """Toy-scale hyperparameters; hard maxima keep runs desk-sized."""

    seed: int = 0
    embed_dim: int = 32
    hidden: int = 64
    steps: int = 60
    learning_rate: float = 0.5
    max_vocab: int = 5000

    def __post_init__(self) -> None:
        checks = (
            (1 <= self.embed_dim <= MAX_EMBED_DIM,
             f"embed_dim must be in [1, {MAX_EMBED_DIM}]"),
            (1 <= self.hidden <= MAX_HIDDEN,
             f"hidden must be in [1, {MAX_HIDDEN}]"),
            (1 <= self.steps <= MAX_STEPS,
             f"steps must be in [1, {MAX_STEPS}]"),
            (self.learning_rate > 0, "learning_rate must be > 0"),
            (8 <= self.max_vocab <= MAX_VOCAB,
             f"max_vocab must be in [8, {MAX_VOCAB}]"),
        )
        for ok, message in checks:
            if not ok:
                raise ConfigError(f"{message} (got {self})")


@dataclass(frozen=True)
class TrainingResult:
    """Per-step losses plus where the checkpoint went."""

    losses: tuple[float, ...]
    checkpoint_path: str
    extra: dict = field(default_factory=dict)


def _read_lines(path: str) -> list[str]:
    with open(path, encoding="utf-8") as f:
        lines = [line.rstrip("\n") for line in f]
    if len(lines) > MAX_CORPUS_LINES:
        raise DataError(f"{path} has {len(lines)} lines, over the "
                        f"{MAX_CORPUS_LINES} toy-scale limit")
    return lines


def load_aligned_corpus(source_path: str,
                        target_path: str) -> list[tuple[str, str]]:
    """Line-aligned (source, target) pairs; blank-blank lines are dropped."""
    sources = _read_lines(source_path)
    targets = _read_lines(target_path)
    if len(sources) != len(targets):
        raise DataError(f"aligned corpus mismatch: {source_path} has "
                        f"{len(sources)} lines, {target_path} has "
                        f"{len(targets)}")
    pairs = [(s.strip(), t.strip()) for s, t in zip(sources, targets)
             if s.strip() or t.strip()]
    if not pairs:
        raise DataError(f"empty corpus: {source_path} / {target_path}")
    for i, (s, t) in enumerate(pairs, start=1):
        if not s or not t:
            raise DataError(f"half-empty pair at line {i}: {(s, t)!r}")
    return pairs


def _pad_batch(rows: list[list[int]]) -> torch.Tensor:
    width = max(len(r) for r in rows)
    return torch.tensor([r + [PAD] * (width - len(r)) for r in rows],
                        dtype=torch.long)


def _deterministic(seed: int) -> None:
    torch.manual_seed(seed)
    torch.set_num_threads(1)


def train_paraphraser(source_path: str, target_path: str, out_path: str,
                      config: TrainingConfig = TrainingConfig()
                      ) -> TrainingResult:
    """Full-batch teacher-forced training; saves a loadable checkpoint."""
    pairs = load_aligned_corpus(source_path, target_path)
    _deterministic(config.seed)
    vocab = build_vocab((text for pair in pairs for text in pair),
                        config.max_vocab)
    model = ToyParaphraser(vocab, config.embed_dim, config.hidden)
    src_rows = [encode(s, vocab) or [PAD] for s, _ in pairs]
    tgt_rows = [[BOS] + encode(t, vocab) + [EOS] for _, t in pairs]
    src = _pad_batch(src_rows)
    lengths = torch.tensor([max(len(r), 1) for r in src_rows])
    tgt = _pad_batch(tgt_rows)
    optimizer = torch.optim.SGD(model.parameters(), lr=config.learning_rate)
    losses = []
    for step in range(config.steps):
        optimizer.zero_grad()
        loss = model.training_loss(src, lengths, tgt)
        loss.backward()
        optimizer.step()
        losses.append(float(loss.detach()))
        logger.info("paraphraser step %d loss %.6f", step, losses[-1])
    save_paraphraser(model, out_path)
    return TrainingResult(tuple(losses), out_path)


def _load_id_text_tsv(path: str, what: str) -> dict[str, str]:
    store = {}
    for line_no, line in enumerate(_read_lines(path), start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise DataError(f"{path}:{line_no}: expected id<TAB>{what}")
        store[parts[0]] = parts[1]
    if not store:
        raise DataError(f"no {what} rows in {path}")
    return store


def load_labeled_corpus(pairs_path: str, queries_path: str,
                        collection_path: str
                        ) -> list[tuple[str, str, int]]:
    """Join a labeled-pair TSV with its text stores.

    Pair rows are ``query_id<TAB>passage_id<TAB>label`` with labels in
    {0, 1}; single-class data is refused since nothing can be learned
    from it.
    """
    queries = _load_id_text_tsv(queries_path, "query text")
    passages = _load_id_text_tsv(collection_path, "passage text")
    rows = []
    for line_no, line in enumerate(_read_lines(pairs_path), start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise DataError(f"{pairs_path}:{line_no}: expected "
                            f"query_id<TAB>passage_id<TAB>label")
        qid, pid, label_text = parts
        if label_text not in ("0", "1"):
            raise DataError(f"{pairs_path}:{line_no}: label must be 0 or 1, "
                            f"got {label_text!r}")
        if qid not in queries:
            raise DataError(f"{pairs_path}:{line_no}: unknown query {qid!r}")
        if pid not in passages:
            raise DataError(f"{pairs_path}:{line_no}: unknown passage "
                            f"{pid!r}")
        rows.append((queries[qid], passages[pid], int(label_text)))
    if not rows:
        raise DataError(f"no labeled pairs in {pairs_path}")
    labels = {label for _, _, label in rows}
    if len(labels) < 2:
        logger.warning("refusing to train scorer: all %d pairs share "
                       "label %d", len(rows), labels.pop())
        raise DataError("single-class training data")
    return rows


def train_scorer(pairs_path: str, queries_path: str, collection_path: str,
                 out_path: str, config: TrainingConfig = TrainingConfig(),
                 vocab_path: str | None = None,
                 budget: TruncationBudget | None = None) -> TrainingResult:
    """Binary cross-entropy training of the pair scorer.

    The recorded first loss is the untrained model's, measured before any
    update. The result's ``extra["accuracy"]`` is training-set accuracy at
    a 0.5 threshold after the last step.
    """
    rows = load_labeled_corpus(pairs_path, queries_path, collection_path)
    subword = (SubwordVocab.from_file(vocab_path)
               if vocab_path is not None else None)

    def pieces(text: str) -> list[str]:
        if subword is not None:
            return subword_pieces(text, subword)
        return text.lower().split()

    _deterministic(config.seed)
    vocab = build_vocab((" ".join(pieces(text))
                         for q, p, _ in rows for text in (q, p)),
                        config.max_vocab)
    model = ToyScorer(vocab, config.embed_dim, config.hidden, subword,
                      budget or TruncationBudget())
    query_ids = [[vocab.get(piece, UNK) for piece in pieces(q)]
                 for q, _, _ in rows]
    passage_ids = [[vocab.get(piece, UNK) for piece in pieces(p)]
                   for _, p, _ in rows]
    targets = torch.tensor([float(label) for _, _, label in rows])
    optimizer = torch.optim.SGD(model.parameters(), lr=config.learning_rate)
    losses = []
    for step in range(config.steps):
        optimizer.zero_grad()
        loss = torch.nn.functional.binary_cross_entropy_with_logits(
            model.logits(query_ids, passage_ids), targets)
        loss.backward()
        optimizer.step()
        losses.append(float(loss.detach()))
        logger.info("scorer step %d loss %.6f", step, losses[-1])
    with torch.no_grad():
        predicted = torch.sigmoid(model.logits(query_ids, passage_ids)) >= 0.5
        accuracy = float((predicted == (targets >= 0.5)).float().mean())
    save_scorer(model, out_path)
    return TrainingResult(tuple(losses), out_path, {"accuracy": accuracy})
