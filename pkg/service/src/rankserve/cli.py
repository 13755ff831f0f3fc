"""Command line entry points: serve, train-paraphraser, train-scorer."""

from __future__ import annotations

import argparse
import logging
import sys

from . import __version__
from .errors import RankserveError
from .training import TrainingConfig, train_paraphraser, train_scorer

logger = logging.getLogger(__name__)


def _training_config(args: argparse.Namespace) -> TrainingConfig:
    return TrainingConfig(seed=args.seed, embed_dim=args.embed_dim,
                          hidden=args.hidden, steps=args.steps,
                          learning_rate=args.learning_rate,
                          max_vocab=args.max_vocab)


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .app import create_app
    from .backends import ModelBackend, StubBackend

    if args.mode == "stub":
        backend = StubBackend()
    else:
        backend = ModelBackend(args.paraphraser, args.scorer)
    app = create_app(backend, workers=args.workers)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_train_paraphraser(args: argparse.Namespace) -> int:
    result = train_paraphraser(args.source, args.target, args.out,
                               _training_config(args))
    print(f"trained paraphraser: {len(result.losses)} steps, "
          f"loss {result.losses[0]:.6f} -> {result.losses[-1]:.6f}")
    print(f"checkpoint: {result.checkpoint_path}")
    return 0


def cmd_train_scorer(args: argparse.Namespace) -> int:
    result = train_scorer(args.pairs, args.queries, args.collection,
                          args.out, _training_config(args),
                          vocab_path=args.vocab)
    print(f"trained scorer: {len(result.losses)} steps, "
          f"loss {result.losses[0]:.6f} -> {result.losses[-1]:.6f}, "
          f"training accuracy {result.extra['accuracy']:.3f}")
    print(f"checkpoint: {result.checkpoint_path}")
    return 0


def _add_training_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", required=True, help="checkpoint file to write")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--embed-dim", type=int, default=32, dest="embed_dim")
    p.add_argument("--hidden", type=int, default=64)
    p.add_argument("--steps", type=int, default=60)
    p.add_argument("--learning-rate", type=float, default=0.5,
                   dest="learning_rate")
    p.add_argument("--max-vocab", type=int, default=5000, dest="max_vocab")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rankserve",
        description="Toy paraphrase and relevance-scoring model service.")
    parser.add_argument("--version", action="version",
                        version=f"rankserve {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--mode", choices=("stub", "model"), default="stub")
    p.add_argument("--paraphraser", help="paraphraser checkpoint")
    p.add_argument("--scorer", help="scorer checkpoint")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--workers", type=int, default=8,
                   help="concurrent request bound")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("train-paraphraser",
                       help="train the seq2seq paraphraser")
    p.add_argument("--source", required=True, help="source sentences file")
    p.add_argument("--target", required=True, help="aligned targets file")
    _add_training_flags(p)
    p.set_defaults(func=cmd_train_paraphraser)

    p = sub.add_parser("train-scorer", help="train the pair scorer")
    p.add_argument("--pairs", required=True,
                   help="query_id/passage_id/label TSV")
    p.add_argument("--queries", required=True, help="query texts TSV")
    p.add_argument("--collection", required=True, help="passage texts TSV")
    p.add_argument("--vocab", help="subword vocabulary for exact budgets")
    _add_training_flags(p)
    p.set_defaults(func=cmd_train_scorer)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except RankserveError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
