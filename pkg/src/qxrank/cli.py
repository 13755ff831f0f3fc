"""Command-line entry point wiring the pipeline stages together.

Subcommands: mine-pairs, build-index, retrieve, expand, rerank, evaluate,
compare, and pipeline (expand -> rerank -> evaluate over one output
directory). Option values resolve as CLI flag > config file > built-in
default; the config file is flat ``key = value`` text with ``#`` comments,
keys named after the long flags.

Data goes to files, human-readable summaries to stdout, logs to stderr.
Exit codes: 0 success, 1 pipeline error, 2 usage error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

from . import __version__
from .bm25 import (Bm25Params, Bm25Retriever, INDEX_FORMAT_VERSION,
                   InvertedIndex, retrieve_topk, to_candidate_set)
from .clients import ParaphraseClient
from .corpus_io import (QueryRecord, load_collection, load_qrels, load_queries,
                        load_run_file, load_top1000, query_store,
                        write_run_file, write_top1000)
from .errors import ConfigError, NotFoundError, ParseError, QxrankError
from .evaluation import (METRIC_NAMES, MetricConfig, classify_buckets,
                         evaluate_rankings, load_committee_stats,
                         rankings_from_run, read_per_topic,
                         render_bucket_report, summarize_fractions,
                         write_per_topic)
from .expansion import (ExpandedQuery, QueryExpander, fetch_expansions,
                        load_precomputed_expansions)
from .pair_mining import (ORDERINGS, export_seq2seq, group_by_passage,
                          mine_pairs, mining_report, write_mining_report,
                          write_pairs)
from .rerank import (TruncationConfig, make_scorer, rerank,
                     sample_training_pairs, write_labeled_pairs)
from .tokenization import SubwordVocab

log = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

_TRUE_WORDS = frozenset(("1", "true", "yes", "on"))
_FALSE_WORDS = frozenset(("0", "false", "no", "off"))


def parse_config_file(path: str) -> dict[str, str]:
    """Read a flat ``key = value`` config file; keys match long flag names."""
    values: dict[str, str] = {}
    try:
        with open(path, encoding="utf-8") as f:
            for line_no, raw in enumerate(f, start=1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                key, sep, value = line.partition("=")
                if not sep:
                    raise ParseError("expected `key = value`", path, line_no)
                values[key.strip().replace("-", "_")] = value.strip()
    except OSError as e:
        raise NotFoundError(f"cannot read config file {path}: {e}")
    return values


class Options:
    """Resolved options: CLI flag beats config file beats default."""

    def __init__(self, args: argparse.Namespace, config: dict[str, str]):
        self._args = vars(args)
        self._config = config

    def get(self, name: str, default=None, cast: Callable = str):
        value = self._args.get(name)
        if value is not None:
            return value
        if name in self._config:
            return self._cast(name, self._config[name], cast)
        return default

    def require(self, name: str, cast: Callable = str):
        value = self.get(name, None, cast)
        if value is None:
            raise ConfigError(f"missing required option --{name.replace('_', '-')}")
        return value

    def input_file(self, name: str, required: bool = True) -> str | None:
        path = self.require(name) if required else self.get(name)
        if path is not None and not os.path.isfile(path):
            raise NotFoundError(f"--{name.replace('_', '-')}: "
                                f"no such file: {path}")
        return path

    def threads(self) -> int:
        n = self.get("threads", os.cpu_count() or 1, int)
        if n < 1:
            raise ConfigError(f"--threads must be >= 1, got {n}")
        return n

    @staticmethod
    def _cast(name: str, raw: str, cast: Callable):
        if cast is bool:
            lowered = raw.lower()
            if lowered in _TRUE_WORDS:
                return True
            if lowered in _FALSE_WORDS:
                return False
            raise ConfigError(f"config value {raw!r} for {name} is not a boolean")
        try:
            return cast(raw)
        except ValueError:
            raise ConfigError(f"config value {raw!r} for {name} "
                              f"is not a valid {cast.__name__}")


def _parallel_map(fn: Callable[[T], R], items: Sequence[T],
                  threads: int) -> list[R]:
    """Order-preserving map, threaded when threads > 1."""
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _write_text(path: str, writer: Callable) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer(f)


# ---------------------------------------------------------------- mine-pairs

def do_mine_pairs(qrels_path: str, out_dir: str, min_grade: int,
                  ordering: str, queries_path: str | None) -> None:
    qrels = load_qrels(qrels_path)
    groups = group_by_passage(qrels, min_grade)
    report = mining_report(groups)
    pairs = mine_pairs(groups, ordering)
    os.makedirs(out_dir, exist_ok=True)
    _write_text(os.path.join(out_dir, "report.tsv"),
                lambda f: write_mining_report(report, f))
    _write_text(os.path.join(out_dir, "pairs.tsv"),
                lambda f: write_pairs(pairs, f))
    if queries_path is not None:
        queries = query_store(load_queries(queries_path))
        with open(os.path.join(out_dir, "source.txt"), "w",
                  encoding="utf-8", newline="") as src, \
             open(os.path.join(out_dir, "target.txt"), "w",
                  encoding="utf-8", newline="") as tgt:
            written = export_seq2seq(pairs, queries, src, tgt)
        print(f"seq2seq corpus: {written} aligned lines")
    print(f"judgments used: {report.total_judgments}")
    print(f"passages with >=1 qualifying judgment: {len(groups)}")
    print(f"unique unordered pairs: {report.unique_unordered_pairs}")
    print(f"pair occurrences: {report.pair_occurrences}")
    print(f"multi-query passage fraction: {report.multi_query_fraction:.6f}")
    print(f"pairs written ({ordering}): {len(pairs)}")


def cmd_mine_pairs(opts: Options) -> int:
    do_mine_pairs(opts.input_file("qrels"), opts.require("out"),
                  opts.get("min_grade", 1, int),
                  opts.get("ordering", "both-directions"),
                  opts.input_file("queries", required=False))
    return 0


# --------------------------------------------------------------- build-index

def do_build_index(collection_path: str, out_path: str, stem: bool,
                   stopwords_path: str | None) -> None:
    store = load_collection(collection_path)
    retriever = Bm25Retriever(stem=stem, stopwords=stopwords_path).fit(store)
    retriever.save_index(out_path)
    index = retriever.index_
    print(f"indexed {index.n_docs} passages, {len(index.postings)} terms, "
          f"avgdl {index.avgdl:.2f}")


def cmd_build_index(opts: Options) -> int:
    do_build_index(opts.input_file("collection"), opts.require("out"),
                   opts.get("stem", False, bool),
                   opts.input_file("stopwords", required=False))
    return 0


# ------------------------------------------------------------------ retrieve

def do_retrieve(index_path: str, queries_path: str, topk: int,
                params: Bm25Params, query_term_weighting: bool,
                out_path: str | None, run_path: str | None, tag: str,
                collection_path: str | None, threads: int) -> None:
    if out_path is None and run_path is None:
        raise ConfigError("retrieve needs --out and/or --run")
    if out_path is not None and collection_path is None:
        raise ConfigError("--out needs --collection to supply passage texts")
    index = InvertedIndex.load_file(index_path)
    queries = sorted(load_queries(queries_path), key=lambda q: q.id)
    store = load_collection(collection_path) if collection_path else None

    def one(query: QueryRecord) -> tuple[str, list[tuple[str, float]]]:
        return query.id, retrieve_topk(index, query.text, topk, params,
                                       query_term_weighting)

    results = dict(_parallel_map(one, queries, threads))
    if run_path is not None:
        _write_text(run_path, lambda f: write_run_file(results, tag, f))
    if out_path is not None:
        assert store is not None
        sets = (to_candidate_set(q.id, results[q.id], q.text, store)
                for q in queries)
        _write_text(out_path, lambda f: write_top1000(sets, f))
    matched = sum(1 for scored in results.values() if scored)
    print(f"retrieved candidates for {matched}/{len(queries)} queries "
          f"(top {topk})")


def cmd_retrieve(opts: Options) -> int:
    do_retrieve(opts.input_file("index"), opts.input_file("queries"),
                opts.get("topk", 1000, int),
                Bm25Params(opts.get("k1", 0.9, float), opts.get("b", 0.4, float)),
                opts.get("query_tf_weighting", False, bool),
                opts.get("out"), opts.get("run"), opts.get("tag", "bm25"),
                opts.input_file("collection", required=False), opts.threads())
    return 0


# -------------------------------------------------------------------- expand

def do_expand(queries_path: str, out_path: str, num_beams: int,
              filter_policy: str, expansions_path: str | None,
              service_url: str | None,
              save_expansions: str | None) -> None:
    queries = load_queries(queries_path)
    if expansions_path is not None and service_url is not None:
        raise ConfigError("choose one of --expansions or --service")
    if expansions_path is not None:
        with open(expansions_path, encoding="utf-8") as f:
            beams = load_precomputed_expansions(f, expansions_path)
    elif service_url is not None:
        client = ParaphraseClient(service_url)
        if save_expansions is not None:
            with open(save_expansions, "w", encoding="utf-8", newline="") as f:
                beams = fetch_expansions(queries, client, num_beams, f)
        else:
            beams = fetch_expansions(queries, client, num_beams)
    else:
        raise ConfigError("expand needs --expansions <file> or --service <url>")
    expander = QueryExpander(num_beams, filter_policy).fit(beams)
    expanded = expander.transform(queries)

    def write(f) -> None:
        for eq in expanded:
            f.write(f"{eq.query_id}\t{eq.assembled_text}\n")

    _write_text(out_path, write)
    with_beams = sum(1 for eq in expanded if eq.beams_used)
    print(f"expanded {with_beams}/{len(expanded)} queries "
          f"(num_beams={num_beams}, filter={filter_policy})")


def cmd_expand(opts: Options) -> int:
    do_expand(opts.input_file("queries"), opts.require("out"),
              opts.get("num_beams", 3, int), opts.get("filter", "none"),
              opts.input_file("expansions", required=False),
              opts.get("service"), opts.get("save_expansions"))
    return 0


# -------------------------------------------------------------------- rerank

def _load_expanded_texts(path: str) -> dict[str, str]:
    texts = {}
    for record in load_queries(path):
        texts[record.id] = record.text
    return texts


def do_rerank(candidates_path: str, out_path: str | None, tag: str,
              scorer_spec: str, expanded_path: str | None, no_expansion: bool,
              truncation: TruncationConfig, qrels_path: str | None,
              pairs_out: str | None, negatives_per_positive: int,
              negatives_from: str, collection_path: str | None,
              seed: int, threads: int) -> None:
    if out_path is None and pairs_out is None:
        raise ConfigError("rerank needs --out and/or --training-pairs-out")
    candidates = load_top1000(candidates_path)
    qrels = load_qrels(qrels_path) if qrels_path else None

    if pairs_out is not None:
        if qrels is None:
            raise ConfigError("--training-pairs-out needs --qrels")
        collection_ids = None
        if negatives_from == "collection":
            if collection_path is None:
                raise ConfigError("--negatives-from collection needs "
                                  "--collection")
            collection_ids = load_collection(collection_path).keys()
        pairs = sample_training_pairs(qrels, candidates.values(),
                                      negatives_per_positive, seed,
                                      negatives_from=negatives_from,
                                      collection_ids=collection_ids)
        _write_text(pairs_out, lambda f: write_labeled_pairs(pairs, f))
        positives = sum(1 for p in pairs if p.label == 1)
        print(f"training pairs: {positives} positive, "
              f"{len(pairs) - positives} negative")

    if out_path is None:
        return
    scorer = make_scorer(scorer_spec, qrels)
    expanded_texts = (_load_expanded_texts(expanded_path)
                      if expanded_path is not None else {})

    def build_query(cs) -> ExpandedQuery:
        original = cs.query_text or ""
        text = original
        if not no_expansion and expanded_path is not None:
            text = expanded_texts.get(cs.query_id)
            if text is None:
                log.warning("no expanded text for query %s; using original",
                            cs.query_id)
                text = original
            elif original and not text.startswith(original):
                log.warning("expanded text for query %s does not extend the "
                            "candidate file's query text", cs.query_id)
        return ExpandedQuery(cs.query_id, original, (), text)

    def one(qid: str) -> tuple[str, tuple[tuple[str, float], ...]]:
        cs = candidates[qid]
        ranking = rerank(cs, build_query(cs), scorer, truncation)
        return qid, ranking.entries

    rankings = dict(_parallel_map(one, sorted(candidates), threads))
    _write_text(out_path, lambda f: write_run_file(rankings, tag, f))
    print(f"reranked {len(rankings)} queries with scorer {scorer_spec} "
          f"-> {out_path}")


def _truncation_from(opts: Options) -> TruncationConfig:
    vocab_path = opts.input_file("vocab", required=False)
    vocab = SubwordVocab.from_file(vocab_path) if vocab_path else None
    return TruncationConfig(opts.get("max_query_tokens", 64, int),
                            opts.get("total_budget", 512, int),
                            opts.get("special_token_overhead", 3, int),
                            vocab)


def cmd_rerank(opts: Options) -> int:
    do_rerank(opts.input_file("candidates"), opts.get("out"),
              opts.get("tag", "qxrank"), opts.get("scorer", "lexical"),
              opts.input_file("expanded_queries", required=False),
              opts.get("no_expansion", False, bool), _truncation_from(opts),
              opts.input_file("qrels", required=False),
              opts.get("training_pairs_out"),
              opts.get("negatives_per_positive", 4, int),
              opts.get("negatives_from", "candidates"),
              opts.input_file("collection", required=False),
              opts.get("seed", 0, int), opts.threads())
    return 0


# ------------------------------------------------------------------ evaluate

def do_evaluate(run_path: str, qrels_path: str, metric: str,
                config: MetricConfig, per_topic_path: str | None) -> None:
    if metric == "all":
        metrics: tuple[str, ...] = METRIC_NAMES
    elif metric in METRIC_NAMES:
        metrics = (metric,)
    else:
        raise ConfigError(f"--metric must be one of map, ndcg, p10, all; "
                          f"got {metric!r}")
    run = load_run_file(run_path)
    qrels = load_qrels(qrels_path)
    result = evaluate_rankings(rankings_from_run(run), qrels, config, metrics)
    if per_topic_path is not None:
        _write_text(per_topic_path,
                    lambda f: write_per_topic(result.per_topic, f))
    topics = {topic for topic, _ in result.per_topic}
    print(f"topics evaluated: {len(topics)}")
    for name in metrics:
        if name in result.means:
            print(f"{name} {result.means[name]:.6f}")
        else:
            print(f"{name} n/a (no scorable topics)")


def cmd_evaluate(opts: Options) -> int:
    config = MetricConfig(opts.get("binarize_threshold", 1, int),
                          opts.get("ndcg_gain", "exponential"),
                          opts.get("ndcg_cutoff", None, int))
    do_evaluate(opts.input_file("run"), opts.input_file("qrels"),
                opts.get("metric", "all"), config, opts.get("per_topic"))
    return 0


# ------------------------------------------------------------------- compare

def do_compare(per_topic_path: str, stats_path: str, epsilon: float,
               report_out: str | None) -> None:
    with open(per_topic_path, encoding="utf-8") as f:
        own = read_per_topic(f, per_topic_path)
    with open(stats_path, encoding="utf-8") as f:
        stats = load_committee_stats(f, stats_path)
    report = classify_buckets(own, stats, epsilon)
    rendered = render_bucket_report(report)
    lines = [rendered]
    for metric, fractions in sorted(summarize_fractions(report).items()):
        lines.append(f"{metric} upper-bucket fraction: "
                     f"{fractions.including_at_median:.4f} with At Median, "
                     f"{fractions.excluding_at_median:.4f} without")
    text = "\n".join(lines)
    if report_out is not None:
        _write_text(report_out, lambda f: f.write(text + "\n"))
    print(text)


def cmd_compare(opts: Options) -> int:
    do_compare(opts.input_file("per_topic"), opts.input_file("stats"),
               opts.get("epsilon", 1e-4, float), opts.get("report_out"))
    return 0


# ------------------------------------------------------------------ pipeline

def cmd_pipeline(opts: Options) -> int:
    out_dir = opts.require("out_dir")
    os.makedirs(out_dir, exist_ok=True)
    expanded_path = os.path.join(out_dir, "expanded_queries.tsv")
    run_path = os.path.join(out_dir, "run.tsv")
    per_topic_path = os.path.join(out_dir, "per_topic.tsv")
    do_expand(opts.input_file("queries"), expanded_path,
              opts.get("num_beams", 3, int), opts.get("filter", "none"),
              opts.input_file("expansions", required=False),
              opts.get("service"), opts.get("save_expansions"))
    do_rerank(opts.input_file("candidates"), run_path,
              opts.get("tag", "qxrank"), opts.get("scorer", "lexical"),
              expanded_path, opts.get("no_expansion", False, bool),
              _truncation_from(opts), opts.input_file("qrels"),
              None, opts.get("negatives_per_positive", 4, int),
              opts.get("negatives_from", "candidates"), None,
              opts.get("seed", 0, int), opts.threads())
    config = MetricConfig(opts.get("binarize_threshold", 1, int),
                          opts.get("ndcg_gain", "exponential"),
                          opts.get("ndcg_cutoff", None, int))
    do_evaluate(run_path, opts.require("qrels"), opts.get("metric", "all"),
                config, per_topic_path)
    return 0


# --------------------------------------------------------------------- wiring

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value config file")
    common.add_argument("--threads", type=int,
                        help="worker bound for parallel stages")
    common.add_argument("--seed", type=int, help="seed for all randomness")
    common.add_argument("--verbose", action="store_true", default=None,
                        help="log at info level instead of warning")

    parser = argparse.ArgumentParser(
        prog="qxrank",
        description="Two-stage passage retrieval: candidate generation, "
                    "query expansion, reranking, and evaluation.")
    parser.add_argument(
        "--version", action="version",
        version=f"qxrank {__version__} (index format {INDEX_FORMAT_VERSION})")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mine-pairs", parents=[common],
                       help="mine equivalent-query pairs from qrels")
    p.add_argument("--qrels")
    p.add_argument("--out", help="output directory")
    p.add_argument("--min-grade", type=int, dest="min_grade")
    p.add_argument("--ordering", choices=ORDERINGS)
    p.add_argument("--queries", help="query texts for the seq2seq export")
    p.set_defaults(func=cmd_mine_pairs)

    p = sub.add_parser("build-index", parents=[common],
                       help="build the inverted index for a collection")
    p.add_argument("--collection")
    p.add_argument("--out", help="index file to write")
    p.add_argument("--stem", action="store_true", default=None)
    p.add_argument("--stopwords", help="stopword file, one word per line")
    p.set_defaults(func=cmd_build_index)

    p = sub.add_parser("retrieve", parents=[common],
                       help="first-stage candidate retrieval")
    p.add_argument("--index")
    p.add_argument("--queries")
    p.add_argument("--collection", help="needed when writing --out")
    p.add_argument("--topk", type=int)
    p.add_argument("--k1", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--query-tf-weighting", action="store_true", default=None,
                   dest="query_tf_weighting")
    p.add_argument("--out", help="candidate file (4-column) to write")
    p.add_argument("--run", help="run file to write")
    p.add_argument("--tag")
    p.set_defaults(func=cmd_retrieve)

    p = sub.add_parser("expand", parents=[common],
                       help="append paraphrase beams to queries")
    p.add_argument("--queries")
    p.add_argument("--expansions", help="precomputed expansions TSV")
    p.add_argument("--service", help="paraphrase service base URL")
    p.add_argument("--save-expansions", dest="save_expansions",
                   help="persist fetched beams to this TSV")
    p.add_argument("--num-beams", type=int, dest="num_beams")
    p.add_argument("--filter", help="none | dedup-exact | "
                                    "min-log-likelihood:T | lexical-overlap:T")
    p.add_argument("--out", help="expanded queries TSV to write")
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser("rerank", parents=[common],
                       help="score candidates and write a run file")
    p.add_argument("--candidates", help="4-column candidate file")
    p.add_argument("--expanded-queries", dest="expanded_queries",
                   help="expanded queries TSV from the expand step")
    p.add_argument("--no-expansion", action="store_true", default=None,
                   dest="no_expansion", help="score with original queries")
    p.add_argument("--scorer",
                   help="lexical | file:<path> | remote:<url> | "
                        "constant[:<v>] | oracle")
    p.add_argument("--qrels", help="needed for oracle scoring or sampling")
    p.add_argument("--out", help="run file to write")
    p.add_argument("--tag")
    p.add_argument("--max-query-tokens", type=int, dest="max_query_tokens")
    p.add_argument("--total-budget", type=int, dest="total_budget")
    p.add_argument("--special-token-overhead", type=int,
                   dest="special_token_overhead")
    p.add_argument("--vocab", help="subword vocabulary file for exact budgets")
    p.add_argument("--training-pairs-out", dest="training_pairs_out",
                   help="write sampled labeled pairs to this TSV")
    p.add_argument("--negatives-per-positive", type=int,
                   dest="negatives_per_positive")
    p.add_argument("--negatives-from", dest="negatives_from",
                   choices=("candidates", "collection"))
    p.add_argument("--collection",
                   help="needed for --negatives-from collection")
    p.set_defaults(func=cmd_rerank)

    p = sub.add_parser("evaluate", parents=[common],
                       help="score a run file against qrels")
    p.add_argument("--run")
    p.add_argument("--qrels")
    p.add_argument("--metric", help="map | ndcg | p10 | all")
    p.add_argument("--ndcg-gain", dest="ndcg_gain",
                   choices=("exponential", "linear"))
    p.add_argument("--ndcg-cutoff", type=int, dest="ndcg_cutoff")
    p.add_argument("--binarize-threshold", type=int,
                   dest="binarize_threshold")
    p.add_argument("--per-topic", dest="per_topic",
                   help="write per-topic values to this TSV")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("compare", parents=[common],
                       help="bucket per-topic values against committee stats")
    p.add_argument("--per-topic", dest="per_topic")
    p.add_argument("--stats", help="committee stats TSV")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--report-out", dest="report_out")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("pipeline", parents=[common],
                       help="expand, rerank, and evaluate in one go")
    p.add_argument("--queries")
    p.add_argument("--candidates")
    p.add_argument("--qrels")
    p.add_argument("--expansions")
    p.add_argument("--service")
    p.add_argument("--save-expansions", dest="save_expansions")
    p.add_argument("--num-beams", type=int, dest="num_beams")
    p.add_argument("--filter")
    p.add_argument("--scorer")
    p.add_argument("--no-expansion", action="store_true", default=None,
                   dest="no_expansion")
    p.add_argument("--tag")
    p.add_argument("--max-query-tokens", type=int, dest="max_query_tokens")
    p.add_argument("--total-budget", type=int, dest="total_budget")
    p.add_argument("--special-token-overhead", type=int,
                   dest="special_token_overhead")
    p.add_argument("--vocab")
    p.add_argument("--metric")
    p.add_argument("--ndcg-gain", dest="ndcg_gain",
                   choices=("exponential", "linear"))
    p.add_argument("--ndcg-cutoff", type=int, dest="ndcg_cutoff")
    p.add_argument("--binarize-threshold", type=int,
                   dest="binarize_threshold")
    p.add_argument("--out-dir", dest="out_dir")
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = (parse_config_file(args.config)
                  if getattr(args, "config", None) else {})
        opts = Options(args, config)
        level = logging.INFO if opts.get("verbose", False, bool) else logging.WARNING
        logging.basicConfig(stream=sys.stderr, level=level,
                            format="%(levelname)s %(name)s: %(message)s")
        return args.func(opts)
    except QxrankError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
