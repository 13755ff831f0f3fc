"""Ranking metrics (AP, nDCG, P@k) and per-topic bucket comparison.

Metric conventions: AP and P@k binarize graded judgments at a configurable
threshold (grade >= threshold counts as relevant); nDCG uses exponential
gain 2^grade - 1 by default (linear optional) with a log2(rank+1) discount
and an optional cutoff applied to both DCG and the ideal DCG. Topics that
cannot be scored (no relevant judgment for AP/P@k's notion, zero ideal DCG
for nDCG) yield None and are omitted from means rather than scored zero.

Bucket comparison places each topic's score against published per-topic
best/median/worst statistics, in this precedence order: At Best, At Median,
At Worst (each within an absolute epsilon), then Best to Median or Median
to Worst by comparison with the median.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import IO, Iterable, Mapping, Sequence

from .corpus_io import Qrels, RunFileEntry
from .errors import (ConfigError, DuplicateKeyError, NotFoundError,
                     ParseError, ValidationError)
from .rerank import Ranking


def rankings_from_run(run: Mapping[str, Sequence[RunFileEntry]]
                      ) -> list[Ranking]:
    """View a parsed run file as rankings, topic ids sorted."""
    return [Ranking(qid, tuple((e.passage_id, e.score) for e in run[qid]))
            for qid in sorted(run)]

BUCKETS = ("At Best", "Best to Median", "At Median", "Median to Worst",
           "At Worst")
METRIC_NAMES = ("map", "ndcg", "p10")
DEFAULT_EPSILON = 1e-4


@dataclass(frozen=True)
class MetricConfig:
    """Knobs shared by the metric implementations."""

    binarize_threshold: int = 1
    ndcg_gain: str = "exponential"
    ndcg_cutoff: int | None = None

    def __post_init__(self) -> None:
        if self.binarize_threshold < 1:
            raise ConfigError(f"binarize_threshold must be >= 1, "
                              f"got {self.binarize_threshold}")
        if self.ndcg_gain not in ("exponential", "linear"):
            raise ConfigError(f"ndcg_gain must be 'exponential' or 'linear', "
                              f"got {self.ndcg_gain!r}")
        if self.ndcg_cutoff is not None and self.ndcg_cutoff < 1:
            raise ConfigError(f"ndcg_cutoff must be >= 1, "
                              f"got {self.ndcg_cutoff}")


def average_precision(ranking: Ranking, qrels: Qrels,
                      config: MetricConfig = MetricConfig()) -> float | None:
    """AP over the ranked list; None when the topic has no relevant judgment.

    Relevant passages missing from the ranking lower the score through the
    denominator (total relevant), never through extra terms.
    """
    relevant = qrels.relevant_passages(ranking.query_id,
                                       config.binarize_threshold)
    if not relevant:
        return None
    hits = 0
    precision_sum = 0.0
    for position, (pid, _) in enumerate(ranking.entries, start=1):
        if pid in relevant:
            hits += 1
            precision_sum += hits / position
    return precision_sum / len(relevant)


def _gain(grade: int, config: MetricConfig) -> float:
    if config.ndcg_gain == "exponential":
        return float(2 ** grade - 1)
    return float(grade)


def ndcg(ranking: Ranking, qrels: Qrels,
         config: MetricConfig = MetricConfig()) -> float | None:
    """Normalized DCG; None when no judged passage has positive gain."""
    grades = qrels.grades_for_query(ranking.query_id)
    cutoff = config.ndcg_cutoff
    dcg = 0.0
    for position, (pid, _) in enumerate(ranking.entries, start=1):
        if cutoff is not None and position > cutoff:
            break
        grade = grades.get(pid, 0)
        if grade:
            dcg += _gain(grade, config) / math.log2(position + 1)
    ideal = sorted(grades.values(), reverse=True)
    idcg = 0.0
    for position, grade in enumerate(ideal, start=1):
        if cutoff is not None and position > cutoff:
            break
        if grade:
            idcg += _gain(grade, config) / math.log2(position + 1)
    if idcg == 0.0:
        return None
    return dcg / idcg


def precision_at_k(ranking: Ranking, qrels: Qrels, k: int = 10,
                   config: MetricConfig = MetricConfig()) -> float:
    """Fraction of the top k that is relevant; short rankings count misses."""
    if k < 1:
        raise ConfigError(f"k must be >= 1, got {k}")
    relevant = qrels.relevant_passages(ranking.query_id,
                                       config.binarize_threshold)
    hits = sum(1 for pid, _ in ranking.entries[:k] if pid in relevant)
    return hits / k


def mean_over_topics(per_topic: Mapping[str, float | None]) -> float:
    """Arithmetic mean over included topics (None values omitted)."""
    included = [v for v in per_topic.values() if v is not None]
    if not included:
        raise ValidationError("no topics left to average after exclusions")
    return sum(included) / len(included)


@dataclass(frozen=True)
class PerTopicStats:
    """Published best/median/worst for one topic and metric."""

    topic_id: str
    metric: str
    best: float
    median: float
    worst: float

    def __post_init__(self) -> None:
        if not (self.best >= self.median >= self.worst):
            raise ValidationError(
                f"stats for topic {self.topic_id!r} metric {self.metric!r} "
                f"are not ordered best >= median >= worst: "
                f"{self.best}, {self.median}, {self.worst}")


def load_committee_stats(stream: Iterable[str], source: str = "<stats>"
                         ) -> dict[tuple[str, str], PerTopicStats]:
    """Read `topic_id <TAB> metric <TAB> best <TAB> median <TAB> worst`."""
    from .corpus_io import _lines

    stats: dict[tuple[str, str], PerTopicStats] = {}
    for line_no, line in _lines(stream):
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 5:
            raise ParseError(
                "expected topic_id<TAB>metric<TAB>best<TAB>median<TAB>worst",
                source, line_no)
        topic_id, metric, best_s, median_s, worst_s = parts
        try:
            best, median, worst = float(best_s), float(median_s), float(worst_s)
        except ValueError:
            raise ParseError(f"bad statistic value in {parts[2:]!r}",
                             source, line_no)
        key = (topic_id, metric)
        if key in stats:
            raise DuplicateKeyError(
                f"{source}:{line_no}: duplicate stats for topic "
                f"{topic_id!r} metric {metric!r}")
        try:
            stats[key] = PerTopicStats(topic_id, metric, best, median, worst)
        except ValidationError as e:
            raise ValidationError(f"{source}:{line_no}: {e}")
    return stats


@dataclass
class TopicBucketReport:
    """Bucket counts per metric plus each topic's assignment."""

    counts: dict[str, dict[str, int]] = field(default_factory=dict)
    assignments: dict[tuple[str, str], str] = field(default_factory=dict)

    def total(self, metric: str) -> int:
        return sum(self.counts.get(metric, {}).values())


def classify_topic(own: float, stats: PerTopicStats,
                   epsilon: float = DEFAULT_EPSILON) -> str:
    """Bucket one topic score; the first matching rule wins."""
    if abs(own - stats.best) <= epsilon:
        return "At Best"
    if abs(own - stats.median) <= epsilon:
        return "At Median"
    if abs(own - stats.worst) <= epsilon:
        return "At Worst"
    if own > stats.median:
        return "Best to Median"
    return "Median to Worst"


def classify_buckets(own: Mapping[tuple[str, str], float],
                     stats: Mapping[tuple[str, str], PerTopicStats]
                     | Iterable[PerTopicStats],
                     epsilon: float = DEFAULT_EPSILON) -> TopicBucketReport:
    """Classify every (topic, metric) score against its committee stats."""
    if not epsilon > 0:
        raise ConfigError(f"epsilon must be > 0, got {epsilon}")
    if not isinstance(stats, Mapping):
        stats = {(s.topic_id, s.metric): s for s in stats}
    missing = sorted({topic for (topic, metric) in own
                      if (topic, metric) not in stats})
    if missing:
        raise NotFoundError(
            f"no committee stats for topics: {', '.join(missing)}")
    report = TopicBucketReport()
    for (topic, metric), value in sorted(own.items()):
        bucket = classify_topic(value, stats[(topic, metric)], epsilon)
        report.assignments[(topic, metric)] = bucket
        per_metric = report.counts.setdefault(
            metric, {name: 0 for name in BUCKETS})
        per_metric[bucket] += 1
    return report


@dataclass(frozen=True)
class FractionSummary:
    """Share of topics at or above the median, under both conventions."""

    including_at_median: float
    excluding_at_median: float


def summarize_fractions(report: TopicBucketReport
                        ) -> dict[str, FractionSummary]:
    """Per metric, the fraction of topics in the upper buckets.

    Reported both with and without the At Median bucket, since "at or above
    the median" is ambiguous when scores tie the median exactly.
    """
    summary = {}
    for metric, counts in report.counts.items():
        total = sum(counts.values())
        upper = counts["At Best"] + counts["Best to Median"]
        summary[metric] = FractionSummary(
            including_at_median=(upper + counts["At Median"]) / total,
            excluding_at_median=upper / total)
    return summary


def render_bucket_report(report: TopicBucketReport) -> str:
    """Five-row table per metric, plus a conservation total."""
    lines = []
    for metric in sorted(report.counts):
        counts = report.counts[metric]
        lines.append(f"metric: {metric}")
        for bucket in BUCKETS:
            lines.append(f"  {bucket:<16} {counts[bucket]:>5}")
        lines.append(f"  {'total':<16} {report.total(metric):>5}")
    return "\n".join(lines)


@dataclass(frozen=True)
class EvalResult:
    """Per-topic metric values (None = excluded) and per-metric means."""

    per_topic: dict[tuple[str, str], float | None]
    means: dict[str, float]


def evaluate_rankings(rankings: Sequence[Ranking], qrels: Qrels,
                      config: MetricConfig = MetricConfig(),
                      metrics: Sequence[str] = METRIC_NAMES) -> EvalResult:
    """Score every ranking whose topic has judgments; average per metric."""
    unknown = [m for m in metrics if m not in METRIC_NAMES]
    if unknown:
        raise ConfigError(f"unknown metrics: {unknown}; "
                          f"expected subset of {METRIC_NAMES}")
    per_topic: dict[tuple[str, str], float | None] = {}
    per_metric: dict[str, dict[str, float | None]] = {m: {} for m in metrics}
    for ranking in rankings:
        if not qrels.grades_for_query(ranking.query_id):
            continue
        for metric in metrics:
            if metric == "map":
                value = average_precision(ranking, qrels, config)
            elif metric == "ndcg":
                value = ndcg(ranking, qrels, config)
            else:
                value = precision_at_k(ranking, qrels, 10, config)
            per_topic[(ranking.query_id, metric)] = value
            per_metric[metric][ranking.query_id] = value
    means = {}
    for metric in metrics:
        scores = per_metric[metric]
        if scores and any(v is not None for v in scores.values()):
            means[metric] = mean_over_topics(scores)
    return EvalResult(per_topic, means)


def write_per_topic(per_topic: Mapping[tuple[str, str], float | None],
                    out: IO[str]) -> None:
    """Write `topic_id <TAB> metric <TAB> value`; excluded topics skipped."""
    for (topic, metric) in sorted(per_topic):
        value = per_topic[(topic, metric)]
        if value is None:
            continue
        out.write(f"{topic}\t{metric}\t{value:.6f}\n")


def read_per_topic(stream: Iterable[str], source: str = "<per-topic>"
                   ) -> dict[tuple[str, str], float]:
    """Read the per-topic TSV back into a (topic, metric) -> value mapping."""
    from .corpus_io import _lines

    values: dict[tuple[str, str], float] = {}
    for line_no, line in _lines(stream):
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ParseError("expected topic_id<TAB>metric<TAB>value",
                             source, line_no)
        topic, metric, value_s = parts
        try:
            value = float(value_s)
        except ValueError:
            raise ParseError(f"bad metric value {value_s!r}", source, line_no)
        if (topic, metric) in values:
            raise DuplicateKeyError(
                f"{source}:{line_no}: duplicate value for topic "
                f"{topic!r} metric {metric!r}")
        values[(topic, metric)] = value
    return values
