"""Hit rate at K under the label and radius ground-truth protocols."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO, Union

from .core import ConfigError, DataError, QueryMeta
from .locations import haversine_km

Truth = Union[str, tuple[float, float]]


@dataclass(frozen=True)
class EvalConfig:
    protocol: str = "label"
    r_eval_km: float = 1.0
    k_values: tuple[int, ...] = (1, 2, 3, 4, 5, 10, 20)

    def __post_init__(self):
        if self.protocol not in ("label", "radius"):
            raise ConfigError(f"protocol must be label or radius, got {self.protocol!r}")
        if self.protocol == "radius" and not self.r_eval_km > 0:
            raise ConfigError(f"r_eval_km must be > 0, got {self.r_eval_km!r}")
        if not self.k_values or any(k < 1 for k in self.k_values):
            raise ConfigError(f"k_values must be positive integers, got {self.k_values!r}")
        object.__setattr__(self, "k_values", tuple(sorted(set(self.k_values))))


def truth_of(query: QueryMeta, cfg: EvalConfig) -> Truth:
    if cfg.protocol == "label":
        if query.truth_label is None:
            raise DataError(f"query {query.query_id} has no ground-truth label")
        return query.truth_label
    if query.truth_point is None:
        raise DataError(f"query {query.query_id} has no ground-truth coordinates")
    return query.truth_point


def hit_at_k(ranked: Sequence, truth: Truth, k: int, cfg: EvalConfig) -> bool:
    """Whether any of the top ``k`` locations matches ``truth``.

    Entries need ``labels`` (label protocol) or ``centroid`` (radius protocol).
    """
    for loc in ranked[:k]:
        if cfg.protocol == "label":
            if truth in loc.labels:
                return True
        elif loc.centroid is not None and haversine_km(loc.centroid, truth) <= cfg.r_eval_km:
            return True
    return False


def hit_rate(hits: Sequence[bool]) -> float:
    if not hits:
        raise ValueError("hit rate needs at least one query")
    return sum(bool(h) for h in hits) / len(hits)


@dataclass
class QueryOutcome:
    query_id: str
    estimate: str | None
    hits: tuple[bool, ...]


@dataclass
class EvalReport:
    method: str
    config: EvalConfig
    hit_rates: dict[int, float] = field(default_factory=dict)
    per_query: list[QueryOutcome] = field(default_factory=list)
    no_estimate: int = 0

    def write_summary(self, fh: TextIO) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["K", "hit_rate"])
        for k in self.config.k_values:
            w.writerow([k, repr(self.hit_rates[k])])

    def write_detail(self, fh: TextIO) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["query_id", "estimate"] + [f"hit@{k}" for k in self.config.k_values])
        for q in self.per_query:
            w.writerow([q.query_id, q.estimate or ""] + [int(h) for h in q.hits])


def evaluate(results: Iterable, queries: dict[str, QueryMeta], cfg: EvalConfig, method: str = "") -> EvalReport:
    """Score ranked results against ground truth.

    ``results`` yields objects with ``query_id`` and ``ranked``. Queries whose
    ranking is empty count as misses at every K.
    """
    report = EvalReport(method, cfg)
    for res in results:
        truth = truth_of(queries[res.query_id], cfg)
        ranked = list(res.ranked)
        if not ranked:
            report.no_estimate += 1
        hits = tuple(hit_at_k(ranked, truth, k, cfg) for k in cfg.k_values)
        report.per_query.append(QueryOutcome(res.query_id, ranked[0].location_id if ranked else None, hits))
    if not report.per_query:
        raise ValueError("hit rate needs at least one query")
    for i, k in enumerate(cfg.k_values):
        report.hit_rates[k] = hit_rate([q.hits[i] for q in report.per_query])
    return report
