"""Per-query pipeline: candidate cutoff, location extraction and location ranking."""

from __future__ import annotations

from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence

from .baselines import gvr, visnn
from .cloud import build_clouds
from .core import Config, ConfigError, CorrespondenceRecord, ImageMeta, QueryMeta
from .distinctiveness import build_distinctiveness, build_grid
from .evaluation import EvalConfig, EvalReport, evaluate
from .locations import CandidateLocation, extract_locations, select_candidates
from .matching import LocationScore, rank_locations, score_clouds

METHODS = ("dvem", "gvr", "visnn")


@dataclass(frozen=True)
class QueryData:
    """Everything the engine needs for one query; images sorted by retrieval rank."""

    query: QueryMeta
    images: tuple[ImageMeta, ...]
    correspondences: tuple[CorrespondenceRecord, ...]

    @property
    def query_id(self) -> str:
        return self.query.query_id


@dataclass(frozen=True)
class RankedLocation:
    location_id: str
    score: float
    k: Optional[int] = None
    centroid: Optional[tuple[float, float]] = None
    labels: tuple[str, ...] = ()


@dataclass(frozen=True)
class QueryResult:
    query_id: str
    method: str
    ranked: tuple[RankedLocation, ...]
    diagnostics: dict = field(default_factory=dict, compare=False)

    @property
    def estimate(self) -> Optional[RankedLocation]:
        return self.ranked[0] if self.ranked else None


def dvem_scores(
    query: QueryMeta,
    locations: Sequence[CandidateLocation],
    correspondences: Sequence[CorrespondenceRecord],
    config: Config,
    diagnostics: Optional[dict] = None,
) -> list[LocationScore]:
    """Ranked DVEM scores for the given candidate locations."""
    built = build_clouds(locations, correspondences, config)
    distinct = build_distinctiveness(
        build_grid(query.width, query.height, config.a),
        built.clouds,
        config.theta,
        config.log_base,
    )
    selection = build_grid(query.width, query.height, config.b)
    if diagnostics is not None:
        diagnostics["skipped_unlocated"] = built.skipped_unlocated
        diagnostics["dropped_low_score"] = built.dropped_low_score
    return rank_locations(score_clouds(built.clouds, selection, distinct))


def run_query(data: QueryData, config: Config, method: str = "dvem") -> QueryResult:
    if method not in METHODS:
        raise ConfigError(f"unknown method {method!r}; choose from {METHODS}")
    candidates = select_candidates(data.images, config.top_n)
    locations = extract_locations(candidates, config)
    by_id = {loc.location_id: loc for loc in locations}
    diag = {"candidates": len(candidates), "locations": len(locations)}

    if method == "dvem":
        pairs = [(s.location_id, s.score, s.k) for s in dvem_scores(data.query, locations, data.correspondences, config, diag)]
    else:
        res = gvr(candidates, locations) if method == "gvr" else visnn(candidates, locations)
        pairs = [(lid, score, None) for lid, score in res.ranked]

    ranked = tuple(
        RankedLocation(lid, score, k, by_id[lid].centroid, tuple(sorted(by_id[lid].labels)))
        for lid, score, k in pairs
    )
    return QueryResult(data.query_id, method, ranked, diag)


def _run_one(args):
    data, config, method = args
    return run_query(data, config, method)


def run_all(
    queries: Iterable[QueryData],
    config: Config,
    method: str = "dvem",
    workers: int = 1,
) -> Iterator[QueryResult]:
    """Rank every query, yielding results in input order.

    With ``workers > 1`` queries are farmed out to a process pool while at
    most ``4 * workers`` are in flight, so a streamed input stays streamed.
    """
    if method not in METHODS:
        raise ConfigError(f"unknown method {method!r}; choose from {METHODS}")
    if workers <= 1:
        for data in queries:
            yield run_query(data, config, method)
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        pending: deque = deque()
        for data in queries:
            pending.append(pool.submit(_run_one, (data, config, method)))
            if len(pending) >= 4 * workers:
                yield pending.popleft().result()
        while pending:
            yield pending.popleft().result()


def run_pipeline(
    queries: Iterable[QueryData],
    method: str,
    config: Config,
    eval_config: Optional[EvalConfig] = None,
    workers: int = 1,
) -> tuple[list[QueryResult], Optional[EvalReport]]:
    queries = list(queries)
    results = list(run_all(queries, config, method, workers))
    report = None
    if eval_config is not None:
        report = evaluate(results, {d.query_id: d.query for d in queries}, eval_config, method)
    return results, report
