"""Shared domain records, run configuration and dataset validation."""

from __future__ import annotations

import dataclasses
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Optional

ElementKey = tuple[int, int]


class DataError(ValueError):
    """Malformed or inconsistent input data."""


class ConfigError(ValueError):
    """Invalid parameter value or unknown profile/method."""


def round_half_up(v: float) -> int:
    return math.floor(v + 0.5)


def element_key(x: float, y: float) -> ElementKey:
    """Map detector coordinates to the integer pixel identifying a visual element."""
    return (round_half_up(x), round_half_up(y))


def _valid_latlon(lat: Optional[float], lon: Optional[float]) -> bool:
    return lat is not None and lon is not None and -90.0 <= lat <= 90.0 and -180.0 <= lon <= 180.0


@dataclass(frozen=True)
class QueryMeta:
    query_id: str
    width: int
    height: int
    truth_label: Optional[str] = None
    truth_lat: Optional[float] = None
    truth_lon: Optional[float] = None

    @property
    def truth_point(self) -> Optional[tuple[float, float]]:
        if self.truth_lat is None or self.truth_lon is None:
            return None
        return (self.truth_lat, self.truth_lon)


@dataclass(frozen=True)
class ImageMeta:
    """One entry of a query's ranked candidate list.

    ``query_id`` ties the entry to the ranked list it came from; rank and
    similarity are only meaningful within that list.
    """

    query_id: str
    image_id: str
    retrieval_rank: int
    retrieval_similarity: Optional[float] = None
    lat: Optional[float] = None
    lon: Optional[float] = None
    label: Optional[str] = None

    @property
    def point(self) -> Optional[tuple[float, float]]:
        if self.lat is None or self.lon is None:
            return None
        return (self.lat, self.lon)


@dataclass(frozen=True, slots=True)
class CorrespondenceRecord:
    query_id: str
    x: int
    y: int
    image_id: str
    ini_score: float

    @property
    def element(self) -> ElementKey:
        return (self.x, self.y)


PROFILES: dict[str, dict] = {
    "geo-constrained": {"a": 10, "b": 20, "theta": 5},
    "geo-unconstrained": {"a": 0, "b": 30, "theta": 6},
}


@dataclass(frozen=True)
class Config:
    """Engine parameters.

    Attributes:
        a: region parameter of the distinctiveness grid (0 = one region per element).
        b: region parameter of the selection grid (0 = every element selected).
        theta: location-frequency cutoff; regions matched by >= theta locations get weight 0.
        delta: Gaussian smoothing scale applied to raw correspondence scores.
        top_n: length of the candidate list kept from the retrieval ranking.
        min_ini_score: correspondences scoring below this are dropped before aggregation.
        cluster_radius_km: join radius of the geo-clustering step.
        log_base: logarithm base for distinctiveness weights; None means natural log.
        grouping: "label", "geo" or "auto" (label when every candidate has one).
    """

    a: int = 10
    b: int = 20
    theta: int = 5
    delta: float = 5.0
    top_n: int = 1000
    min_ini_score: float = 0.0
    cluster_radius_km: float = 1.0
    log_base: Optional[float] = None
    grouping: str = "auto"

    def __post_init__(self):
        problems = []
        for name in ("a", "b"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or v < 0:
                problems.append(f"{name} must be a nonnegative integer, got {v!r}")
        if not isinstance(self.theta, int) or isinstance(self.theta, bool) or self.theta < 1:
            problems.append(f"theta must be an integer >= 1, got {self.theta!r}")
        if not self.delta > 0:
            problems.append(f"delta must be > 0, got {self.delta!r}")
        if not isinstance(self.top_n, int) or self.top_n < 1:
            problems.append(f"top_n must be an integer >= 1, got {self.top_n!r}")
        if not self.min_ini_score >= 0:
            problems.append(f"min_ini_score must be >= 0, got {self.min_ini_score!r}")
        if not self.cluster_radius_km > 0:
            problems.append(f"cluster_radius_km must be > 0, got {self.cluster_radius_km!r}")
        if self.log_base is not None and not (self.log_base > 0 and self.log_base != 1):
            problems.append(f"log_base must be positive and != 1, got {self.log_base!r}")
        if self.grouping not in ("label", "geo", "auto"):
            problems.append(f"grouping must be label, geo or auto, got {self.grouping!r}")
        if problems:
            raise ConfigError("; ".join(problems))

    @classmethod
    def from_profile(cls, name: str, **overrides) -> "Config":
        try:
            preset = PROFILES[name]
        except KeyError:
            raise ConfigError(f"unknown profile {name!r}; choose from {sorted(PROFILES)}") from None
        return cls(**{**preset, **overrides})

    @classmethod
    def from_dict(cls, d: dict) -> "Config":
        d = dict(d)
        profile = d.pop("profile", None)
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if profile is not None:
            return cls.from_profile(profile, **d)
        return cls(**d)

    def replace(self, **changes) -> "Config":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True, order=True)
class Violation:
    kind: str
    detail: str


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def accepted(self) -> bool:
        return not self.violations

    def kinds(self) -> set[str]:
        return {v.kind for v in self.violations}

    def __str__(self):
        if self.accepted:
            return "dataset accepted"
        return "\n".join(f"{v.kind}: {v.detail}" for v in self.violations)


OUT_OF_FRAME = "element outside query frame"
ONE_TO_ONE = "one-to-one constraint"
MISSING_IMAGE = "missing image metadata"
UNKNOWN_QUERY = "unknown query"
DUPLICATE_QUERY = "duplicate query_id"
DUPLICATE_RANK = "duplicate retrieval rank"
DUPLICATE_IMAGE = "duplicate image in ranked list"
BAD_QUERY = "invalid query metadata"
BAD_IMAGE = "invalid image metadata"
BAD_SCORE = "invalid ini_score"


def validate_dataset(
    queries: Iterable[QueryMeta],
    images: Iterable[ImageMeta],
    correspondences: Iterable[CorrespondenceRecord],
) -> ValidationReport:
    """Check every record invariant; the dataset is accepted iff no violation is reported.

    Violations are deduplicated and sorted so the report does not depend on
    input order.
    """
    found: set[Violation] = set()

    qmeta: dict[str, QueryMeta] = {}
    for q in queries:
        if q.query_id in qmeta:
            found.add(Violation(DUPLICATE_QUERY, q.query_id))
        qmeta[q.query_id] = q
        if q.width < 1 or q.height < 1:
            found.add(Violation(BAD_QUERY, f"{q.query_id}: frame {q.width}x{q.height}"))
        if (q.truth_lat is not None or q.truth_lon is not None) and not _valid_latlon(
            q.truth_lat, q.truth_lon
        ):
            found.add(Violation(BAD_QUERY, f"{q.query_id}: ground truth ({q.truth_lat}, {q.truth_lon})"))

    ranks: Counter = Counter()
    listed: Counter = Counter()
    for im in images:
        if im.query_id not in qmeta:
            found.add(Violation(UNKNOWN_QUERY, f"image {im.image_id} lists query {im.query_id}"))
        ranks[(im.query_id, im.retrieval_rank)] += 1
        listed[(im.query_id, im.image_id)] += 1
        where = f"{im.query_id}/{im.image_id}"
        if im.retrieval_rank < 1:
            found.add(Violation(BAD_IMAGE, f"{where}: retrieval_rank {im.retrieval_rank}"))
        if im.retrieval_similarity is not None and not im.retrieval_similarity >= 0:
            found.add(Violation(BAD_IMAGE, f"{where}: retrieval_similarity {im.retrieval_similarity}"))
        has_geo = im.lat is not None or im.lon is not None
        if has_geo and not _valid_latlon(im.lat, im.lon):
            found.add(Violation(BAD_IMAGE, f"{where}: coordinates ({im.lat}, {im.lon})"))
        if not has_geo and im.label is None:
            found.add(Violation(BAD_IMAGE, f"{where}: neither coordinates nor label"))
    for (qid, rank), n in ranks.items():
        if n > 1:
            found.add(Violation(DUPLICATE_RANK, f"{qid}: rank {rank} used {n} times"))
    for (qid, iid), n in listed.items():
        if n > 1:
            found.add(Violation(DUPLICATE_IMAGE, f"{qid}/{iid} listed {n} times"))

    pairs: Counter = Counter()
    for c in correspondences:
        q = qmeta.get(c.query_id)
        if q is None:
            found.add(Violation(UNKNOWN_QUERY, f"correspondence for query {c.query_id}"))
        elif not (0 <= c.x < q.width and 0 <= c.y < q.height):
            found.add(
                Violation(OUT_OF_FRAME, f"{c.query_id}: ({c.x}, {c.y}) in {q.width}x{q.height} frame")
            )
        if (c.query_id, c.image_id) not in listed:
            found.add(Violation(MISSING_IMAGE, f"{c.query_id}/{c.image_id}"))
        if not (c.ini_score >= 0 and math.isfinite(c.ini_score)):
            found.add(Violation(BAD_SCORE, f"{c.query_id}/{c.image_id} ({c.x}, {c.y}): {c.ini_score}"))
        pairs[(c.query_id, c.x, c.y, c.image_id)] += 1
    for (qid, x, y, iid), n in pairs.items():
        if n > 1:
            found.add(Violation(ONE_TO_ONE, f"{qid}: element ({x}, {y}) matched {n} times in {iid}"))

    return ValidationReport(sorted(found))
