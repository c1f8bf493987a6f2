"""Visual element clouds: per-location aggregation of smoothed correspondence weights."""

from __future__ import annotations

import csv
import math
from itertools import chain
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

from .core import Config, CorrespondenceRecord, ElementKey
from .locations import CandidateLocation


def smooth_score(ini_score: float, delta: float) -> float:
    """Gaussian smoothing of a raw verifier score into [0, 1)."""
    return 1.0 - math.exp(-(ini_score * ini_score) / (delta * delta))


@dataclass(frozen=True)
class ElementCloud:
    """Weights of every query element linked to one location.

    ``entries[e]`` is the multiset of weights of ``e``, one per member image
    holding a correspondence with it, stored sorted ascending so the
    strongest weight is last.
    """

    location_id: str
    entries: dict[ElementKey, tuple[float, ...]] = field(default_factory=dict)

    def m(self, e: ElementKey) -> int:
        return len(self.entries.get(e, ()))

    def max_weight(self, e: ElementKey) -> float:
        return self.entries[e][-1]

    def total_weight(self) -> float:
        return math.fsum(chain.from_iterable(self.entries.values()))

    def n_correspondences(self) -> int:
        return sum(len(ws) for ws in self.entries.values())


def _freeze(location_id: str, raw: dict[ElementKey, list[float]]) -> ElementCloud:
    return ElementCloud(location_id, {e: tuple(sorted(ws)) for e, ws in raw.items()})


def build_cloud(
    location: CandidateLocation,
    correspondences: Iterable[CorrespondenceRecord],
    config: Config,
) -> ElementCloud:
    members = set(location.members)
    raw: dict[ElementKey, list[float]] = {}
    for c in correspondences:
        if c.image_id in members and c.ini_score >= config.min_ini_score:
            raw.setdefault((c.x, c.y), []).append(smooth_score(c.ini_score, config.delta))
    return _freeze(location.location_id, raw)


@dataclass
class CloudBuild:
    clouds: list[ElementCloud]
    skipped_unlocated: int = 0
    dropped_low_score: int = 0


def build_clouds(
    locations: Sequence[CandidateLocation],
    correspondences: Iterable[CorrespondenceRecord],
    config: Config,
) -> CloudBuild:
    """Build every location's cloud in a single pass over the correspondences.

    Correspondences into images outside every location (e.g. cut by ``top_n``)
    are skipped and counted.
    """
    owner: dict[str, int] = {}
    for i, loc in enumerate(locations):
        for iid in loc.members:
            owner[iid] = i
    raw: list[dict[ElementKey, list[float]]] = [{} for _ in locations]
    skipped = dropped = 0
    min_score, delta2 = config.min_ini_score, config.delta * config.delta
    exp = math.exp
    last_image, bucket = None, None
    for c in correspondences:
        # records usually arrive grouped by image
        if c.image_id != last_image:
            last_image = c.image_id
            i = owner.get(last_image)
            bucket = None if i is None else raw[i]
        if bucket is None:
            skipped += 1
            continue
        s = c.ini_score
        if s < min_score:
            dropped += 1
            continue
        key = (c.x, c.y)
        ws = bucket.get(key)
        if ws is None:
            bucket[key] = [1.0 - exp(-(s * s) / delta2)]
        else:
            ws.append(1.0 - exp(-(s * s) / delta2))
    clouds = [_freeze(loc.location_id, r) for loc, r in zip(locations, raw)]
    return CloudBuild(clouds, skipped, dropped)


def write_cloud_dump(clouds: Iterable[ElementCloud], fh: TextIO) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["location_id", "element_x", "element_y", "m", "max_w"])
    for cloud in clouds:
        for (x, y), ws in sorted(cloud.entries.items()):
            writer.writerow([cloud.location_id, x, y, len(ws), repr(ws[-1])])
