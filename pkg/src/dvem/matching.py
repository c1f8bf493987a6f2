"""Per-location matching: one strongest element per selection region, weighted by distinctiveness."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple

from .cloud import ElementCloud
from .core import ElementKey
from .distinctiveness import DistinctivenessMap, Region, RegionGrid


class Contribution(NamedTuple):
    region: Region
    element: ElementKey
    w_max: float
    w_geo: float

    @property
    def value(self) -> float:
        return self.w_max * (self.w_geo * self.w_geo)


@dataclass(frozen=True)
class LocationScore:
    location_id: str
    score: float
    k: int
    contributions: tuple[Contribution, ...] = ()
    total_weight: float = 0.0

    @property
    def tie_break_key(self) -> tuple[float, str]:
        return (self.total_weight, self.location_id)


def select_region_maxima(cloud: ElementCloud, grid: RegionGrid) -> dict[Region, tuple[ElementKey, float]]:
    """Strongest element of each selection region.

    Elements compete on their best weight; equal weights go to the smaller
    element key.
    """
    best: dict[Region, tuple[ElementKey, float]] = {}
    for e, ws in cloud.entries.items():
        w = ws[-1]
        r = grid.region_of(e)
        cur = best.get(r)
        if cur is None or w > cur[1] or (w == cur[1] and e < cur[0]):
            best[r] = (e, w)
    return best


def score_location(
    location_id: str,
    maxima: dict[Region, tuple[ElementKey, float]],
    distinct: DistinctivenessMap,
    total_weight: float = 0.0,
) -> LocationScore:
    weights, region_of = distinct.weights, distinct.grid.region_of
    contributions = tuple(
        [Contribution(r, e, w, weights[region_of(e)]) for r, (e, w) in sorted(maxima.items())]
    )
    score = math.fsum([w * (g * g) for _, _, w, g in contributions])
    return LocationScore(location_id, score, len(contributions), contributions, total_weight)


def rank_locations(scores: Iterable[LocationScore]) -> list[LocationScore]:
    """Descending score; ties go to the larger total weight, then the smaller location_id."""
    return sorted(scores, key=lambda s: (-s.score, -s.total_weight, s.location_id))


def score_clouds(clouds: list[ElementCloud], selection_grid: RegionGrid, distinct: DistinctivenessMap) -> list[LocationScore]:
    return [
        score_location(c.location_id, select_region_maxima(c, selection_grid), distinct, c.total_weight())
        for c in clouds
    ]
