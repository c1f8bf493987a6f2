"""Query-frame region grids and per-region geo-distinctiveness weights."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Optional, TextIO

from .cloud import ElementCloud
from .core import ElementKey

Region = Hashable


@dataclass(frozen=True)
class RegionGrid:
    """Non-overlapping square tiles anchored at the top-left of a w x h frame.

    ``param == 0`` is the per-element grid: every element is its own region
    and ``cell`` is unused. Otherwise the cell side is
    ``floor(min(w / param, h / param))`` clamped to one pixel; right and
    bottom tiles may be narrower.
    """

    width: int
    height: int
    param: int
    cell: int = 0

    @property
    def per_element(self) -> bool:
        return self.param == 0

    @property
    def shape(self) -> Optional[tuple[int, int]]:
        """(columns, rows), or None for the per-element grid."""
        if self.per_element:
            return None
        return (-(-self.width // self.cell), -(-self.height // self.cell))

    def region_of(self, e: ElementKey) -> Region:
        if self.param == 0:
            return e
        return (e[0] // self.cell, e[1] // self.cell)


def build_grid(w: int, h: int, param: int) -> RegionGrid:
    if w < 1 or h < 1:
        raise ValueError(f"frame must be at least 1x1, got {w}x{h}")
    if param < 0:
        raise ValueError(f"grid parameter must be >= 0, got {param}")
    if param == 0:
        return RegionGrid(w, h, 0)
    return RegionGrid(w, h, param, max(1, math.floor(min(w / param, h / param))))


def count_region_locations(grid: RegionGrid, clouds: Iterable[ElementCloud]) -> dict[Region, int]:
    """Number of locations with at least one element in each region.

    A location counts once per region no matter how many of its elements fall
    there. Regions without any element are absent.
    """
    counts: dict[Region, int] = {}
    for cloud in clouds:
        for r in {grid.region_of(e) for e in cloud.entries}:
            counts[r] = counts.get(r, 0) + 1
    return counts


def geo_weight(n_r: int, N: int, theta: int, log_base: Optional[float] = None) -> float:
    if n_r < 1:
        raise ValueError("region has no matched location; every linked element has n(r) >= 1")
    if n_r >= theta:
        return 0.0
    if log_base is None:
        return math.log(N / n_r)
    return math.log(N / n_r) / math.log(log_base)


@dataclass(frozen=True)
class DistinctivenessMap:
    grid: RegionGrid
    n_locations: int
    counts: dict[Region, int] = field(default_factory=dict)
    weights: dict[Region, float] = field(default_factory=dict)

    def weight_of(self, e: ElementKey) -> float:
        return self.weights[self.grid.region_of(e)]


def build_distinctiveness(
    grid: RegionGrid,
    clouds: list[ElementCloud],
    theta: int,
    log_base: Optional[float] = None,
    n_locations: Optional[int] = None,
) -> DistinctivenessMap:
    """Weights for every populated region; ``n_locations`` defaults to ``len(clouds)``."""
    N = len(clouds) if n_locations is None else n_locations
    counts = count_region_locations(grid, clouds)
    weights = {r: geo_weight(n, N, theta, log_base) for r, n in counts.items()}
    return DistinctivenessMap(grid, N, counts, weights)


def write_heatmap(dmap: DistinctivenessMap, fh: TextIO) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["region_x", "region_y", "n_r", "w_geo"])
    for r in sorted(dmap.counts):
        writer.writerow([r[0], r[1], dmap.counts[r], repr(dmap.weights[r])])
