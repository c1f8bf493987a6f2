"""Candidate cutoff and grouping of candidate images into per-query locations."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .core import Config, DataError, ImageMeta

EARTH_RADIUS_KM = 6371.0


def haversine_km(p1: tuple[float, float], p2: tuple[float, float]) -> float:
    lat1, lon1 = map(math.radians, p1)
    lat2, lon2 = map(math.radians, p2)
    h = math.sin((lat2 - lat1) / 2) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin((lon2 - lon1) / 2) ** 2
    return 2 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(h)))


@dataclass(frozen=True)
class CandidateLocation:
    """A candidate location and its image set.

    ``labels`` collects the labels of all members that carry one, so the
    label evaluation protocol also works on geo-clustered locations.
    """

    location_id: str
    members: tuple[str, ...]
    centroid: Optional[tuple[float, float]] = None
    label: Optional[str] = None
    labels: frozenset = frozenset()

    def __post_init__(self):
        if not self.members:
            raise ValueError(f"location {self.location_id} has no member images")


def select_candidates(ranked_images: Sequence[ImageMeta], top_n: int) -> list[ImageMeta]:
    return list(ranked_images[:top_n])


def _mean_point(images: Sequence[ImageMeta]) -> Optional[tuple[float, float]]:
    pts = [im.point for im in images if im.point is not None]
    if not pts:
        return None
    return (math.fsum(p[0] for p in pts) / len(pts), math.fsum(p[1] for p in pts) / len(pts))


def extract_locations_by_label(candidates: Sequence[ImageMeta]) -> list[CandidateLocation]:
    """One location per distinct label, in order of first appearance in the ranking."""
    groups: dict[str, list[ImageMeta]] = {}
    for im in candidates:
        if im.label is None:
            raise DataError(f"image {im.image_id} has no location label")
        groups.setdefault(im.label, []).append(im)
    return [
        CandidateLocation(
            location_id=label,
            members=tuple(im.image_id for im in ims),
            centroid=_mean_point(ims),
            label=label,
            labels=frozenset([label]),
        )
        for label, ims in groups.items()
    ]


def extract_locations_by_geo(candidates: Sequence[ImageMeta], cluster_radius_km: float) -> list[CandidateLocation]:
    """Greedy leader clustering in rank order.

    Each image joins the first cluster whose current centroid is within
    ``cluster_radius_km``, otherwise it founds a new cluster. Centroids are the
    arithmetic mean of member coordinates and are updated on every join.
    """
    clusters: list[list[ImageMeta]] = []
    sums: list[list[float]] = []
    for im in candidates:
        p = im.point
        if p is None:
            raise DataError(f"image {im.image_id} has no coordinates")
        for members, s in zip(clusters, sums):
            n = len(members)
            if haversine_km((s[0] / n, s[1] / n), p) <= cluster_radius_km:
                members.append(im)
                s[0] += p[0]
                s[1] += p[1]
                break
        else:
            clusters.append([im])
            sums.append([p[0], p[1]])

    width = max(4, len(str(len(clusters))))
    out = []
    for i, (members, s) in enumerate(zip(clusters, sums)):
        n = len(members)
        labels = frozenset(im.label for im in members if im.label is not None)
        out.append(
            CandidateLocation(
                location_id=f"g{i:0{width}d}",
                members=tuple(im.image_id for im in members),
                centroid=(s[0] / n, s[1] / n),
                labels=labels,
            )
        )
    return out


def extract_locations(candidates: Sequence[ImageMeta], config: Config) -> list[CandidateLocation]:
    mode = config.grouping
    if mode == "auto":
        mode = "label" if all(im.label is not None for im in candidates) else "geo"
    if mode == "label":
        return extract_locations_by_label(candidates)
    return extract_locations_by_geo(candidates, config.cluster_radius_km)
