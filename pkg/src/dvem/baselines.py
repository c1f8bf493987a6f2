"""Reference rankers: nearest-neighbour propagation (VisNN) and summed similarity (GVR)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .core import DataError, ImageMeta
from .locations import CandidateLocation


@dataclass(frozen=True)
class BaselineResult:
    method: str
    ranked: tuple[tuple[str, float], ...]

    @property
    def top1(self):
        return self.ranked[0][0] if self.ranked else None


def visnn(candidates: Sequence[ImageMeta], locations: Sequence[CandidateLocation]) -> BaselineResult:
    """Location of the best-ranked image first; other locations follow by their best member rank.

    Only the top-1 is the classic 1-NN prediction. The score reported is
    ``1 / best_rank`` so it sorts like the ranking.
    """
    rank_of = {im.image_id: im.retrieval_rank for im in candidates}
    best = []
    for loc in locations:
        ranks = [rank_of[i] for i in loc.members if i in rank_of]
        if ranks:
            best.append((min(ranks), loc.location_id))
    best.sort()
    return BaselineResult("visnn", tuple((lid, 1.0 / r) for r, lid in best))


def gvr(candidates: Sequence[ImageMeta], locations: Sequence[CandidateLocation]) -> BaselineResult:
    """Each location scores the summed retrieval similarity of its images."""
    sim = {}
    for im in candidates:
        if im.retrieval_similarity is None:
            raise DataError(f"image {im.image_id} has no retrieval_similarity")
        sim[im.image_id] = im.retrieval_similarity
    scored = [(math.fsum(sim[i] for i in loc.members), loc.location_id) for loc in locations]
    scored.sort(key=lambda t: (-t[0], t[1]))
    return BaselineResult("gvr", tuple((lid, s) for s, lid in scored))
