"""Brute-force re-derivation of location scores, for cross-checking the engine.

Deliberately naive and self-contained: nothing here is imported from the
engine modules, only the plain record types.
"""

from __future__ import annotations

import math
from typing import TYPE_CHECKING, Optional

from .core import Config

if TYPE_CHECKING:
    from .pipeline import QueryData


def _cell_side(w, h, param):
    if param == 0:
        return None
    side = int(min(w / param, h / param))
    return side if side >= 1 else 1


def _region(x, y, side):
    if side is None:
        return ("element", x, y)
    return ("cell", x // side, y // side)


def oracle_score(data: QueryData, config: Config, membership: Optional[dict] = None) -> dict[str, float]:
    """Score of every candidate location.

    ``membership`` maps location id to image ids; by default candidates are
    grouped by their label.
    """
    return {loc: s for loc, (s, _) in _score_all(data, config, membership).items()}


def oracle_rank(data: QueryData, config: Config, membership: Optional[dict] = None) -> list[str]:
    scored = _score_all(data, config, membership)
    remaining = list(scored)
    ranking = []
    while remaining:
        best = remaining[0]
        for loc in remaining[1:]:
            s, t = scored[loc]
            bs, bt = scored[best]
            if s > bs or (s == bs and (t > bt or (t == bt and loc < best))):
                best = loc
        ranking.append(best)
        remaining.remove(best)
    return ranking


def _score_all(data, config, membership):
    w, h = data.query.width, data.query.height
    ranked = sorted(data.images, key=lambda im: im.retrieval_rank)
    kept = ranked[: config.top_n]
    if membership is None:
        membership = {}
        for im in kept:
            membership.setdefault(im.label, []).append(im.image_id)
    n_total = len(membership)

    # (location, x, y, weight) for every surviving correspondence
    links = []
    for c in data.correspondences:
        if c.ini_score < config.min_ini_score:
            continue
        for loc, members in membership.items():
            if c.image_id in members:
                weight = 1.0 - math.exp(-(c.ini_score * c.ini_score) / (config.delta * config.delta))
                links.append((loc, c.x, c.y, weight))

    a_side = _cell_side(w, h, config.a)
    b_side = _cell_side(w, h, config.b)

    locations_in_region = {}
    for loc, x, y, _ in links:
        locations_in_region.setdefault(_region(x, y, a_side), set()).add(loc)

    def w_geo(x, y):
        n = len(locations_in_region[_region(x, y, a_side)])
        if n >= config.theta:
            return 0.0
        if config.log_base is None:
            return math.log(n_total / n)
        return math.log(n_total / n) / math.log(config.log_base)

    out = {}
    for loc in membership:
        best_weight = {}
        all_weights = []
        for l, x, y, wt in links:
            if l != loc:
                continue
            all_weights.append(wt)
            if (x, y) not in best_weight or wt > best_weight[(x, y)]:
                best_weight[(x, y)] = wt
        chosen = {}
        for (x, y) in sorted(best_weight):
            r = _region(x, y, b_side)
            if r not in chosen or best_weight[(x, y)] > chosen[r][2]:
                chosen[r] = (x, y, best_weight[(x, y)])
        terms = []
        for x, y, wt in chosen.values():
            g = w_geo(x, y)
            terms.append(wt * (g * g))
        out[loc] = (math.fsum(terms), math.fsum(all_weights))
    return out
