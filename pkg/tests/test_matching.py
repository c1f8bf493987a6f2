import math
import random

import pytest

from dvem.cloud import ElementCloud
from dvem.core import Config, CorrespondenceRecord, ImageMeta
from dvem.distinctiveness import DistinctivenessMap, build_grid
from dvem.matching import LocationScore, rank_locations, score_location, select_region_maxima
from dvem.pipeline import QueryData, dvem_scores, run_query
from dvem.locations import extract_locations_by_label
from dvem.synth import generate, random_spec

from .helpers import HAND_SCORE_A, HAND_SCORE_B, hand_fixture


def test_region_maxima_direct():
    cl = ElementCloud("L", {(1, 1): (0.4, 0.9), (2, 2): (0.7,)})
    assert select_region_maxima(cl, build_grid(100, 100, 10)) == {(0, 0): ((1, 1), 0.9)}


def test_region_maxima_all_elements_when_b_zero():
    cl = ElementCloud("L", {(1, 1): (0.4,), (2, 2): (0.7,), (3, 3): (0.1,)})
    maxima = select_region_maxima(cl, build_grid(100, 100, 0))
    assert len(maxima) == 3


def test_region_maxima_tie_prefers_smaller_key():
    cl = ElementCloud("L", {(5, 1): (0.8,), (2, 7): (0.8,), (3, 3): (0.2,)})
    assert select_region_maxima(cl, build_grid(100, 100, 10))[(0, 0)] == ((2, 7), 0.8)


def dmap(weights):
    g = build_grid(100, 100, 0)
    return DistinctivenessMap(g, 4, {e: 1 for e in weights}, dict(weights))


def test_score_two_regions():
    maxima = {"r1": ((1, 1), 0.9), "r2": ((2, 2), 0.5)}
    s = score_location("L", maxima, dmap({(1, 1): math.log(4), (2, 2): math.log(2)}))
    assert s.score == pytest.approx(1.969857, abs=5e-7)
    # brute-force dot product of the two representation vectors
    rq = [math.log(4), math.log(2)]
    rg = [0.9 * math.log(4), 0.5 * math.log(2)]
    assert s.score == pytest.approx(sum(p * q for p, q in zip(rq, rg)), rel=1e-12)
    assert s.k == 2


def test_score_non_distinctive_is_zero():
    s = score_location("L", {"r1": ((1, 1), 0.9), "r2": ((2, 2), 0.5)}, dmap({(1, 1): 0.0, (2, 2): 0.0}))
    assert s.score == 0.0


def test_score_single_region_closed_form():
    N = 17
    s = score_location("L", {"r": ((1, 1), 1.0)}, dmap({(1, 1): math.log(N)}))
    assert s.score == pytest.approx(math.log(N) ** 2, rel=1e-15)


def test_rank_examples():
    a, b = LocationScore("A", 2.0, 1), LocationScore("B", 1.0, 1)
    assert [s.location_id for s in rank_locations([b, a])] == ["A", "B"]
    a, b = LocationScore("A", 1.0, 1, total_weight=3.2), LocationScore("B", 1.0, 1, total_weight=1.1)
    assert [s.location_id for s in rank_locations([b, a])] == ["A", "B"]
    c, d = LocationScore("D", 1.0, 1, total_weight=1.0), LocationScore("C", 1.0, 1, total_weight=1.0)
    assert [s.location_id for s in rank_locations([c, d])] == ["C", "D"]
    assert [s.location_id for s in rank_locations([a])] == ["A"]
    assert rank_locations([]) == []


def test_hand_fixture():
    res = run_query(hand_fixture(), Config(a=0, b=0, theta=5, delta=5.0))
    scores = {r.location_id: r.score for r in res.ranked}
    assert scores["A"] == pytest.approx(HAND_SCORE_A, rel=1e-12)
    assert scores["B"] == pytest.approx(HAND_SCORE_B, rel=1e-12)
    assert [r.location_id for r in res.ranked] == ["B", "A"]


def _scores(data, cfg):
    locs = extract_locations_by_label(data.images)
    return locs, dvem_scores(data.query, locs, data.correspondences, cfg)


@pytest.mark.parametrize("seed", range(40))
def test_score_is_sum_of_contributions(seed):
    data = generate(random_spec(seed))
    cfg = Config(a=[0, 10, 20][seed % 3], b=[0, 30, 20, 10][seed % 4], theta=random_spec(seed).theta)
    locs, scores = _scores(data, cfg)
    grid_cells = None if cfg.b == 0 else math.prod(build_grid(data.query.width, data.query.height, cfg.b).shape)
    for s in scores:
        assert s.score >= 0
        assert s.score == pytest.approx(sum(c.w_max * c.w_geo**2 for c in s.contributions), rel=1e-9, abs=1e-15)
        if grid_cells is not None:
            assert s.k <= grid_cells


@pytest.mark.parametrize("seed", range(40))
def test_log_base_scales_scores(seed):
    data = generate(random_spec(seed))
    theta = random_spec(seed).theta
    _, nat = _scores(data, Config(theta=theta, a=0))
    _, b2 = _scores(data, Config(theta=theta, a=0, log_base=2.0))
    by = {s.location_id: s.score for s in b2}
    for s in nat:
        assert by[s.location_id] == pytest.approx(s.score / math.log(2) ** 2, rel=1e-9, abs=1e-15)


def duplicate_image(data: QueryData, image_id: str) -> QueryData:
    src = next(im for im in data.images if im.image_id == image_id)
    dup_id = image_id + "-copy"
    last = max(im.retrieval_rank for im in data.images)
    dup = ImageMeta(src.query_id, dup_id, last + 1, src.retrieval_similarity, src.lat, src.lon, src.label)
    extra = tuple(
        CorrespondenceRecord(c.query_id, c.x, c.y, dup_id, c.ini_score)
        for c in data.correspondences
        if c.image_id == image_id
    )
    return QueryData(data.query, data.images + (dup,), data.correspondences + extra)


@pytest.mark.parametrize("seed", range(30))
def test_near_duplicate_leaves_score_unchanged(seed):
    data = generate(random_spec(seed))
    cfg = Config(theta=random_spec(seed).theta, a=[0, 10][seed % 2], b=[0, 20][seed % 2])
    rng = random.Random(seed)
    target = rng.choice(data.images).image_id
    before = {s.location_id: s.score for s in _scores(data, cfg)[1]}
    after = {s.location_id: s.score for s in _scores(duplicate_image(data, target), cfg)[1]}
    assert after == before


@pytest.mark.parametrize("seed", range(30))
def test_raising_one_score_is_local_and_monotone(seed):
    data = generate(random_spec(seed))
    if not data.correspondences:
        return
    cfg = Config(theta=random_spec(seed).theta, a=[0, 10][seed % 2])
    rng = random.Random(seed)
    i = rng.randrange(len(data.correspondences))
    bumped = list(data.correspondences)
    c = bumped[i]
    bumped[i] = CorrespondenceRecord(c.query_id, c.x, c.y, c.image_id, c.ini_score + rng.uniform(0.1, 10))
    owner = next(im.label for im in data.images if im.image_id == c.image_id)
    before = {s.location_id: s.score for s in _scores(data, cfg)[1]}
    after = {s.location_id: s.score for s in _scores(QueryData(data.query, data.images, tuple(bumped)), cfg)[1]}
    for lid in before:
        if lid == owner:
            assert after[lid] >= before[lid]
        else:
            assert after[lid] == before[lid]
