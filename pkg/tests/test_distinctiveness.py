import dataclasses
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dvem.cloud import ElementCloud, build_clouds
from dvem.core import Config
from dvem.distinctiveness import (
    build_distinctiveness,
    build_grid,
    count_region_locations,
    geo_weight,
    write_heatmap,
)
from dvem.locations import extract_locations_by_label
from dvem.synth import generate, random_spec


def test_grid_ragged():
    g = build_grid(640, 480, 10)
    assert g.cell == 48
    assert g.shape == (14, 10)
    # last column covers x in [624, 640): 16 px wide
    assert g.region_of((623, 0)) == (12, 0)
    assert g.region_of((639, 479)) == (13, 9)


def test_grid_exact():
    g = build_grid(100, 100, 10)
    assert g.cell == 10 and g.shape == (10, 10)


def test_grid_per_element():
    g = build_grid(640, 480, 0)
    assert g.per_element and g.shape is None
    assert g.region_of((3, 4)) != g.region_of((3, 5))


def test_grid_floor_to_one_pixel():
    g = build_grid(5, 3, 10)
    assert g.cell == 1 and g.shape == (5, 3)


@given(st.integers(1, 2000), st.integers(1, 2000), st.integers(1, 60))
def test_grid_tiles_frame(w, h, param):
    g = build_grid(w, h, param)
    assert g.cell == max(1, math.floor(min(w / param, h / param)))
    cols, rows = g.shape
    # every in-frame pixel lands in exactly one valid cell; corners included
    for x, y in [(0, 0), (w - 1, 0), (0, h - 1), (w - 1, h - 1), (w // 2, h // 2)]:
        cx, cy = g.region_of((x, y))
        assert 0 <= cx < cols and 0 <= cy < rows
    assert (cols - 1) * g.cell < w <= cols * g.cell
    assert (rows - 1) * g.cell < h <= rows * g.cell


def cloud(lid, *elements):
    return ElementCloud(lid, {e: (1.0,) for e in elements})


def test_count_single_element():
    g = build_grid(100, 100, 10)
    clouds = [cloud("A", (5, 5)), cloud("B", (6, 6)), cloud("C", (1, 1)), cloud("D", (55, 55)), cloud("E")]
    assert count_region_locations(g, clouds)[(0, 0)] == 3


def test_count_is_union_over_region():
    g = build_grid(100, 100, 10)
    clouds = [cloud("A", (1, 1)), cloud("B", (1, 1)), cloud("C", (8, 8)), cloud("D", (8, 8))]
    assert count_region_locations(g, clouds) == {(0, 0): 4}
    # a location with both elements counts once
    assert count_region_locations(g, [cloud("A", (1, 1), (8, 8))]) == {(0, 0): 1}


def test_count_empty_region_absent():
    g = build_grid(100, 100, 10)
    counts = count_region_locations(g, [cloud("A", (1, 1))])
    assert (5, 5) not in counts


def brute_counts(grid, clouds):
    """Enumerate every cell and every location."""
    out = {}
    cols, rows = grid.shape
    for cx in range(cols):
        for cy in range(rows):
            n = 0
            for c in clouds:
                if any(x // grid.cell == cx and y // grid.cell == cy for (x, y) in c.entries):
                    n += 1
            if n:
                out[(cx, cy)] = n
    return out


@pytest.mark.parametrize("seed", range(15))
@pytest.mark.parametrize("a", [10, 20, 30])
def test_counts_match_brute_force(seed, a):
    data = generate(random_spec(seed))
    locs = extract_locations_by_label(data.images)
    clouds = build_clouds(locs, data.correspondences, Config()).clouds
    g = build_grid(data.query.width, data.query.height, a)
    counts = count_region_locations(g, clouds)
    assert counts == brute_counts(g, clouds)
    assert all(1 <= n <= len(locs) for n in counts.values())


def test_geo_weight_examples():
    assert geo_weight(1, 100, 5) == pytest.approx(4.60517, abs=5e-6)
    assert geo_weight(1, 100, 5) == pytest.approx(math.log(100), abs=1e-12)
    assert geo_weight(5, 10, 5) == 0.0
    assert geo_weight(7, 7, 8) == 0.0


def test_geo_weight_rejects_zero_count():
    with pytest.raises(ValueError):
        geo_weight(0, 10, 5)


counts_n = st.integers(1, 60).flatmap(lambda N: st.tuples(st.just(N), st.integers(1, N), st.integers(1, N), st.integers(1, 10)))


@given(counts_n)
def test_geo_weight_monotone_and_cutoff(t):
    N, n1, n2, theta = t
    lo, hi = sorted((n1, n2))
    assert geo_weight(lo, N, theta) >= geo_weight(hi, N, theta) >= 0.0
    assert (geo_weight(n1, N, theta) == 0.0) == (n1 >= theta or n1 == N)


# only counts below both N and theta carry weight
weighted = st.integers(2, 60).flatmap(
    lambda N: st.integers(1, N - 1).flatmap(lambda n: st.tuples(st.just(N), st.just(n), st.integers(n + 1, n + 10)))
)


@given(weighted, st.sampled_from([2.0, 10.0, 0.5]))
def test_log_base_scales_weights(t, base):
    N, n, theta = t
    ratio = geo_weight(n, N, theta, base) / geo_weight(n, N, theta)
    assert ratio == pytest.approx(1 / math.log(base), rel=1e-12)


# 640x480: a=10 -> 48 px, a=20 -> 24 px, a=30 -> 16 px; a=0 nests in everything
NESTED = [(0, 30), (0, 20), (0, 10), (30, 10), (20, 10)]


@pytest.mark.parametrize("seed", range(25))
@pytest.mark.parametrize("fine, coarse", NESTED)
def test_coarser_grid_never_raises_weight(seed, fine, coarse):
    spec = random_spec(seed)
    data = generate(dataclasses.replace(spec, frame=(640, 480)))
    locs = extract_locations_by_label(data.images)
    clouds = build_clouds(locs, data.correspondences, Config()).clouds
    f = build_distinctiveness(build_grid(640, 480, fine), clouds, spec.theta)
    c = build_distinctiveness(build_grid(640, 480, coarse), clouds, spec.theta)
    for cl in clouds:
        for e in cl.entries:
            assert c.counts[c.grid.region_of(e)] >= f.counts[f.grid.region_of(e)]
            assert c.weight_of(e) <= f.weight_of(e)


def test_heatmap(tmp_path):
    g = build_grid(100, 100, 10)
    dmap = build_distinctiveness(g, [cloud("A", (1, 1)), cloud("B", (1, 1), (55, 5))], theta=5)
    path = tmp_path / "heat.csv"
    with open(path, "w") as fh:
        write_heatmap(dmap, fh)
    assert path.read_text().splitlines() == [
        "region_x,region_y,n_r,w_geo",
        "0,0,2,0.0",
        f"5,0,1,{math.log(2)!r}",
    ]
