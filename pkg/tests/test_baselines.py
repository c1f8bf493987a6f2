import pytest

from dvem.core import Config, DataError, ImageMeta
from dvem.locations import CandidateLocation, extract_locations_by_label
from dvem.baselines import gvr, visnn
from dvem.pipeline import run_query
from dvem.synth import ScenarioSpec, generate


def images(*spec):
    return [ImageMeta("q", iid, rank, sim, label=label) for iid, rank, sim, label in spec]


CANDS = images(("b1", 1, 1.0, "B"), ("a1", 2, 2.0, "A"), ("a2", 3, 1.0, "A"), ("b2", 4, 1.5, "B"), ("c1", 5, 0.5, "C"))


def test_visnn_orders_by_best_member_rank():
    res = visnn(CANDS, extract_locations_by_label(CANDS))
    assert [lid for lid, _ in res.ranked] == ["B", "A", "C"]
    assert [s for _, s in res.ranked] == [1.0, 0.5, 0.2]
    assert res.top1 == "B"


def test_gvr_sums_similarity():
    res = gvr(CANDS, extract_locations_by_label(CANDS))
    assert res.ranked == (("A", 3.0), ("B", 2.5), ("C", 0.5))


def test_gvr_duplicate_adds_its_similarity():
    locs = extract_locations_by_label(CANDS)
    dup = CANDS + [ImageMeta("q", "a1-copy", 6, 1.0, label="A")]
    before = dict(gvr(CANDS, locs).ranked)
    after = dict(gvr(dup, extract_locations_by_label(dup)).ranked)
    assert after["A"] == before["A"] + 1.0
    assert after["B"] == before["B"]


def test_gvr_ties_break_on_location_id():
    cands = images(("x", 1, 1.0, "Z"), ("y", 2, 1.0, "Y"))
    assert [lid for lid, _ in gvr(cands, extract_locations_by_label(cands)).ranked] == ["Y", "Z"]


def test_gvr_needs_similarity():
    cands = [ImageMeta("q", "x", 1, None, label="Z")]
    with pytest.raises(DataError, match="x"):
        gvr(cands, extract_locations_by_label(cands))


def test_empty_inputs():
    assert visnn([], []).ranked == () and visnn([], []).top1 is None
    assert gvr([], []).ranked == ()


def test_members_outside_candidates_ignored():
    loc = CandidateLocation("A", ("a1", "gone"))
    assert visnn(images(("a1", 3, 1.0, "A")), [loc]).ranked == (("A", 1 / 3),)


@pytest.mark.parametrize("seed", range(10))
def test_single_location_all_methods_agree(seed):
    data = generate(ScenarioSpec(seed=seed, n_locations=1, theta=1, n_confusing_elements=0))
    tops = {m: run_query(data, Config(theta=1), m).estimate for m in ("dvem", "gvr", "visnn")}
    assert {t.location_id for t in tops.values()} == {"loc00"}
