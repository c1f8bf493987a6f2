"""Seeded synthetic query scenarios at correspondence level.

A scenario is one query with a ranked candidate list grouped into labelled
locations. Three kinds of query elements are planted:

* distinctive elements link only to the true location;
* confusing elements link to at least ``theta`` locations, like street
  furniture or vans seen all over a city;
* noise elements link to a few (fewer than ``theta``) random locations.

A decoy location can soak up every confusing element in every one of its
images and be padded with near-duplicate images, which is the situation where
summing image similarities goes wrong.
"""

from __future__ import annotations

import dataclasses
import random
from dataclasses import dataclass
from typing import Optional

from .core import Config, CorrespondenceRecord, DataError, ImageMeta, QueryMeta
from .pipeline import QueryData


@dataclass(frozen=True)
class ScenarioSpec:
    seed: int = 0
    n_locations: int = 8
    images_per_location: tuple[int, int] = (2, 5)
    true_location_id: Optional[str] = None
    n_distinctive_elements: int = 6
    n_confusing_elements: int = 4
    n_noise_elements: int = 6
    theta: int = 5
    score_range: tuple[float, float] = (0.0, 20.0)
    confusing_score_range: Optional[tuple[float, float]] = None
    score_mode: str = "continuous"
    match_prob: float = 0.6
    frame: tuple[int, int] = (640, 480)
    decoy_location_id: Optional[str] = None
    near_duplicates: int = 0
    geo: bool = False
    query_id: Optional[str] = None

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioSpec":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise DataError(f"unknown scenario keys: {sorted(unknown)}")
        d = {k: tuple(v) if isinstance(v, list) else v for k, v in d.items()}
        return cls(**d)

    def location_ids(self) -> list[str]:
        return [f"loc{i:02d}" for i in range(self.n_locations)]

    def check(self) -> None:
        w, h = self.frame
        reasons = []
        if self.n_locations < 1:
            reasons.append("need at least one location")
        lo, hi = self.images_per_location
        if not 1 <= lo <= hi:
            reasons.append(f"images_per_location must satisfy 1 <= lo <= hi, got {self.images_per_location}")
        if self.n_confusing_elements and self.theta > self.n_locations:
            reasons.append(
                f"confusing elements need theta={self.theta} locations but only {self.n_locations} exist"
            )
        if self.theta < 1:
            reasons.append("theta must be >= 1")
        n_elements = self.n_distinctive_elements + self.n_confusing_elements + self.n_noise_elements
        if n_elements > w * h:
            reasons.append(f"{n_elements} elements do not fit in a {w}x{h} frame")
        ids = self.location_ids()
        for name in ("true_location_id", "decoy_location_id"):
            v = getattr(self, name)
            if v is not None and v not in ids:
                reasons.append(f"{name}={v!r} is not one of the generated locations")
        if self.decoy_location_id is not None and self.decoy_location_id == self.true_location_id:
            reasons.append("decoy and true location must differ")
        if self.near_duplicates and self.decoy_location_id is None:
            reasons.append("near_duplicates needs a decoy_location_id")
        if self.score_mode not in ("continuous", "integer", "saturated"):
            reasons.append(f"unknown score_mode {self.score_mode!r}")
        if not 0 < self.match_prob <= 1:
            reasons.append("match_prob must be in (0, 1]")
        if reasons:
            raise DataError("infeasible scenario: " + "; ".join(reasons))


def _draw_score(rng: random.Random, lo: float, hi: float, mode: str) -> float:
    if mode == "integer":
        return float(rng.randint(int(lo), int(hi)))
    if mode == "saturated":
        return rng.choice([0.0, float(hi)])
    return round(rng.uniform(lo, hi), 6)


def generate(spec: ScenarioSpec) -> QueryData:
    spec.check()
    rng = random.Random(spec.seed)
    qid = spec.query_id or f"q{spec.seed:05d}"
    w, h = spec.frame
    locs = spec.location_ids()
    true_loc = spec.true_location_id or (
        rng.choice([l for l in locs if l != spec.decoy_location_id]) if len(locs) > 1 else locs[0]
    )

    images: dict[str, list[str]] = {}
    for loc in locs:
        n = rng.randint(*spec.images_per_location)
        images[loc] = [f"{qid}-{loc}-{j:02d}" for j in range(n)]

    n_el = spec.n_distinctive_elements + spec.n_confusing_elements + spec.n_noise_elements
    pixels = rng.sample(range(w * h), n_el)
    elements = [(p % w, p // w) for p in pixels]
    distinctive = elements[: spec.n_distinctive_elements]
    confusing = elements[spec.n_distinctive_elements : spec.n_distinctive_elements + spec.n_confusing_elements]
    noise = elements[spec.n_distinctive_elements + spec.n_confusing_elements :]

    lo, hi = spec.score_range
    clo, chi = spec.confusing_score_range or spec.score_range
    corr: list[tuple[str, tuple[int, int], float]] = []

    def link(e, loc, every_image=False, score_range=(lo, hi)):
        ims = images[loc]
        chosen = [im for im in ims if every_image or rng.random() < spec.match_prob]
        if not chosen:
            chosen = [rng.choice(ims)]
        for im in chosen:
            corr.append((im, e, _draw_score(rng, *score_range, spec.score_mode)))

    for e in distinctive:
        link(e, true_loc)
    for e in confusing:
        spread = rng.randint(spec.theta, spec.n_locations)
        targets = rng.sample(locs, spread)
        if spec.decoy_location_id is not None and spec.decoy_location_id not in targets:
            targets[rng.randrange(len(targets))] = spec.decoy_location_id
        for loc in sorted(targets):
            is_decoy = loc == spec.decoy_location_id
            link(e, loc, every_image=is_decoy, score_range=(clo, chi) if is_decoy else (lo, hi))
    for e in noise:
        spread = rng.randint(1, max(1, min(spec.theta - 1, spec.n_locations)))
        for loc in sorted(rng.sample(locs, spread)):
            link(e, loc)

    if spec.near_duplicates:
        decoy_imgs = images[spec.decoy_location_id]
        src = decoy_imgs[0]
        src_corr = [(e, s) for im, e, s in corr if im == src]
        for d in range(spec.near_duplicates):
            dup = f"{src}-dup{d:02d}"
            decoy_imgs.append(dup)
            corr.extend((dup, e, s) for e, s in src_corr)

    sim: dict[str, float] = {}
    for im, _, s in corr:
        sim[im] = sim.get(im, 0.0) + s
    loc_of = {im: loc for loc, ims in images.items() for im in ims}
    centers = {}
    if spec.geo:
        for i, loc in enumerate(locs):
            centers[loc] = (-60.0 + 120.0 * rng.random(), -170.0 + 340.0 * rng.random())
    order = sorted(loc_of, key=lambda im: (-round(sim.get(im, 0.0), 9), im))

    metas = []
    for rank, im in enumerate(order, start=1):
        loc = loc_of[im]
        lat = lon = None
        if spec.geo:
            # within ~100 m of the location centre
            lat = round(centers[loc][0] + rng.uniform(-0.0005, 0.0005), 7)
            lon = round(centers[loc][1] + rng.uniform(-0.0005, 0.0005), 7)
        metas.append(ImageMeta(qid, im, rank, round(sim.get(im, 0.0), 6), lat, lon, loc))

    truth_lat = truth_lon = None
    if spec.geo:
        truth_lat, truth_lon = centers[true_loc]
    query = QueryMeta(qid, w, h, true_loc, truth_lat, truth_lon)
    records = tuple(
        CorrespondenceRecord(qid, e[0], e[1], im, s) for im, e, s in sorted(corr, key=lambda t: (t[0], t[1]))
    )
    return QueryData(query, tuple(metas), records)


def discrimination_spec(seed: int = 0) -> ScenarioSpec:
    """Confusing common elements concentrated in a decoy padded with near-duplicates.

    Use with the geo-unconstrained profile (per-element distinctiveness,
    theta 6).
    """
    return ScenarioSpec(
        seed=seed,
        n_locations=10,
        images_per_location=(3, 5),
        true_location_id="loc03",
        decoy_location_id="loc07",
        n_distinctive_elements=8,
        n_confusing_elements=12,
        n_noise_elements=0,
        theta=6,
        score_range=(4.0, 12.0),
        confusing_score_range=(15.0, 25.0),
        near_duplicates=6,
        query_id=f"disc{seed:03d}",
    )


DISCRIMINATION_SEEDS = tuple(range(10))


def discrimination_fixture() -> list[QueryData]:
    return [generate(discrimination_spec(s)) for s in DISCRIMINATION_SEEDS]


def random_spec(seed: int) -> ScenarioSpec:
    """Draw a varied desk-scale scenario (<= 20 locations, a few hundred correspondences)."""
    rng = random.Random(10_000 + seed)
    n_locations = rng.randint(1, 20)
    theta = rng.randint(2, 6)
    has_decoy = n_locations >= 2 and rng.random() < 0.3
    locs = [f"loc{i:02d}" for i in range(n_locations)]
    decoy = true = None
    if has_decoy:
        true, decoy = rng.sample(locs, 2)
    return ScenarioSpec(
        seed=seed,
        n_locations=n_locations,
        images_per_location=(1, rng.randint(1, 8)),
        true_location_id=true,
        decoy_location_id=decoy,
        n_distinctive_elements=rng.randint(0, 12),
        n_confusing_elements=rng.randint(0, 4) if theta <= n_locations else 0,
        n_noise_elements=rng.randint(0, 12),
        theta=theta,
        score_mode=rng.choice(["continuous", "continuous", "integer", "saturated"]),
        match_prob=rng.choice([0.3, 0.6, 1.0]),
        frame=rng.choice([(640, 480), (480, 640), (100, 100), (37, 23)]),
        near_duplicates=rng.randint(0, 2) if has_decoy else 0,
    )


def random_config(seed: int, theta: int) -> Config:
    rng = random.Random(20_000 + seed)
    return Config(
        a=rng.choice([0, 10, 20, 30]),
        b=rng.choice([0, 10, 20, 30]),
        theta=theta,
        delta=rng.choice([1.0, 5.0]),
        min_ini_score=rng.choice([0.0, 0.0, 4.0]),
        top_n=rng.choice([1000, 1000, 10]),
        log_base=rng.choice([None, None, 2.0, 10.0]),
        grouping="label",
    )
