"""Time the scoring stage on a 1000-candidate, 20-location synthetic query."""

import argparse
import statistics
import timeit

from dvem.core import Config
from dvem.locations import extract_locations, select_candidates
from dvem.pipeline import dvem_scores
from dvem.synth import ScenarioSpec, generate


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=51)
    parser.add_argument("--match-prob", type=float, default=0.15)
    parser.add_argument("--noise", type=int, default=200)
    parser.add_argument("--a", type=int, default=10)
    parser.add_argument("--b", type=int, default=20)
    args = parser.parse_args()

    spec = ScenarioSpec(
        seed=7,
        n_locations=20,
        images_per_location=(50, 50),
        n_distinctive_elements=60,
        n_confusing_elements=40,
        n_noise_elements=args.noise,
        theta=5,
        match_prob=args.match_prob,
    )
    data = generate(spec)
    cfg = Config(a=args.a, b=args.b, grouping="label")
    locations = extract_locations(select_candidates(data.images, cfg.top_n), cfg)
    dvem_scores(data.query, locations, data.correspondences, cfg)

    runs = timeit.repeat(
        lambda: dvem_scores(data.query, locations, data.correspondences, cfg), number=1, repeat=args.repeats
    )
    times = [t * 1e3 for t in runs]
    print(f"{len(data.images)} candidates, {len(locations)} locations, {len(data.correspondences)} correspondences")
    print(f"median {statistics.median(times):.2f} ms  min {min(times):.2f} ms  max {max(times):.2f} ms")


if __name__ == "__main__":
    main()
