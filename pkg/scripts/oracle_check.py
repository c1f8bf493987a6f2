"""Compare engine scores and rankings with the brute-force oracle on random scenarios."""

import argparse
import math
import time

from dvem.oracle import oracle_rank, oracle_score
from dvem.pipeline import run_query
from dvem.synth import generate, random_config, random_spec


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--scenarios", type=int, default=1000)
    parser.add_argument("--first-seed", type=int, default=0)
    args = parser.parse_args()

    t0 = time.perf_counter()
    mismatches = []
    worst = 0.0
    for seed in range(args.first_seed, args.first_seed + args.scenarios):
        spec = random_spec(seed)
        data = generate(spec)
        cfg = random_config(seed, spec.theta)
        ranked = run_query(data, cfg).ranked
        expected = oracle_score(data, cfg)
        for r in ranked:
            if expected[r.location_id]:
                worst = max(worst, abs(r.score - expected[r.location_id]) / abs(expected[r.location_id]))
        same_scores = all(math.isclose(r.score, expected[r.location_id], rel_tol=1e-9) for r in ranked)
        if not same_scores or [r.location_id for r in ranked] != oracle_rank(data, cfg):
            mismatches.append(seed)
    print(f"{args.scenarios} scenarios in {time.perf_counter() - t0:.1f} s")
    print(f"worst relative score difference {worst:.2e}")
    print(f"mismatching seeds: {mismatches or 'none'}")
    return 1 if mismatches else 0


if __name__ == "__main__":
    raise SystemExit(main())
