"""Rank the shipped decoy scenario with every method and print top-1 per query.

The decoy location shares many high-scoring but common elements with the
query and is padded with near-duplicate images, so summed similarity favours
it while distinctiveness weighting does not.
"""

import argparse

from dvem.core import Config
from dvem.evaluation import EvalConfig
from dvem.pipeline import METHODS, run_pipeline
from dvem.synth import DISCRIMINATION_SEEDS, discrimination_spec, generate


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--seeds", type=int, nargs="+", default=list(DISCRIMINATION_SEEDS))
    parser.add_argument("--profile", default="geo-unconstrained")
    args = parser.parse_args()

    data = [generate(discrimination_spec(s)) for s in args.seeds]
    cfg = Config.from_profile(args.profile)
    ev = EvalConfig(k_values=(1, 3))
    outcome = {}
    for method in METHODS:
        results, rep = run_pipeline(data, method, cfg, ev)
        outcome[method] = [r.estimate.location_id for r in results]
        print(f"{method:6s} HR@1={rep.hit_rates[1]:.2f} HR@3={rep.hit_rates[3]:.2f}")

    print()
    print("query    truth  " + "  ".join(f"{m:6s}" for m in METHODS))
    for i, d in enumerate(data):
        print(f"{d.query_id:8s} {d.query.truth_label:6s} " + "  ".join(f"{outcome[m][i]:6s}" for m in METHODS))


if __name__ == "__main__":
    main()
