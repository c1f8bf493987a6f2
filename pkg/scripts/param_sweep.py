"""HR@1 of the three rankers over a grid of (a, b, theta) on random scenarios.

Writes one CSV row per setting and method.
"""

import argparse
import csv
import itertools
import sys

from dvem.core import Config
from dvem.evaluation import EvalConfig
from dvem.pipeline import METHODS, run_pipeline
from dvem.synth import generate, random_spec


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--scenarios", type=int, default=200)
    parser.add_argument("--a", type=int, nargs="+", default=[0, 10, 20, 30])
    parser.add_argument("--b", type=int, nargs="+", default=[0, 10, 20, 30])
    parser.add_argument("--theta", type=int, nargs="+", default=[3, 5, 6])
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--out", type=argparse.FileType("w"), default=sys.stdout)
    args = parser.parse_args()

    data = [generate(random_spec(s)) for s in range(args.scenarios)]
    ev = EvalConfig(k_values=(1, 5))
    writer = csv.writer(args.out, lineterminator="\n")
    writer.writerow(["a", "b", "theta", "method", "hr1", "hr5"])
    for a, b, theta in itertools.product(args.a, args.b, args.theta):
        cfg = Config(a=a, b=b, theta=theta, grouping="label")
        methods = METHODS if (a, b, theta) == (args.a[0], args.b[0], args.theta[0]) else ("dvem",)
        for method in methods:
            _, rep = run_pipeline(data, method, cfg, ev, workers=args.workers)
            writer.writerow([a, b, theta, method, f"{rep.hit_rates[1]:.4f}", f"{rep.hit_rates[5]:.4f}"])


if __name__ == "__main__":
    main()
