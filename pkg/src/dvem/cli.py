"""Command-line entry point: ``dvem <command> ...``.

Exit codes: 0 success, 2 usage error, 3 data/validation error, 4 config
error, 5 oracle disagreement.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

import yaml

from . import io
from .core import PROFILES, ConfigError, DataError, validate_dataset
from .evaluation import evaluate
from .locations import extract_locations, select_candidates
from .oracle import oracle_rank, oracle_score
from .pipeline import METHODS, dvem_scores, run_all
from .synth import ScenarioSpec, discrimination_spec, generate

log = logging.getLogger("dvem")

EXIT_DATA, EXIT_CONFIG, EXIT_MISMATCH = 3, 4, 5


def _add_data_args(p):
    p.add_argument("--data", type=Path, help="directory holding queries/images/correspondences .jsonl")
    p.add_argument("--queries", type=Path)
    p.add_argument("--images", type=Path)
    p.add_argument("--correspondences", type=Path)


def _add_config_args(p):
    p.add_argument("--config", type=Path, help="YAML config file")
    p.add_argument("--profile", choices=sorted(PROFILES))
    p.add_argument("--a", type=int)
    p.add_argument("--b", type=int)
    p.add_argument("--theta", type=int)
    p.add_argument("--delta", type=float)
    p.add_argument("--top-n", type=int)
    p.add_argument("--min-ini-score", type=float)
    p.add_argument("--cluster-radius-km", type=float)
    p.add_argument("--log-base", type=float)
    p.add_argument("--grouping", choices=["label", "geo", "auto"])
    p.add_argument("--protocol", choices=["label", "radius"])
    p.add_argument("--r-eval-km", type=float)
    p.add_argument("--k", dest="k_values", type=int, nargs="+")


def _paths(args) -> io.DatasetPaths:
    if args.data is not None:
        base = io.DatasetPaths.in_dir(args.data)
    elif None in (args.queries, args.images, args.correspondences):
        raise ConfigError("give --data DIR or all of --queries, --images, --correspondences")
    else:
        base = io.DatasetPaths(args.queries, args.images, args.correspondences)
    return io.DatasetPaths(
        args.queries or base.queries, args.images or base.images, args.correspondences or base.correspondences
    )


def _configs(args):
    keys = (
        "a", "b", "theta", "delta", "top_n", "min_ini_score", "cluster_radius_km",
        "log_base", "grouping", "protocol", "r_eval_km", "k_values",
    )
    overrides = {k: getattr(args, k, None) for k in keys}
    return io.load_config(args.config, args.profile, **overrides)


def _open_out(path):
    if path is None or str(path) == "-":
        return sys.stdout, False
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    return open(path, "w", encoding="utf-8"), True


def cmd_validate(args) -> int:
    paths = _paths(args)
    queries = [io.parse_query(o, f"{paths.queries}:{n}") for n, o in io._lines(paths.queries)]
    images = [io.parse_image(o, f"{paths.images}:{n}") for n, o in io._lines(paths.images)]
    corr = [io.parse_correspondence(o, f"{paths.correspondences}:{n}") for n, o in io._lines(paths.correspondences)]
    report = validate_dataset(queries, images, corr)
    print(report)
    print(f"{len(queries)} queries, {len(images)} ranked images, {len(corr)} correspondences")
    return 0 if report.accepted else EXIT_DATA


def cmd_cluster(args) -> int:
    config, _ = _configs(args)
    fh, close = _open_out(args.out)
    try:
        for data in io.stream(_paths(args)):
            for loc in extract_locations(select_candidates(data.images, config.top_n), config):
                fh.write(io._dumps(io.location_to_dict(data.query_id, loc)) + "\n")
    finally:
        if close:
            fh.close()
    return 0


def cmd_rank(args) -> int:
    config, _ = _configs(args)
    log.info("method=%s config=%s", args.method, config)
    fh, close = _open_out(args.out)
    csv_fh = open(args.csv, "w", encoding="utf-8") if args.csv else None
    try:
        for i, res in enumerate(run_all(io.stream(_paths(args)), config, args.method, args.workers)):
            io.write_rankings(fh, [res])
            if csv_fh:
                io.write_rankings_csv(csv_fh, [res], header=i == 0)
    finally:
        if close:
            fh.close()
        if csv_fh:
            csv_fh.close()
    return 0


def cmd_eval(args) -> int:
    _, eval_cfg = _configs(args)
    if args.queries is None and args.data is None:
        raise ConfigError("give --data DIR or --queries FILE")
    qpath = args.queries or args.data / io.QUERIES
    queries = {}
    for n, o in io._lines(qpath):
        q = io.parse_query(o, f"{qpath}:{n}")
        queries[q.query_id] = q
    results = list(io.read_rankings(args.rankings))
    unknown = [r.query_id for r in results if r.query_id not in queries]
    if unknown:
        raise DataError(f"rankings mention unknown queries: {unknown[:5]}")
    method = results[0].method if results else ""
    report = evaluate(results, queries, eval_cfg, method)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    with open(args.out_dir / "eval_summary.csv", "w", encoding="utf-8") as fh:
        report.write_summary(fh)
    with open(args.out_dir / "eval_detail.csv", "w", encoding="utf-8") as fh:
        report.write_detail(fh)
    for k in eval_cfg.k_values:
        print(f"HR@{k} = {report.hit_rates[k]:.4f}")
    print(f"queries: {len(report.per_query)}, no estimate: {report.no_estimate}")
    return 0


def cmd_gen(args) -> int:
    specs = []
    if args.preset == "discrimination":
        specs = [discrimination_spec(s) for s in args.seeds]
    else:
        base = {}
        if args.scenario is not None:
            with open(args.scenario, encoding="utf-8") as fh:
                base = yaml.safe_load(fh) or {}
        seeds = base.pop("seeds", None) or args.seeds
        specs = [ScenarioSpec.from_dict({**base, "seed": s}) for s in seeds]
    paths = io.write_dataset(args.out, (generate(s) for s in specs))
    print(f"wrote {len(specs)} queries to {paths.queries.parent}")
    return 0


def cmd_oracle(args) -> int:
    config, _ = _configs(args)
    mismatches = checked = 0
    for data in io.stream(_paths(args)):
        locations = extract_locations(select_candidates(data.images, config.top_n), config)
        membership = {loc.location_id: list(loc.members) for loc in locations}
        engine = dvem_scores(data.query, locations, data.correspondences, config)
        expected = oracle_score(data, config, membership)
        ok = [s.location_id for s in engine] == oracle_rank(data, config, membership)
        for s in engine:
            ok &= math.isclose(s.score, expected[s.location_id], rel_tol=1e-9, abs_tol=1e-12)
        checked += 1
        if not ok:
            mismatches += 1
            print(f"MISMATCH {data.query_id}")
    print(f"{checked} queries checked, {mismatches} mismatches")
    return EXIT_MISMATCH if mismatches else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dvem", description="Rank candidate locations for image geo-location.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a dataset against all record invariants")
    _add_data_args(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("cluster", help="write each query's candidate locations")
    _add_data_args(p)
    _add_config_args(p)
    p.add_argument("--out", type=Path, help="output .jsonl (default stdout)")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("rank", help="rank candidate locations of every query")
    _add_data_args(p)
    _add_config_args(p)
    p.add_argument("--method", choices=METHODS, default="dvem")
    p.add_argument("--out", type=Path, help="rankings .jsonl (default stdout)")
    p.add_argument("--csv", type=Path, help="also write rankings as CSV")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("eval", help="hit rate at K of a rankings file")
    p.add_argument("--data", type=Path)
    p.add_argument("--queries", type=Path)
    p.add_argument("--rankings", type=Path, required=True)
    p.add_argument("--out-dir", type=Path, default=Path("."))
    _add_config_args(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("gen", help="generate synthetic scenarios")
    p.add_argument("--scenario", type=Path, help="YAML scenario spec (keys of ScenarioSpec, optional seeds list)")
    p.add_argument("--preset", choices=["discrimination"])
    p.add_argument("--seeds", type=int, nargs="+", default=[0])
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("oracle", help="cross-check engine scores against the brute-force oracle")
    _add_data_args(p)
    _add_config_args(p)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
