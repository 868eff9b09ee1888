"""Command line entry point.

    evasim attack --dataset cancer --defender linear --method ap --out results/
    evasim sweep --param r-exploit --values 0.1,0.5,0.9 --dataset two-blob-nonconvex ...
    evasim gen-data --kind separable-2d --n 400 --out sep.csv
    evasim report results/ --charts

Exit status: 0 success, 2 when some matrix cells failed, 1 on a fatal error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import report as reporting
from .dataspace import SYNTHETIC_KINDS, make_synthetic, save_csv
from .errors import EvasimError
from .harness import ExperimentConfig, SweepSpec, config_from_mapping, load_config, run_experiment, run_sweep

log = logging.getLogger("evasim")


def _csv_list(text):
    return [s.strip() for s in text.split(",") if s.strip()]


def _add_experiment_args(p):
    p.add_argument("--config", help="INI file with an [experiment] section")
    p.add_argument("--dataset", action="append", help="CSV path or fixture name (repeatable or comma list)")
    p.add_argument("--defender", action="append", help="linear|knn|dtree|rforest|rbf (repeatable or comma list)")
    p.add_argument("--method", action="append", help="ap|re (repeatable or comma list)")
    p.add_argument("--b-explore", type=int)
    p.add_argument("--n-attack", type=int)
    p.add_argument("--r-exploit", type=float)
    p.add_argument("--runs", type=int)
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--charts", action="store_true")
    p.add_argument("--out", required=True)


def _flatten(values):
    if not values:
        return None
    return ",".join(v for item in values for v in _csv_list(item))


def build_config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    overrides = {
        "datasets": _flatten(args.dataset),
        "defenders": _flatten(args.defender),
        "methods": _flatten(args.method),
        "runs": args.runs,
        "master_seed": args.seed,
    }
    for name in ("b_explore", "n_attack", "r_exploit"):
        value = getattr(args, name)
        if value is not None:
            overrides[f"ap.{name}"] = value
            overrides[f"re.{name}"] = value
    return config_from_mapping(overrides, cfg)


def cmd_attack(args):
    cfg = build_config(args)
    rep = run_experiment(cfg, jobs=args.jobs)
    for path in reporting.emit_report(rep, args.out, charts=args.charts):
        print(path)
    for a in rep.aggregates:
        print(f"{a.dataset:>20} {a.defender:>8} {a.method}  EAR {a.ear_mean:.3f} +/- {a.ear_std:.3f}")
    return 2 if rep.errors else 0


def cmd_sweep(args):
    cfg = build_config(args)
    cast = int if args.param.replace("-", "_") == "b_explore" else float
    spec = SweepSpec(args.param, tuple(cast(v) for v in _csv_list(args.values)), cfg)
    results = run_sweep(spec, jobs=args.jobs)
    for path in reporting.emit_sweep(spec.parameter, results, args.out, charts=args.charts):
        print(path)
    for row in reporting.sweep_rows(spec.parameter, results):
        print("{}={} {} {} {} EAR {:.3f} +/- {:.3f}".format(row[0], row[1], row[2], row[3], row[4], row[6], row[7]))
    return 2 if any(r.errors for _, r in results) else 0


def cmd_gen_data(args):
    ds = make_synthetic(args.kind, args.n, seed=args.seed)
    print(save_csv(ds, args.out))
    return 0


def cmd_report(args):
    out = Path(args.dir)
    # a sweep directory holds one report per swept value
    dirs = [out] if (out / "records.csv").exists() else sorted(p.parent for p in out.glob("*/records.csv"))
    if not dirs:
        raise EvasimError(f"no records.csv found under {out}")
    for d in dirs:
        for path in reporting.emit_report(reporting.read_report(d), d, charts=args.charts):
            print(path)
    sweep_csv = out / "sweep.csv"
    if args.charts and sweep_csv.exists():
        chart = reporting.sweep_chart(sweep_csv)
        if chart:
            print(chart)
    return 0


def make_parser():
    parser = argparse.ArgumentParser(prog="evasim", description="Black-box evasion attack simulator")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("attack", help="run the dataset x defender x method matrix")
    _add_experiment_args(p)
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("sweep", help="repeat an experiment over values of one parameter")
    p.add_argument("--param", required=True, choices=("r-exploit", "b-explore"))
    p.add_argument("--values", required=True, help="comma-separated, strictly increasing")
    _add_experiment_args(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("gen-data", help="write a synthetic fixture as CSV")
    p.add_argument("--kind", required=True, choices=SYNTHETIC_KINDS)
    p.add_argument("--n", type=int, default=400)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("report", help="rebuild aggregates (and charts) from a results directory")
    p.add_argument("dir")
    p.add_argument("--charts", action="store_true")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (EvasimError, OSError) as exc:
        log.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
