"""Command line interface: ``cojumps simulate|test|experiment|analyze``.

Exit status is 0 on success, 1 for configuration errors and 2 for data
errors (unreadable, malformed or irregular input files, or data too short
for the requested windows).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import replace
from typing import List, Optional

from .estimators import TruncationSpec, WindowSpec
from .exceptions import ConfigError, GapError, InsufficientData, ParseError
from .harness.config import experiment_from_config, load_config, resolve_scenario
from .harness.experiment import ExperimentSpec, run_experiment, write_tables
from .harness.ingest import DataFormat, ingest_csv
from .harness.report import analyze_days, format_report
from .oracle import limit_quantities
from .rng import stream
from .simulator import PRESETS, PathClass, simulate_levels
from .testing import DisjointCutoffMethod, JointCutoffMethod, TestConfig, run_tests

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2


def _floats(text: str) -> List[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text: str) -> List[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _add_test_flags(
    p: argparse.ArgumentParser, level_default: Optional[float] = 0.05, seed_default: Optional[int] = 0
) -> None:
    g = p.add_argument_group("test settings")
    g.add_argument("--k", type=int, default=None, help="block length of the joint-jump ratio (default 2)")
    g.add_argument(
        "--alpha",
        type=float,
        default=None,
        help="truncation constant; with --truncation bipower it multiplies sqrt(BV) (defaults 0.03 / 3.0)",
    )
    g.add_argument("--varpi", type=float, default=None, help="truncation exponent in (0, 1/2) (default 0.49)")
    g.add_argument("--kn", type=int, default=None, help="local window length (default floor(n**0.5))")
    g.add_argument("--level", type=float, default=level_default, help="significance level")
    g.add_argument("--draws", type=int, default=None, help="simulated copies (default ceil(1000/level), max 20000)")
    g.add_argument("--seed", type=int, default=seed_default, help="seed for every random draw")
    g.add_argument(
        "--power-guard",
        default=None,
        metavar="A,W",
        help="alpha',varpi' for the truncated joint cutoffs, e.g. 1.0,0.25",
    )


def _add_ingest_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("input", help="CSV file with one row per observation")
    p.add_argument("--format", choices=[f.value for f in DataFormat], default="LEVELS")
    p.add_argument("--date-col", default="date")
    p.add_argument("--cols", default="x1,x2", help="the two value columns")
    p.add_argument("--time-col", default=None, help="optional time column, checked for regular spacing")


def _test_config(args, truncation: str = "fixed") -> TestConfig:
    varpi = 0.49 if args.varpi is None else args.varpi
    alpha = args.alpha if args.alpha is not None else (3.0 if truncation == "bipower" else 0.03)
    try:
        return TestConfig(
            k=2 if args.k is None else args.k,
            level=args.level,
            trunc=TruncationSpec(alpha=alpha, varpi=varpi),
            window=None if args.kn is None else WindowSpec(args.kn),
            n_draws=args.draws,
            power_guard=tuple(_floats(args.power_guard)) if args.power_guard else None,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _methods(args):
    try:
        joint = [JointCutoffMethod(m.strip().upper()) for m in args.method_joint.split(",") if m.strip()]
        disjoint = [DisjointCutoffMethod.parse(m) for m in args.method_disjoint.split(",") if m.strip()]
    except ValueError as exc:
        raise ConfigError(f"unknown method: {exc}") from None
    if not joint or not disjoint:
        raise ConfigError("at least one joint and one disjoint method are required")
    return joint, disjoint


def _add_method_flags(p: argparse.ArgumentParser, many: bool = False) -> None:
    extra = " (comma-separated list allowed)" if many else ""
    p.add_argument(
        "--method-joint",
        default="SIMULATED",
        help="one of " + ", ".join(m.value for m in JointCutoffMethod) + extra,
    )
    p.add_argument(
        "--method-disjoint",
        default="SIMULATED",
        help="SIMULATED or MARKOV, optionally suffixed :MULTIPOWER or :TRUNCATED" + extra,
    )


def cmd_simulate(args) -> int:
    parser = load_config(args.config) if args.config else None
    scenario = resolve_scenario(parser, args.preset)
    if args.n_obs < 1 or args.paths < 1:
        raise ConfigError("--n-obs and --paths must be positive")
    os.makedirs(args.out, exist_ok=True)
    truths = []
    with open(os.path.join(args.out, "paths.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["date", "t", "x1", "x2"])
        for p in range(args.paths):
            levels, truth = simulate_levels(scenario, args.n_obs, stream(args.seed, 0, 0, p))
            label = f"path{p:05d}"
            for i, (x1, x2) in enumerate(levels):
                w.writerow([label, repr(i * scenario.horizon / args.n_obs), repr(float(x1)), repr(float(x2))])
            lq = limit_quantities(truth)
            truths.append({"date": label, **truth.to_dict(), "limits": vars(lq)})
    with open(os.path.join(args.out, "truth.json"), "w") as fh:
        json.dump({"preset": args.preset, "n_obs": args.n_obs, "seed": args.seed, "paths": truths}, fh, indent=1)
    print(f"wrote {args.paths} path(s) to {args.out}")
    return EXIT_OK


def cmd_test(args) -> int:
    cfg = _test_config(args, args.truncation)
    joint, disjoint = _methods(args)
    records = ingest_csv(args.input, DataFormat(args.format), args.date_col, _names(args.cols), args.time_col)
    if args.day is not None:
        records = [r for r in records if r.label == args.day]
        if not records:
            raise ParseError(f"no day labelled {args.day!r}")
    out = []
    for i, rec in enumerate(records):
        day_cfg = cfg
        if args.truncation == "bipower":
            day_cfg = replace(cfg, trunc=TruncationSpec.from_bipower(rec.series, cfg.trunc.alpha, cfg.trunc.varpi))
        report = run_tests(rec.series, day_cfg, joint[0], disjoint[0], seed=args.seed, key=(2, i))
        out.append({"date": rec.label, **report.as_dict()})
    text = json.dumps(out if len(out) != 1 else out[0], indent=2, default=str)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return EXIT_OK


def _names(text: str) -> List[str]:
    names = [c.strip() for c in text.split(",") if c.strip()]
    if len(names) != 2:
        raise ConfigError(f"--cols needs exactly two column names, got {text!r}")
    return names


def cmd_experiment(args) -> int:
    if args.config:
        spec = experiment_from_config(load_config(args.config))
    else:
        spec = ExperimentSpec(scenario=resolve_scenario(None, args.preset), scenario_name=args.preset)
    overrides = {}
    try:
        if args.n_obs:
            overrides["n_obs_list"] = tuple(_ints(args.n_obs))
        if args.replications is not None:
            overrides["replications"] = args.replications
        if args.levels:
            overrides["levels"] = tuple(_floats(args.levels))
        if args.keep:
            overrides["keep_classes"] = frozenset(PathClass(c.strip().upper()) for c in args.keep.split(","))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.method_joint or args.method_disjoint:
        args.method_joint = args.method_joint or ",".join(m.value for m in spec.joint_methods)
        args.method_disjoint = args.method_disjoint or ",".join(str(m) for m in spec.disjoint_methods)
        joint, disjoint = _methods(args)
        overrides["joint_methods"], overrides["disjoint_methods"] = tuple(joint), tuple(disjoint)
    # test flags given on the command line replace the config values one by one
    cfg = spec.test_cfg
    trunc = cfg.trunc
    try:
        if args.alpha is not None or args.varpi is not None:
            trunc = TruncationSpec(
                alpha=trunc.alpha if args.alpha is None else args.alpha,
                varpi=trunc.varpi if args.varpi is None else args.varpi,
            )
        cfg = replace(
            cfg,
            k=cfg.k if args.k is None else args.k,
            trunc=trunc,
            window=cfg.window if args.kn is None else WindowSpec(args.kn),
            n_draws=cfg.n_draws if args.draws is None else args.draws,
            power_guard=cfg.power_guard if not args.power_guard else tuple(_floats(args.power_guard)),
        )
        spec = replace(spec, test_cfg=cfg, **overrides)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if args.workers < 1:
        raise ConfigError("--workers must be >= 1")
    result = run_experiment(spec, workers=args.workers)
    for path in write_tables(result, args.out):
        print(path)
    return EXIT_OK


def cmd_analyze(args) -> int:
    cfg = _test_config(args, args.truncation)
    joint, disjoint = _methods(args)
    records = ingest_csv(args.input, DataFormat(args.format), args.date_col, _names(args.cols), args.time_col)
    rows = analyze_days(
        records,
        cfg,
        joint[0],
        disjoint[0],
        prefilter_level=None if args.no_prefilter else args.prefilter_level,
        truncation=args.truncation,
        bipower_multiplier=cfg.trunc.alpha,
        seed=args.seed,
    )
    text = format_report(rows)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cojumps", description="Tests for common versus disjoint jumps in two intraday price series.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    presets = ", ".join(PRESETS)

    p = sub.add_parser("simulate", help="simulate paths and write levels plus ground truth")
    p.add_argument("--preset", default="I-j", help=f"scenario name ({presets}) or a [scenario:<name>] section")
    p.add_argument("--config", default=None)
    p.add_argument("--n-obs", type=int, default=1600)
    p.add_argument("--paths", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="sim_out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("test", help="run both tests on each day of a CSV file and print the reports")
    _add_ingest_flags(p)
    _add_test_flags(p)
    _add_method_flags(p)
    p.add_argument("--truncation", choices=("fixed", "bipower"), default="fixed")
    p.add_argument("--day", default=None, help="only test this day label")
    p.add_argument("--out", default=None, help="write JSON here instead of stdout")
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("experiment", help="Monte Carlo rejection rates for a scenario")
    p.add_argument("--config", default=None, help="INI file with an [experiment] section")
    p.add_argument("--preset", default="I-j", help=f"scenario when no config is given ({presets})")
    p.add_argument("--n-obs", default=None, help="comma-separated sample sizes")
    p.add_argument("--replications", type=int, default=None)
    p.add_argument("--levels", default=None, help="comma-separated levels")
    p.add_argument("--keep", default=None, help="keep only these path classes, e.g. DISJOINT")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default="experiment_out")
    _add_test_flags(p, level_default=None, seed_default=None)
    _add_method_flags(p, many=True)
    p.set_defaults(method_joint=None, method_disjoint=None, func=cmd_experiment)

    p = sub.add_parser("analyze", help="per-day report of a CSV file of intraday data")
    _add_ingest_flags(p)
    _add_test_flags(p, level_default=0.01)
    _add_method_flags(p)
    p.add_argument("--truncation", choices=("fixed", "bipower"), default="bipower")
    p.add_argument("--prefilter-level", type=float, default=0.01)
    p.add_argument("--no-prefilter", action="store_true")
    p.add_argument("--out", default=None, help="write the CSV here instead of stdout")
    p.set_defaults(func=cmd_analyze)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ParseError, GapError, InsufficientData) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FileNotFoundError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
