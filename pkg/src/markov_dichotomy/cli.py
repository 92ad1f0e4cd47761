"""Command-line front end.

Subcommands: validate, decide, hellinger, simulate, shift, stationarize,
oracle-check.  Exit codes are stable: 0 success, 1 analysis error, 2 I/O
error, 3 schema or numeric error, 4 enumeration guard exceeded.  Output is
text on a terminal and JSON when redirected, unless --format says otherwise.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from . import criteria, montecarlo, oracle
from .applications import shift_analysis, stationarize
from .engine import (
    CylinderEvent,
    LocalContinuityError,
    NullEventError,
    conditional_marginal,
    conditional_pair,
    hellinger_integral,
    hellinger_trajectory,
    marginal,
    pair_probability,
    z_mean,
)
from .model import (
    IncompatibleChainsError,
    SpecFormatError,
    SpecNumericError,
    canonicalize,
    load_spec,
)

EXIT_OK = 0
EXIT_ANALYSIS = 1
EXIT_IO = 2
EXIT_SCHEMA = 3
EXIT_GUARD = 4

ORACLE_TOL = 1e-12


def _default_format() -> str:
    return "text" if sys.stdout.isatty() else "json"


def _emit(doc: dict, fmt: str, text: str = None) -> None:
    if fmt == "text" and text is not None:
        print(text)
    else:
        print(json.dumps(doc, indent=2))


def _load_chain(path):
    return canonicalize(load_spec(path))


def cmd_validate(args) -> int:
    load_spec(args.spec)
    print(f"{args.spec}: valid")
    return EXIT_OK


def cmd_decide(args) -> int:
    a = _load_chain(args.spec)
    b = _load_chain(args.other)
    options = criteria.DecideOptions(
        delta=args.delta, big_m=args.bigm, horizon=args.horizon
    )
    report = criteria.decide(a, b, options)
    _emit(report.to_dict(), args.format or _default_format(), report.to_text())
    return EXIT_OK


def cmd_hellinger(args) -> int:
    a = _load_chain(args.spec)
    b = _load_chain(args.other)
    horizon = args.horizon
    rows = []
    if horizon > 0:
        h = hellinger_trajectory(a, b, horizon)
        running = 0.0
        for n in range(1, horizon + 1):
            running += criteria.d_n_squared(a.transition_at(n), b.transition_at(n))
            rows.append((n, float(h[n - 1]), running))
    fmt = args.format or _default_format()
    if fmt == "csv":
        writer = csv.writer(sys.stdout)
        writer.writerow(["n", "hellinger_integral", "partial_sum_d2"])
        for row in rows:
            writer.writerow([row[0], repr(row[1]), repr(row[2])])
    elif fmt == "text":
        print(f"{'n':>8} {'H_n':>22} {'sum d^2':>22}")
        for n, h_n, s in rows:
            print(f"{n:>8} {h_n:>22.16g} {s:>22.16g}")
    else:
        _emit(
            {"rows": [[n, h_n, s] for n, h_n, s in rows],
             "columns": ["n", "hellinger_integral", "partial_sum_d2"]},
            "json",
        )
    return EXIT_OK


def cmd_simulate(args) -> int:
    a = _load_chain(args.spec)
    b = _load_chain(args.other)
    fmt = args.format or _default_format()
    if fmt == "csv":
        batch = montecarlo.loglr_trajectories(a, b, args.horizon, args.samples, args.seed)
        writer = csv.writer(sys.stdout)
        writer.writerow(["path_id", "k", "log_z"])
        for p in range(batch.count):
            for k in range(1, batch.horizon + 1):
                writer.writerow([p, k, repr(float(batch.log_z[p, k - 1]))])
        return EXIT_OK
    batch = montecarlo.loglr_trajectories(a, b, args.horizon, args.samples, args.seed)
    summary = batch.summary(args.threshold)
    summary["seed"] = args.seed
    text = "\n".join(f"{key}: {value}" for key, value in summary.items())
    _emit(summary, fmt, text)
    return EXIT_OK


def cmd_shift(args) -> int:
    chain = _load_chain(args.spec)
    report = shift_analysis(chain, delta=args.delta, big_m=args.bigm)
    _emit(report.to_dict(), args.format or _default_format(), report.to_text())
    return EXIT_OK


def cmd_stationarize(args) -> int:
    chain = _load_chain(args.spec)
    report = stationarize(chain, delta=args.delta, big_m=args.bigm)
    _emit(report.to_dict(), args.format or _default_format(), report.to_text())
    return EXIT_OK


def _oracle_comparisons(a, b, n):
    """(name, deviation) pairs for every engine quantity against enumeration."""
    table_a = oracle.enumerate_paths(a, n)
    table_b = oracle.enumerate_paths(b, n)
    checks = []
    dev = 0.0
    for lev in range(1, n + 1):
        dev = max(dev, float(np.max(np.abs(
            table_a.level_distribution(lev, a.n_states) - marginal(a, lev)))))
        dev = max(dev, float(np.max(np.abs(
            table_b.level_distribution(lev, b.n_states) - marginal(b, lev)))))
    checks.append(("marginal", dev))
    dev = 0.0
    mid = max(2, n // 2 + 1)
    for s in range(a.n_states):
        for t in range(a.n_states):
            dev = max(dev, abs(oracle.oracle_pair(a, 1, mid, s, t)
                               - pair_probability(a, 1, mid, s, t)))
    checks.append(("pair_probability", dev))
    dev = 0.0
    for lev in range(1, n + 1):
        dev = max(dev, abs(oracle.oracle_hellinger(a, b, lev) - hellinger_integral(a, b, lev)))
    checks.append(("hellinger_integral", dev))
    try:
        dev = abs(oracle.oracle_z_mean(a, b, n) - z_mean(a, b, n))
        checks.append(("z_mean", dev))
    except LocalContinuityError:
        checks.append(("z_mean (skipped: not locally a.c.)", 0.0))
    event = CylinderEvent.of({1: a.alphabet[0]})
    try:
        dev = float(np.max(np.abs(
            oracle.oracle_conditional(a, event, n) - conditional_marginal(a, event, n))))
        if n >= 3:
            dev = max(dev, abs(
                oracle.oracle_conditional_pair(a, event, 2, n, 0, 0)
                - conditional_pair(a, event, 2, n, 0, 0)))
        checks.append(("conditional", dev))
    except NullEventError:
        checks.append(("conditional (skipped: null event)", 0.0))
    return checks


def cmd_oracle_check(args) -> int:
    a = _load_chain(args.spec)
    b = _load_chain(args.other)
    checks = _oracle_comparisons(a, b, args.horizon)
    worst = max(dev for _, dev in checks)
    fmt = args.format or _default_format()
    if fmt == "text":
        for name, dev in checks:
            print(f"{'PASS' if dev <= ORACLE_TOL else 'FAIL'} {name}: max |dev| = {dev:.3e}")
    else:
        _emit({"checks": [{"name": name, "deviation": dev, "pass": dev <= ORACLE_TOL}
                          for name, dev in checks],
               "tolerance": ORACLE_TOL}, "json")
    return EXIT_OK if worst <= ORACLE_TOL else EXIT_ANALYSIS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="markov-dichotomy",
        description="Equivalence vs. mutual singularity of Markov measures",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, other=False, **defaults):
        p = sub.add_parser(name)
        p.add_argument("--spec", required=True, help="measure document (JSON)")
        if other:
            p.add_argument("--other", required=True, help="second measure document")
        p.add_argument("--horizon", type=int, default=defaults.get("horizon", 100))
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--samples", type=int, default=defaults.get("samples", 100))
        p.add_argument("--format", choices=["json", "csv", "text"], default=None)
        p.add_argument("--delta", type=float, default=None)
        p.add_argument("--bigm", type=int, default=None)
        p.add_argument("--threshold", type=float, default=10.0)
        p.set_defaults(fn=fn)
        return p

    add("validate", cmd_validate)
    add("decide", cmd_decide, other=True, horizon=200)
    add("hellinger", cmd_hellinger, other=True)
    add("simulate", cmd_simulate, other=True, horizon=200)
    add("shift", cmd_shift)
    add("stationarize", cmd_stationarize)
    add("oracle-check", cmd_oracle_check, other=True, horizon=6)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (SpecFormatError, SpecNumericError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except oracle.PathCountGuardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (IncompatibleChainsError, NullEventError, LocalContinuityError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS


def entry() -> None:
    raise SystemExit(main())
