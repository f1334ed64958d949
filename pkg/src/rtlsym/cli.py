"""Command-line driver.

Subcommands mirror the flow: ``check`` (parse + elaborate), ``testgen``
(symbolic execution), ``simulate`` (replay a suite), ``report`` (coverage
summary) and ``pipeline`` (all of them). Exit status is 0 on success, 1 on
a tool error and 2 on a usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import __version__
from .elaborate import elaborate
from .errors import LocatedError, RtlsymError
from .frontend import parse_file
from .harness import load_harness, validate_harness
from .replay import CoverageData, format_table, report, simulate_suite
from .solver import SolverConfig
from .suite import dump_json, read_suite, write_suite
from .symexec import SymbolicExecutor

SUITE_FILE = "suite.txt"
STATS_FILE = "stats.json"
RESOURCES_FILE = "resources.json"
COVERAGE_FILE = "coverage.json"
REPORT_FILE = "report.json"
DETAIL_FILE = "coverage_detail.txt"
PLOT_FILE = "coverage.png"


class UsageError(Exception):
    pass


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be positive, got {v}")
    return v


def _positive_float(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {v}")
    return v


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default="rtlsym_out", help="output directory (default: %(default)s)")
    common.add_argument("--jobs", type=_positive_int, default=1,
                        help="worker threads; results do not depend on this")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")

    search = argparse.ArgumentParser(add_help=False)
    search.add_argument("--max-cycles", type=_positive_int, help="override the harness cycle bound")
    search.add_argument("--max-paths", type=_positive_int, help="stop after this many complete paths")
    search.add_argument("--max-solver-calls", type=_positive_int, help="solver call budget")
    search.add_argument("--timeout-s", type=_positive_float, help="wall-clock budget in seconds")
    search.add_argument("--solver", choices=("builtin", "external"), default="builtin")
    search.add_argument("--solver-cmd", default="z3 -in",
                        help="external solver command, reads SMT-LIB2 on stdin (default: %(default)s)")
    search.add_argument("--solver-timeout-ms", type=_positive_int, help="per-query solver timeout")
    search.add_argument("--seed", type=int, default=0, help="solver seed (default: %(default)s)")

    p = argparse.ArgumentParser(prog="rtlsym", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    c = sub.add_parser("check", parents=[common], help="parse and elaborate a design")
    c.add_argument("design")

    t = sub.add_parser("testgen", parents=[common, search], help="generate a test suite")
    t.add_argument("design")
    t.add_argument("harness")

    s = sub.add_parser("simulate", parents=[common], help="replay a suite and record coverage")
    s.add_argument("design")
    s.add_argument("harness")
    s.add_argument("suite", help=f"test-suite file (default: OUT/{SUITE_FILE})", nargs="?")

    r = sub.add_parser("report", parents=[common], help="summarize recorded coverage")
    r.add_argument("design")
    r.add_argument("coverage", help=f"coverage file (default: OUT/{COVERAGE_FILE})", nargs="?")

    pl = sub.add_parser("pipeline", parents=[common, search], help="testgen, simulate and report")
    pl.add_argument("design")
    pl.add_argument("harness")
    return p


# -- steps (shared by the single commands and pipeline) ----------------------

def load_design(path):
    design = elaborate(parse_file(path), file=path)
    for w in design.warnings:
        print(w, file=sys.stderr)
    return design


def _harness(args, design):
    h = load_harness(args.harness)
    h = h.with_overrides(max_cycles=getattr(args, "max_cycles", None),
                         max_paths=getattr(args, "max_paths", None),
                         max_solver_calls=getattr(args, "max_solver_calls", None),
                         wall_clock_s=getattr(args, "timeout_s", None))
    validate_harness(design, h)
    return h


def stats_row(design, stats):
    res = stats.resources()
    header = f"{'Design':<12} {'Tests(#)':>9} {'Test Vectors(#)':>16} {'Time(Min)':>10} " \
             f"{'Memory(Mb)':>11} {'CPU(%)':>7}"
    mem = "-" if res["peak_rss_mb"] is None else f"{res['peak_rss_mb']:.1f}"
    cpu = "-" if res["cpu_pct"] is None else f"{res['cpu_pct']:.1f}"
    row = f"{design:<12} {stats.tests:>9} {stats.vectors:>16} {res['time_min']:>10.4f} " \
          f"{mem:>11} {cpu:>7}"
    return header + "\n" + row


def step_testgen(args, design, harness, out):
    solver = SolverConfig(backend=args.solver, command=args.solver_cmd,
                          timeout_ms=args.solver_timeout_ms, seed=args.seed)
    suite, stats = SymbolicExecutor(design, harness, solver, jobs=args.jobs).run()
    write_suite(suite, os.path.join(out, SUITE_FILE))
    dump_json(dict(stats.counters(), design=design.name, seed=args.seed),
              os.path.join(out, STATS_FILE))
    dump_json(dict(stats.resources(), design=design.name, tests=stats.tests,
                   vectors=stats.vectors), os.path.join(out, RESOURCES_FILE))
    print(stats_row(design.name, stats))
    if stats.budget_exhausted:
        print(f"warning: budget {stats.budget_exhausted} exhausted; suite is partial",
              file=sys.stderr)
    return suite


def step_simulate(args, design, harness, suite, out):
    cov, _ = simulate_suite(design, harness, suite, jobs=args.jobs)
    dump_json(cov.to_dict(design.name), os.path.join(out, COVERAGE_FILE))
    return cov


def step_report(design, cov, out):
    from .plotting import plot_coverage

    rep = report(design, cov)
    dump_json(rep.summary(), os.path.join(out, REPORT_FILE))
    with open(os.path.join(out, DETAIL_FILE), "w", encoding="utf-8", newline="\n") as fh:
        fh.writelines(r.line() + "\n" for r in rep.detail)
    plot_coverage(rep, os.path.join(out, PLOT_FILE))
    sys.stdout.write(format_table(rep))
    return rep


def _read_coverage(path, design):
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if data.get("design") != design.name:
        raise RtlsymError(f"{path}: coverage belongs to {data.get('design')!r}, not {design.name!r}")
    return CoverageData.from_dict(data)


# -- dispatch ------------------------------------------------------------------

def _require(path, what):
    if not os.path.isfile(path):
        raise UsageError(f"{what} {path!r} does not exist")


def _dispatch(args):
    out = args.out
    _require(args.design, "design file")
    if args.command == "check":
        d = load_design(args.design)
        print(f"{d.name}: {len(d.signals)} signals, {len(d.processes)} processes, "
              f"{len(d.stmt_table)} statements, {sum(d.arm_counts)} branch arms")
        return 0
    if args.command == "report":
        cov_path = args.coverage or os.path.join(out, COVERAGE_FILE)
        _require(cov_path, "coverage file")
        d = load_design(args.design)
        os.makedirs(out, exist_ok=True)
        step_report(d, _read_coverage(cov_path, d), out)
        return 0

    _require(args.harness, "harness file")
    if args.command == "simulate":
        suite_path = args.suite or os.path.join(out, SUITE_FILE)
        _require(suite_path, "suite file")
    d = load_design(args.design)
    h = _harness(args, d)
    os.makedirs(out, exist_ok=True)
    if args.command == "testgen":
        step_testgen(args, d, h, out)
    elif args.command == "simulate":
        from .harness import controlled_inputs
        inputs = [(s.name, s.width) for s in controlled_inputs(d, h)]
        suite = read_suite(suite_path, inputs)
        step_simulate(args, d, h, suite, out)
    else:  # pipeline
        suite = step_testgen(args, d, h, out)
        cov = step_simulate(args, d, h, suite, out)
        step_report(d, cov, out)
    return 0


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        return _dispatch(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"rtlsym: error: {exc}", file=sys.stderr)
        return 2
    except RtlsymError as exc:
        msg = exc.diagnostic() if isinstance(exc, LocatedError) else f"error: {exc}"
        print(msg, file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
