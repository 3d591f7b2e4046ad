"""Command-line front end.

Exit codes: 0 success, 1 reproduction mismatch, 2 invalid input, 3 unresolved
solver failure, 4 non-monotone phase sequence.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from gaussbound import __version__
from gaussbound.analysis import ReentrantPhaseError, make_grid, robustness, timeline
from gaussbound.channel import evolve
from gaussbound.ensemble import PURE_BATH_SETS, bath_label, scan_mixed_goe, scan_pure
from gaussbound.report import (
    TABLE_IDS,
    diff_report,
    ensemble_csv,
    plot_ensemble,
    plot_reproduce,
    plot_timeline,
    reference_table,
    reproduce,
    reproduce_csv,
    timeline_csv,
    atomic_write,
    write_json,
)
from gaussbound.scenario import SchemaError, build_bath, build_cuts, build_state, load, validate
from gaussbound.sdp import NumericalFailure, classify_state
from gaussbound.symplectic import num_modes

EXIT_MISMATCH = 1
EXIT_SCHEMA = 2
EXIT_NUMERICAL = 3
EXIT_REENTRANT = 4

_PARAM_FLAGS = ("r", "theta1", "theta2", "theta3", "unit", "s", "a", "energy", "n")


def _modes(text: str) -> list[int]:
    try:
        return [int(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated modes, got {text!r}") from None


def _add_scenario_flags(p: argparse.ArgumentParser, bath: bool = True) -> None:
    p.add_argument("--scenario", help="scenario JSON file (replaces the state and bath flags)")
    p.add_argument("--state", help="state kind, e.g. fmsv, gfmsv, werner-wolf")
    p.add_argument("--r", type=float, help="squeezing parameter")
    for k in (1, 2, 3):
        p.add_argument(f"--theta{k}", type=float, help=f"beam splitter angle {k}")
    p.add_argument("--unit", choices=("rad", "deg"), help="angle unit (default rad)")
    p.add_argument("--s", type=float, help="Adesso parameter s")
    p.add_argument("--a", type=float, help="Adesso parameter a")
    p.add_argument("--energy", type=float, help="trace of random pure states")
    p.add_argument("--n", type=int, help="number of modes of random states")
    p.add_argument("--seed", type=int, help="seed of random states")
    p.add_argument("--cuts", help="comma separated cut filter, e.g. 12:34,13:24")
    if bath:
        p.add_argument("--bath-modes", type=_modes, help="noisy modes, e.g. 1,3")
        p.add_argument("--N", type=float, help="bath photon number")
        p.add_argument("--tol", type=float, help="bisection tolerance on transition times")
        p.add_argument("--tau-max", type=float, help="largest regularized time scanned")
        p.add_argument("--grid-step", type=float, help="coarse scan step")
    p.add_argument("--out", help="output file")


def scenario_from_args(args: argparse.Namespace) -> dict:
    """Build and validate the scenario described by the command-line flags."""
    if args.scenario:
        if args.state:
            raise SchemaError("use either --scenario or --state, not both")
        return load(args.scenario)
    if not args.state:
        raise SchemaError("a state is required (--state or --scenario)")
    doc: dict = {"state": {"kind": args.state, "params": {}}}
    for key in _PARAM_FLAGS:
        value = getattr(args, key, None)
        if value is not None:
            doc["state"]["params"][key] = value
    if args.seed is not None:
        doc["state"]["seed"] = args.seed
    bath_modes = getattr(args, "bath_modes", None)
    N = getattr(args, "N", None)
    if bath_modes is not None or N is not None:
        doc["bath"] = {"N": 0.0 if N is None else N, "modes": bath_modes or []}
    search = {}
    for key in ("tol", "tau_max", "grid_step"):
        value = getattr(args, key, None)
        if value is not None:
            search[key] = value
    if search:
        doc["search"] = search
    if args.cuts:
        doc["cuts"] = [c for c in args.cuts.split(",") if c]
    if getattr(args, "tau", None) is not None:
        doc["tau"] = args.tau
    return validate(doc)


def _record(scenario: dict, result: dict, started: float) -> dict:
    return {
        "tool": "gaussbound",
        "version": __version__,
        "scenario": scenario,
        "result": result,
        "wall_clock_s": round(time.perf_counter() - started, 3),
    }


def _emit(record: dict, out: str | None, as_json: bool) -> None:
    if out:
        write_json(out, record)
    if as_json:
        print(json.dumps(record, indent=2, sort_keys=True, default=str))


def _fmt(x) -> str:
    return "-" if x is None else f"{x:.6g}"


def cmd_classify(args) -> int:
    started = time.perf_counter()
    scenario = scenario_from_args(args)
    V = build_state(scenario)
    tau = scenario.get("tau", 0.0)
    bath = build_bath(scenario)
    if tau > 0:
        if bath is None:
            raise SchemaError("--tau needs a bath (--bath-modes and --N)")
        V = evolve(V, bath, tau)
    cuts = build_cuts(scenario, num_modes(V))
    cls = classify_state(V, cuts, witness=args.witness)
    if cls.failed:
        raise NumericalFailure("unresolved cuts: " + ", ".join(c.label for c in cls.failed))
    result = {
        "tau": tau,
        "label": cls.label.value,
        "cuts": [v.as_dict() for v in cls.verdicts],
    }
    if not args.json:
        print(f"tau = {tau:g}: {cls.label.value}")
        for v in cls.verdicts:
            print(f"  {v.cut.label:<6} {v.label.value:<6} min_pt_eig={_fmt(v.min_pt_eig):<12} "
                  f"sep_margin={_fmt(v.sep_margin):<12} {'' if v.status is None else v.status.value}")
    _emit(_record(scenario, result, started), args.out, args.json)
    return 0


def _need_bath(scenario: dict):
    bath = build_bath(scenario)
    if bath is None:
        raise SchemaError("a bath is required (--bath-modes and --N)")
    return bath


def cmd_robustness(args) -> int:
    started = time.perf_counter()
    scenario = scenario_from_args(args)
    V = build_state(scenario)
    bath = _need_bath(scenario)
    search = scenario["search"]
    res = robustness(
        V, bath, tol=search["tol"], tau_max=search["tau_max"],
        cuts=build_cuts(scenario, num_modes(V)), grid_step=search["grid_step"],
        method=args.method,
    )
    if not args.json:
        be, star = res.rounded()
        print(f"tau_be = {_fmt(be)}  tau_star = {_fmt(star)}")
        print(f"  brackets: tau_be {res.be_bracket}  tau_star {res.star_bracket}")
        for c in res.per_cut.values():
            print(f"  {c.cut.label:<6} tau_be={_fmt(c.tau_be):<10} tau_star={_fmt(c.tau_star)}")
    _emit(_record(scenario, res.as_dict(), started), args.out, args.json)
    return 0


def cmd_timeline(args) -> int:
    scenario = scenario_from_args(args)
    V = build_state(scenario)
    bath = _need_bath(scenario)
    search = scenario["search"]
    grid = make_grid(search["tau_max"], search["grid_step"])
    tl = timeline(V, bath, grid, build_cuts(scenario, num_modes(V)))
    text = timeline_csv(tl)
    if args.out:
        atomic_write(args.out, text)
        if not args.no_plot:
            plot_timeline(tl, Path(args.out).with_suffix(".png"))
    else:
        sys.stdout.write(text)
    return 0


def cmd_reproduce(args) -> int:
    tables = TABLE_IDS if args.table.upper() == "ALL" else (args.table.upper(),)
    for t in tables:
        if t not in TABLE_IDS:
            raise SchemaError(f"unknown table {args.table!r}; expected one of {', '.join(TABLE_IDS)}")
    status = 0
    for t in tables:
        rep = reproduce(t, jobs=args.jobs, count=args.count, seed=args.seed)
        print(diff_report(rep))
        if args.out:
            out = Path(args.out)
            if len(tables) > 1:
                out = out.with_name(f"{out.stem}_{t}{out.suffix or '.csv'}")
            atomic_write(out, reproduce_csv(rep))
            if not args.no_plot:
                plot_reproduce(rep, out.with_suffix(".png"))
        if not rep.passed:
            status = EXIT_MISMATCH
    return status


def _bath_sets(text: str | None, default) -> list[tuple[int, ...]]:
    if not text:
        return [tuple(m) for m in default]
    return [tuple(_modes(part)) for part in text.split(";") if part.strip()]


def cmd_ensemble(args) -> int:
    if args.count < 1:
        raise SchemaError("--count must be positive")
    if args.kind == "pure":
        sets = _bath_sets(args.bath_sets, PURE_BATH_SETS)
        energies = [float(e) for e in args.energy.split(",")] if args.energy else [12.0]
        reports = [scan_pure(args.count, e, sets, N=args.N, seed=args.seed, tol=args.tol,
                             jobs=args.jobs) for e in energies]
    else:
        default = [m for c in reference_table("VII") for m in c.bath_sets]
        sets = _bath_sets(args.bath_sets, default)
        reports = [scan_mixed_goe(args.count, sets, N=args.N, seed=args.seed, tol=args.tol,
                                  jobs=args.jobs)]
    for rep in reports:
        tag = f" E={rep.params['energy']:g}" if "energy" in rep.params else ""
        print(f"{rep.kind}{tag}: {rep.count} states, seed {rep.seed}, "
              f"bound-phase incidents {rep.bound_phase_incidents}, failures {rep.failures}, "
              f"rejected {rep.rejected}")
        for s in rep.stats:
            mean = "-" if s.mean_tau_star is None else f"{s.mean_tau_star:.4f} +/- {s.stderr:.4f}"
            print(f"  {bath_label(s.modes):<10} tau* = {mean}  ({s.finite} finite)")
        if args.out:
            base = Path(args.out)
            if len(reports) > 1:
                base = base.with_name(f"{base.name}_E{rep.params['energy']:g}")
            write_json(base.with_suffix(".json"), rep.as_dict())
            atomic_write(base.with_suffix(".csv"), ensemble_csv(rep))
            if not args.no_plot:
                plot_ensemble(rep, base.with_suffix(".png"))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gaussbound",
        description="Separability and bound entanglement of Gaussian states under thermal noise.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="classify every cut of a (possibly evolved) state")
    _add_scenario_flags(p)
    p.add_argument("--tau", type=float, help="regularized time to evolve to first")
    p.add_argument("--witness", action="store_true", help="add a 2-extendibility check on bound cuts")
    p.add_argument("--json", action="store_true", help="print the result record as JSON")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("robustness", help="separability time and bound-phase onset")
    _add_scenario_flags(p)
    p.add_argument("--method", choices=("grid", "bisect"), default="grid")
    p.add_argument("--json", action="store_true", help="print the result record as JSON")
    p.set_defaults(func=cmd_robustness)

    p = sub.add_parser("timeline", help="per-cut labels on a grid of times, as CSV")
    _add_scenario_flags(p)
    p.add_argument("--no-plot", action="store_true", help="skip the PNG next to --out")
    p.set_defaults(func=cmd_timeline)

    p = sub.add_parser("reproduce", help="recompute a reference table and diff it")
    p.add_argument("--table", required=True, help=f"one of {', '.join(TABLE_IDS)} or 'all'")
    p.add_argument("--out", help="CSV output path (a PNG is written next to it)")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--count", type=int, default=100, help="ensemble size for table VII")
    p.add_argument("--seed", type=int, default=0, help="ensemble seed for table VII")
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("ensemble", help="robustness statistics of random states")
    p.add_argument("--kind", choices=("pure", "mixed"), required=True)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--energy", help="trace of pure states; comma separated for several")
    p.add_argument("--N", type=float, default=4.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=5e-3)
    p.add_argument("--bath-sets", help="semicolon separated mode sets, e.g. '1;1,2;1,2,3'")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", help="output prefix; writes .json, .csv and .png")
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=cmd_ensemble)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ReentrantPhaseError as exc:
        print(f"re-entrant phase on cut {exc.cut}:", file=sys.stderr)
        for t, lab in exc.points:
            print(f"  tau={t:.4f} {lab}", file=sys.stderr)
        return EXIT_REENTRANT


if __name__ == "__main__":
    sys.exit(main())
