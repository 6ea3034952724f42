"""Command-line interface.

Subcommands::

    lump         minimal constrained lumping of a system (JSON in/out)
    reduce       build the reduced system from a lumping
    reconstruct  full-order drift schedule from a reduced one
    simulate     integrate a system under schedules, emit CSV
    verify       aggregated-trajectory equivalence report
    values       brute-force value bracketing
    bench        classify every instance of a directory of edge lists

Exit codes: 0 success, 1 validation/usage error, 2 internal failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io as pio
from .bench import run_benchmark
from .controls import PiecewiseControl, reconstruct_control, verify_reconstruction
from .errors import PoslumpError
from .linalg import Tolerance, to_float
from .lumping import LumpingResult, minimal_constrained_lumping
from .pcs import Pcs, reduce_pcs, validate_pcs
from .proper import check_proper
from .simulate import CostSpec, approx_values, simulate, verify_trajectory_equivalence

__all__ = ["main", "cli_main"]


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    p = _Parser(prog="poslump", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, timeout=False, step=False, seed=False):
        sp.add_argument("--tol", type=float, default=1e-9, help="relative rank tolerance")
        sp.add_argument("--exact", action="store_true", help="exact rational arithmetic")
        sp.add_argument("--output", "-o", default=None, help="write result here instead of stdout")
        if timeout:
            sp.add_argument("--timeout", type=float, default=None, help="budget in seconds")
        if step:
            sp.add_argument("--step", type=float, default=1e-3, help="integration step")
        if seed:
            sp.add_argument("--seed", type=int, default=0, help="sampling seed")

    sp = sub.add_parser("lump", help="minimal constrained lumping of a system")
    sp.add_argument("pcs", help="system JSON file")
    sp.add_argument("--verbose", action="store_true", help="include the closure trace")
    common(sp, timeout=True)

    sp = sub.add_parser("reduce", help="reduced system from a proper lumping")
    sp.add_argument("pcs")
    sp.add_argument("lumping", help="lumping JSON file ({'L': ...})")
    common(sp)

    sp = sub.add_parser("reconstruct", help="full-order schedule from a reduced one")
    sp.add_argument("pcs")
    sp.add_argument("lumping")
    sp.add_argument("schedule", help="reduced drift schedule JSON")
    common(sp)

    sp = sub.add_parser("simulate", help="integrate a system under schedules")
    sp.add_argument("system", help="system JSON file (full or reduced)")
    sp.add_argument("--drift", required=True, help="drift schedule JSON, or 'lower'/'upper'")
    sp.add_argument("--input", dest="input_sched", default=None, help="input schedule JSON")
    sp.add_argument("--x0", default=None, help="comma-separated initial state")
    sp.add_argument("--tau", type=float, default=1.0)
    common(sp, step=True)

    sp = sub.add_parser("verify", help="aggregated-trajectory equivalence report")
    sp.add_argument("pcs")
    sp.add_argument("lumping")
    sp.add_argument("--drift", required=True, help="drift schedule JSON, or 'lower'/'upper'")
    sp.add_argument("--input", dest="input_sched", default=None)
    sp.add_argument("--x0", default=None)
    sp.add_argument("--tau", type=float, default=1.0)
    sp.add_argument("--max-deviation", type=float, default=1e-6, help="acceptance threshold")
    common(sp, step=True)

    sp = sub.add_parser("values", help="brute-force value bracketing")
    sp.add_argument("system")
    sp.add_argument("--cost", default="final-output-sum",
                    choices=["final-output-sum", "final-state-sum", "running-state-sum"])
    sp.add_argument("--x0", default=None)
    sp.add_argument("--tau", type=float, default=1.0)
    sp.add_argument("--switch-points", type=int, default=0)
    sp.add_argument("--corner-budget", type=int, default=64)
    common(sp, step=True, seed=True)

    sp = sub.add_parser("bench", help="classify every instance of edge-list networks")
    sp.add_argument("paths", nargs="*", help="edge-list files or directories")
    sp.add_argument("--perturbation", type=float, default=0.1)
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--format", choices=["json", "csv"], default="json")
    sp.add_argument("--no-timing", action="store_true", help="deterministic output (strip wall times)")
    common(sp, timeout=True)
    return p


def _emit(text: str, output):
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _parse_x0(arg):
    if arg is None:
        return None
    return np.array([float(x) for x in arg.split(",")])


def _load_drift(arg, pcs, exact):
    if arg == "lower":
        return PiecewiseControl.constant(pcs.bounds.lower)
    if arg == "upper":
        return PiecewiseControl.constant(pcs.bounds.upper)
    return pio.control_from_json(arg, exact)


def _load_lumping(path, exact) -> LumpingResult:
    obj = pio._load_json(path, exact)
    L = pio.matrix_from_json(obj["L"], exact)
    return LumpingResult(L=L, k=L.shape[0], n=L.shape[1])


def _cost_from_name(name, system) -> CostSpec:
    O = to_float(system.O)
    if name == "final-output-sum":
        return CostSpec(final=lambda x, u: float(np.sum(O @ x)))
    if name == "final-state-sum":
        return CostSpec(final=lambda x, u: float(np.sum(x)))
    return CostSpec(running=lambda t, x, u: float(np.sum(x)))


def _cmd_lump(args) -> int:
    pcs = pio.load_pcs_json(args.pcs, args.exact)
    validate_pcs(pcs)
    tol = Tolerance(rank_rel=args.tol)
    res = minimal_constrained_lumping(
        pcs.generators(), pcs.O, tol=tol, budget=args.timeout, exact=args.exact
    )
    verdict = check_proper(res.L, tol)
    out = {
        "L": pio.matrix_to_json(res.L),
        "k": res.k,
        "n": res.n,
        "verdict": verdict.to_json_dict(),
    }
    if args.verbose:
        out["closure_trace"] = [list(t) for t in res.closure_trace]
    _emit(json.dumps(out, indent=2) + "\n", args.output)
    return 0


def _cmd_reduce(args) -> int:
    pcs = pio.load_pcs_json(args.pcs, args.exact)
    validate_pcs(pcs)
    lump = _load_lumping(args.lumping, args.exact)
    red = reduce_pcs(pcs, lump, Tolerance(rank_rel=args.tol))
    out = {
        "k": red.k,
        "lower": pio.matrix_to_json(red.bounds.lower),
        "upper": pio.matrix_to_json(red.bounds.upper),
        "O": pio.matrix_to_json(red.O_red),
        "B": pio.matrix_to_json(red.B_red),
    }
    if red.U.upper is not None:
        out["u_max"] = [float(u) for u in red.U.upper]
    if red.y0 is not None:
        out["y0"] = [pio._entry_to_json(v) for v in red.y0]
    _emit(json.dumps(out, indent=2) + "\n", args.output)
    return 0


def _cmd_reconstruct(args) -> int:
    pcs = pio.load_pcs_json(args.pcs, args.exact)
    validate_pcs(pcs)
    lump = _load_lumping(args.lumping, args.exact)
    R = pio.control_from_json(args.schedule, args.exact)
    A = reconstruct_control(R, lump, pcs, Tolerance(rank_rel=args.tol))
    report = verify_reconstruction(A, R, lump, pcs)
    out = pio.control_to_json(A)
    out["verification"] = report.to_json_dict()
    _emit(json.dumps(out, indent=2) + "\n", args.output)
    return 0


def _cmd_simulate(args) -> int:
    system = pio.load_pcs_json(args.system, args.exact)
    drift = _load_drift(args.drift, system, args.exact)
    u = pio.control_from_json(args.input_sched, args.exact) if args.input_sched else None
    if u is not None:
        u = u.map_values(lambda v: np.asarray(v, dtype=float).ravel())
    traj = simulate(system, drift, u, x0=_parse_x0(args.x0), tau=args.tau, h=args.step)
    _emit(traj.to_csv(), args.output)
    return 0


def _cmd_verify(args) -> int:
    pcs = pio.load_pcs_json(args.pcs, args.exact)
    validate_pcs(pcs)
    lump = _load_lumping(args.lumping, args.exact)
    drift = _load_drift(args.drift, pcs, args.exact)
    u = pio.control_from_json(args.input_sched, args.exact) if args.input_sched else None
    if u is not None:
        u = u.map_values(lambda v: np.asarray(v, dtype=float).ravel())
    rep = verify_trajectory_equivalence(
        pcs, lump, drift, u, x0=_parse_x0(args.x0), tau=args.tau, h=args.step
    )
    ok = rep.reduced_in_bounds and rep.max_deviation <= args.max_deviation
    out = {
        "max_deviation": rep.max_deviation,
        "reduced_in_bounds": rep.reduced_in_bounds,
        "threshold": args.max_deviation,
        "ok": ok,
    }
    _emit(json.dumps(out, indent=2) + "\n", args.output)
    return 0 if ok else 1


def _cmd_values(args) -> int:
    system = pio.load_pcs_json(args.system, args.exact)
    cost = _cost_from_name(args.cost, system)
    x0 = _parse_x0(args.x0)
    if x0 is None:
        x0 = system.x0
    vb = approx_values(
        system,
        cost,
        x0,
        tau=args.tau,
        switch_points=args.switch_points,
        corner_budget=args.corner_budget,
        seed=args.seed,
        h=args.step,
    )
    _emit(json.dumps(vb.to_json_dict(), indent=2) + "\n", args.output)
    return 0


def _cmd_bench(args) -> int:
    paths = []
    for p in args.paths:
        p = Path(p)
        if p.is_dir():
            paths.extend(sorted(p.glob("*.edges")))
        else:
            paths.append(p)
    rep = run_benchmark(
        paths,
        perturbation=args.perturbation,
        timeout=args.timeout,
        jobs=args.jobs,
        tol=Tolerance(rank_rel=args.tol),
    )
    with_timing = not args.no_timing
    if args.format == "csv":
        text = rep.to_csv(with_timing)
    elif with_timing:
        text = json.dumps(rep.to_json_dict(True), indent=2) + "\n"
    else:
        text = rep.canonical_json()
    _emit(text, args.output)
    return 0


_COMMANDS = {
    "lump": _cmd_lump,
    "reduce": _cmd_reduce,
    "reconstruct": _cmd_reconstruct,
    "simulate": _cmd_simulate,
    "verify": _cmd_verify,
    "values": _cmd_values,
    "bench": _cmd_bench,
}


def cli_main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        sys.stderr.write(f"error: {exc}\n\n")
        parser.print_help(sys.stderr)
        return 1
    try:
        return _COMMANDS[args.command](args)
    except (PoslumpError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except Exception as exc:  # pragma: no cover - defensive
        sys.stderr.write(f"internal error: {type(exc).__name__}: {exc}\n")
        return 2


def main() -> int:
    return cli_main()


if __name__ == "__main__":
    sys.exit(main())
