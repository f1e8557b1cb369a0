"""Command line front end.

Exit codes: 0 success, 1 numerical failure (``error: <reason>: <message>`` on
stderr), 2 usage or I/O error.
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import plotting, storage
from .bifurcation import find_bifurcation
from .boundary import BranchKind, evaluate, newton_correct
from .continuation import StopPolicy, ToleranceConfig, orient, trace_branch
from .dynamics import ExtendedState, Parameters, ReducedState, embed_positions
from .errors import IntegrationError, NoConvergence, NumericalError
from .fixtures import TABLE_ROWS
from .integrator import IntegratorConfig, integrate_to
from .periodic import full_trajectory, locate_rational_theta, verify_row

EXIT_OK, EXIT_NUMERICAL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def worker_count():
    raw = os.environ.get("ISO3BP_THREADS")
    if raw:
        try:
            n = int(raw)
        except ValueError:
            raise UsageError(f"ISO3BP_THREADS must be an integer, got {raw!r}") from None
        if n < 1:
            raise UsageError("ISO3BP_THREADS must be >= 1")
        return n
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else os.cpu_count() or 1


def _common():
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("numerics")
    g.add_argument("--tol-abs", type=float, default=1e-12)
    g.add_argument("--tol-rel", type=float, default=1e-12)
    g.add_argument("--taylor-order", type=int, default=20)
    g.add_argument("--eps1", type=float, default=1e-6)
    g.add_argument("--eps2", type=float, default=5e-5)
    g.add_argument("--eps3", type=float, default=5e-5)
    g.add_argument("--h", type=float, default=1e-3)
    g.add_argument("--k", type=int, default=200)
    g.add_argument("--orientation", type=int, choices=(1, -1), default=1)
    g.add_argument("--out", metavar="FILE")
    g.add_argument("--format", choices=("csv", "branch", "svg"))
    return p


def _seed_args(p):
    p.add_argument("--kind", default="odd-even", help="odd-even (S1) or odd (S2)")
    p.add_argument("--t", type=float, required=True, help="tau: quarter period (odd-even) or half period (odd)")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--b", type=float, required=True)


def build_parser():
    common = _common()
    parser = argparse.ArgumentParser(prog="iso3bp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("refine-seed", parents=[common], help="Newton-correct a seed point")
    _seed_args(p)

    p = sub.add_parser("trace-branch", parents=[common], help="continue a solution curve")
    _seed_args(p)
    p.add_argument("--max-pillars", type=int, default=StopPolicy.max_pillars)

    p = sub.add_parser("find-bifurcation", parents=[common], help="locate B on an S1 branch file")
    p.add_argument("branch")

    p = sub.add_parser("locate-periodic", parents=[common], help="find Theta(T) = p pi / q on a branch")
    p.add_argument("branch")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--samples", type=int, default=400)
    p.add_argument("--plot", metavar="SVG", help="also write an x-y projection")

    p = sub.add_parser("integrate", parents=[common], help="integrate one trajectory")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--t-end", type=float, required=True)
    p.add_argument("--samples", type=int, default=401)
    p.add_argument("--extended", action="store_true", help="include d/da and d/db columns")
    p.add_argument("--plot", metavar="SVG", help="also write F and R against t")

    p = sub.add_parser("verify-tables", parents=[common], help="check the bundled periodic-orbit tables")
    p.add_argument("--table", action="append", help="restrict to these table names")
    p.add_argument("--perturb-b", type=float, default=0.0, help=argparse.SUPPRESS)

    p = sub.add_parser("render", parents=[common], help="render a branch or trajectory file as SVG")
    p.add_argument("input")
    p.add_argument("--figure", choices=("fr", "xy", "branch"), default=None)
    p.add_argument("--projection", choices=("ab", "Tab"), default="ab")
    return parser


def _cfg(args):
    return IntegratorConfig(abs_tol=args.tol_abs, rel_tol=args.tol_rel,
                            taylor_order=args.taylor_order)


def _tol(args):
    return ToleranceConfig(eps1=args.eps1, eps2=args.eps2, eps3=args.eps3, h=args.h,
                           k=args.k, orientation=args.orientation)


def _emit(text, out):
    if out:
        try:
            Path(out).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise UsageError(f"cannot write {out}: {exc}") from exc
    else:
        sys.stdout.write(text)


def _write(path, text):
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc}") from exc


def _read_branch(path):
    try:
        return storage.read_branch(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    except storage.BranchFileError as exc:
        raise UsageError(f"{path}: {exc}") from exc


def _cell(v):
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _table(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_cell(v) for v in r])
    return buf.getvalue()


def cmd_refine_seed(args):
    kind = BranchKind.parse(args.kind)
    cfg = _cfg(args)
    seed = (args.t, args.a, args.b)
    try:
        ev = evaluate(seed, kind, cfg)
    except (IntegrationError, ValueError) as exc:
        raise NoConvergence(f"seed {list(seed)} not integrable: {exc}") from exc
    d = orient(ev.tangent) if np.linalg.norm(ev.tangent) > 0 else np.array([1.0, 0.0, 0.0])
    corr = newton_correct(seed, kind, d, eps1=args.eps1, cfg=cfg)
    pt = corr.point
    print(_table(["kind", "tau", "a", "b", "residual", "iterations", "moved"],
                 [[kind.value, pt.tau, pt.a, pt.b, pt.residual_norm, corr.iterations, corr.moved]]),
          end="")
    return EXIT_OK


def cmd_trace_branch(args):
    kind = BranchKind.parse(args.kind)
    stop = StopPolicy(max_pillars=args.max_pillars)
    branch = trace_branch((args.t, args.a, args.b), kind, _tol(args), stop, _cfg(args))
    out = args.out or "branch.txt"
    _write(out, storage.dumps_branch(branch))
    end = branch.points[-1] if branch.points else None
    rows = [[kind.value, len(branch.pillars), len(branch.points), branch.termination]
            + ([end.period, end.a, end.b] if end else ["", "", ""])]
    print(_table(["kind", "pillars", "points", "termination", "T_end", "a_end", "b_end"], rows), end="")
    if branch.detail:
        print(f"detail: {branch.detail}", file=sys.stderr)
    return EXIT_OK


def cmd_find_bifurcation(args):
    branch = _read_branch(args.branch)
    rep = find_bifurcation(branch, _cfg(args))
    T, a, b = rep.full_period_coords
    print(_table(["T", "a", "b", "z_norm"], [[T, a, b, rep.z_norm]]), end="")
    return EXIT_OK


def cmd_locate_periodic(args):
    if args.q == 0:
        raise UsageError("--q must be nonzero")
    branch = _read_branch(args.branch)
    cfg = _cfg(args)
    rec = locate_rational_theta(branch, args.p, args.q, cfg)
    print(_table(["kind", "T", "a", "b", "theta_T", "target", "closure_error"],
                 [[rec.kind.value, rec.T, rec.a, rec.b, rec.theta_T, f"{rec.target}",
                   rec.closure_error]]), end="")
    if args.out or args.plot:
        traj = full_trajectory(rec, 1, args.samples, cfg)
        if args.out:
            text = (plotting.xy_figure(traj.positions) if args.format == "svg"
                    else storage.dumps_trajectory(traj.t, traj.states))
            _write(args.out, text)
        if args.plot:
            _write(args.plot, plotting.xy_figure(traj.positions))
    return EXIT_OK


def cmd_integrate(args):
    if args.samples < 2:
        raise UsageError("--samples must be >= 2")
    cfg = _cfg(args)
    p = Parameters(args.a, args.b)
    s0 = ExtendedState.initial(p) if args.extended else ReducedState.initial(p)
    _, dense = integrate_to(s0, p, args.t_end, cfg, want_dense=True)
    t = np.linspace(0.0, args.t_end, args.samples)
    states = dense.sample(t)
    if args.format == "svg":
        _emit(plotting.fr_figure(t, states), args.out)
    else:
        _emit(storage.dumps_trajectory(t, states), args.out)
    if args.plot:
        _write(args.plot, plotting.fr_figure(t, states))
    return EXIT_OK


def _verify(job):
    row, cfg, shift = job
    try:
        return verify_row(row, cfg, b_shift=shift), None
    except NumericalError as exc:
        return None, f"{exc.reason}: {exc}"


def cmd_verify_tables(args):
    cfg = _cfg(args)
    rows = [r for r in TABLE_ROWS if not args.table or r.table in args.table]
    if not rows:
        raise UsageError(f"no rows in tables {args.table}")
    jobs = [(r, cfg, args.perturb_b) for r in rows]
    n = min(worker_count(), len(jobs))
    if n > 1:
        with ProcessPoolExecutor(max_workers=n) as pool:
            results = list(pool.map(_verify, jobs))
        # map keeps submission order, so output stays in row order
    else:
        results = [_verify(j) for j in jobs]
    header = ["row", "status", "T", "dT", "theta_over_pi", "target", "closure", "quarter_defect"]
    out, failed = [], []
    for row, (rep, err) in zip(rows, results):
        if rep is None:
            status = "advisory-fail" if row.advisory else "FAIL"
            out.append([row.label, status, "", "", "", f"{row.theta_over_pi}", err, ""])
            ok = False
        else:
            ok = rep.passed
            status = "pass" if ok else ("advisory-fail" if row.advisory else "FAIL")
            out.append([row.label, status, rep.T, rep.T - rep.T_printed, rep.theta / math.pi,
                        f"{row.theta_over_pi}", rep.closure, rep.symmetry.quarter_defect])
        if not ok and not row.advisory:
            failed.append(row.label)
    _emit(_table(header, out), args.out)
    if failed:
        print(f"error: table-regression: failing rows {' '.join(failed)}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_render(args):
    path = Path(args.input)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    if text.startswith(storage.MAGIC):
        try:
            branch = storage.loads_branch(text)
        except storage.BranchFileError as exc:
            raise UsageError(f"{path}: {exc}") from exc
        if args.figure not in (None, "branch"):
            raise UsageError("branch files render only as --figure branch")
        svg = plotting.branch_figure([branch], args.projection)
    else:
        try:
            t, states = storage.loads_trajectory(text)
        except ValueError as exc:
            raise UsageError(f"{path}: {exc}") from exc
        figure = args.figure or "fr"
        if figure == "fr":
            svg = plotting.fr_figure(t, states)
        elif figure == "xy":
            pos = np.array([embed_positions(ReducedState(ti, x[:5])).as_array()
                            for ti, x in zip(t, states)])
            svg = plotting.xy_figure(pos)
        else:
            raise UsageError("trajectory files render as --figure fr or xy")
    _emit(svg, args.out)
    return EXIT_OK


COMMANDS = {
    "refine-seed": cmd_refine_seed,
    "trace-branch": cmd_trace_branch,
    "find-bifurcation": cmd_find_bifurcation,
    "locate-periodic": cmd_locate_periodic,
    "integrate": cmd_integrate,
    "verify-tables": cmd_verify_tables,
    "render": cmd_render,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: usage: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"error: {exc.reason}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"error: usage: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
