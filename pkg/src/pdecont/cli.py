"""Command-line surface: run/findbif/swibra/swipar/spcont/spcontexit,
time integration, plotting and consistency checks."""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import continuation, demos, fem, io, plot, problem, spcont, switching, \
    timeint


def _out_root():
    return os.environ.get("PDECONT_OUT", ".")


def _apply_params(state, params):
    for spec in params or []:
        if "=" not in spec:
            raise SystemExit(f"bad --param {spec!r}; expected name=value")
        name, val = spec.split("=", 1)
        state.setaux(name, float(val))
    return state


def _finish_run(state, out, steps):
    state.file.dir = out
    continuation.cont(state, steps)
    io.export_branch(state, os.path.join(out, "branch.csv"))
    print(f"{state.name}: {len(state.branch)} branch points, "
          f"{state.file.bcount} bifurcations, {state.file.fcount} folds "
          f"-> {out}")


def cmd_run(args):
    state = demos.make(args.demo)
    _apply_params(state, args.param)
    if args.ds is not None:
        state.sol.ds = args.ds
    if args.usrlam:
        state.usrlam = [float(v) for v in args.usrlam.split(",")]
    _finish_run(state, args.out or os.path.join(_out_root(), args.demo),
                args.steps)


def cmd_findbif(args):
    state = demos.make(args.demo)
    _apply_params(state, args.param)
    if args.ds is not None:
        state.sol.ds = args.ds
    state.file.dir = args.out or os.path.join(_out_root(), args.demo)
    switching.findbif(state, args.nbif)
    io.export_branch(state, os.path.join(state.file.dir, "branch.csv"))
    print(f"{state.name}: located {state.file.bcount} bifurcation point(s)")


def cmd_swibra(args):
    state = io.load_point(args.dir, args.point)
    switching.swibra(state, args.ds)
    _finish_run(state, args.out, args.steps)


def cmd_swipar(args):
    state = io.load_point(args.dir, args.point)
    problem.swipar(state, [int(i) for i in args.ilam.split(",")])
    if args.ds is not None:
        state.sol.ds = args.ds
    _finish_run(state, args.out, args.steps)


def cmd_spcont(args):
    state = io.load_point(args.dir, args.point)
    spcont.spcontini(state, args.extra)
    if args.ds is not None:
        state.sol.ds = args.ds
    _finish_run(state, args.out, args.steps)


def cmd_spcontexit(args):
    state = io.load_point(args.dir, args.point)
    spcont.spcontexit(state, args.primary)
    res = continuation.nloop(state, state.u)
    if not res["converged"]:
        raise SystemExit("corrector did not converge after exit")
    state.u = res["U"]
    if args.ds is not None:
        state.sol.ds = args.ds
    if args.steps:
        _finish_run(state, args.out, args.steps)
    else:
        state.file.dir = args.out
        io.save_point(state, "pt0")
        print(f"exited to normal continuation -> {args.out}/pt0")


def cmd_tint(args):
    state = io.load_point(args.dir, args.point)
    state.file.dir = args.out or state.file.dir
    if args.variant == "tints":
        # stiff operator from the u-independent tensor parts at the loaded
        # point; the load term stays explicit
        ct0 = state.callbacks.G(state, state.u).normalized(
            state.mesh.ntri, state.neq)
        ops0 = fem.assemble_interior(
            state.mesh, fem.CoeffTensors(ct0.c, ct0.a, ct0.b), state.neq)
        fill = state.ops.per.fill
        A = ops0["K"] + ops0["Ma"] + ops0["Kadv"]
        K = (fill.T @ A @ fill + state.ops.Q).tocsc()

        def forcing(s, u):
            U = np.concatenate([u, s.u[s.nu:]])
            ct = s.callbacks.G(s, U).normalized(s.mesh.ntri, s.neq)
            F = fem.assemble_load(s.mesh, ct.f.T, s.neq)
            return s.ops.per.fill.T @ F + s.ops.Gb
        timeint.tints(state, args.dt, args.nt, args.pmod, forcing, K=K)
    else:
        timeint.tint(state, args.dt, args.nt, args.pmod)
    t, res = state.timeseries[-1]
    print(f"t={t:g} residual={res:.3e}")


def cmd_plot(args):
    if args.what == "branch":
        tables = [io.read_branch_csv(os.path.join(d, "branch.csv"))
                  for d in args.inputs]
        plot.plot_branch(tables, args.x, args.y, args.out)
    else:
        directory, name = args.inputs[0], args.inputs[1]
        state = io.load_point(directory, name)
        plot.plot_solution(state, args.comp, args.out)
    print(f"wrote {args.out}")


def cmd_check(args):
    state = demos.make(args.demo)
    chk = fem.jaccheck(state)
    ok = chk["maxdiff"] <= 1e-5
    print(f"jaccheck {args.demo}: maxdiff={chk['maxdiff']:.3e} "
          f"{'ok' if ok else 'FAIL'}")
    if state.callbacks.spjac is not None:
        d = spcont.spjac_check(state)
        sp_ok = d <= 1e-5
        print(f"spjac {args.demo}: maxdiff={d:.3e} "
              f"{'ok' if sp_ok else 'FAIL'}")
        ok = ok and sp_ok
    if not ok:
        raise SystemExit(1)


def build_parser():
    ap = argparse.ArgumentParser(
        prog="pdecont",
        description="Continuation/bifurcation toolkit for 2D elliptic PDE "
                    "systems on rectangles")
    sub = ap.add_subparsers(dest="cmd", required=True)

    def add_common(p, out_required=False):
        p.add_argument("--steps", type=int, default=10)
        p.add_argument("--ds", type=float, default=None)
        p.add_argument("--out", required=out_required, default=None)

    p = sub.add_parser("run", help="continue a demo branch")
    p.add_argument("demo")
    add_common(p)
    p.add_argument("--param", action="append", metavar="NAME=VALUE")
    p.add_argument("--usrlam", default=None)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("findbif", help="locate bifurcation points")
    p.add_argument("demo")
    p.add_argument("--nbif", type=int, default=1)
    add_common(p)
    p.add_argument("--param", action="append", metavar="NAME=VALUE")
    p.set_defaults(func=cmd_findbif)

    p = sub.add_parser("swibra", help="switch branch at a bifurcation point")
    p.add_argument("dir")
    p.add_argument("point")
    add_common(p, out_required=True)
    p.set_defaults(func=cmd_swibra)

    p = sub.add_parser("swipar", help="change the active parameters")
    p.add_argument("dir")
    p.add_argument("point")
    p.add_argument("--ilam", required=True)
    add_common(p, out_required=True)
    p.set_defaults(func=cmd_swipar)

    p = sub.add_parser("spcont", help="fold/branch-point continuation")
    p.add_argument("dir")
    p.add_argument("point")
    p.add_argument("--extra", type=int, required=True)
    add_common(p, out_required=True)
    p.set_defaults(func=cmd_spcont)

    p = sub.add_parser("spcontexit", help="leave fold/branch-point "
                                          "continuation")
    p.add_argument("dir")
    p.add_argument("point")
    p.add_argument("--primary", type=int, default=None)
    p.add_argument("--steps", type=int, default=0)
    p.add_argument("--ds", type=float, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_spcontexit)

    for variant in ("tint", "tints"):
        p = sub.add_parser(variant, help="time integration")
        p.add_argument("dir")
        p.add_argument("point")
        p.add_argument("--dt", type=float, required=True)
        p.add_argument("--nt", type=int, required=True)
        p.add_argument("--pmod", type=int, default=10)
        p.add_argument("--out", default=None)
        p.set_defaults(func=cmd_tint, variant=variant)

    p = sub.add_parser("plot", help="branch or solution SVG")
    p.add_argument("what", choices=["branch", "sol"])
    p.add_argument("inputs", nargs="+")
    p.add_argument("--x", default=None)
    p.add_argument("--y", default="l2norm")
    p.add_argument("--comp", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("check", help="Jacobian consistency checks")
    p.add_argument("demo")
    p.set_defaults(func=cmd_check)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    if getattr(args, "cmd", None) == "plot" and args.what == "branch" \
            and args.x is None:
        args.x = None  # resolved below from the first table header
    try:
        if args.func is cmd_plot and args.what == "branch" and args.x is None:
            header, _ = io.read_branch_csv(
                os.path.join(args.inputs[0], "branch.csv"))
            args.x = header[2]       # first active parameter column
        args.func(args)
    except (demos.DemoError, io.IOError_, plot.PlotError,
            continuation.ContinuationError, switching.SwitchingError,
            spcont.SpcontError, timeint.TimeintError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
