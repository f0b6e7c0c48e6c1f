"""Predictor-corrector continuation with stepsize control, automatic
parametrization switching, detection and bisection localization of
bifurcation and fold points, and user-target parameter output.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linsolve, problem
from .linsolve import SingularMatrixError


class ContinuationError(RuntimeError):
    pass


@dataclass
class BranchRecord:
    count: int
    ptype: int
    pars: list          # active parameter values, primary first
    ineg: int
    err: float = 0.0    # placeholder, no error estimator wired in
    l2norm: float = 0.0
    usr: int = 0        # 1 when the point is a user-target parameter hit
    user: list = field(default_factory=list)


# ---------------------------------------------------------------------------
# correctors

def nloop(state, U):
    """Newton at fixed primary parameter: square system in (u, wtilde).

    Returns {"U", "res", "iter", "converged"}; chord variant (switches.newt=1)
    freezes the Jacobian at entry.
    """
    U = np.array(U, dtype=float)
    n = state.nu + state.nq
    tol, imax = state.controls.tol, state.controls.imax
    chord = state.switches.newt == 1
    cache = linsolve.FactorCache()
    r = problem.residual(state, U)
    res = _norm(r)
    it = 0
    J = None
    while res > tol and it < imax:
        try:
            if J is None or not chord:
                J = problem.jacobian_active(state, U)[:, :n].tocsc()
            dy = linsolve.lss(J, -r, cache=cache,
                              key="chord" if chord else None)
        except SingularMatrixError:
            return {"U": U, "res": res, "iter": it, "converged": False}
        y = problem.pack_active(state, U)
        y[:n] += dy
        U = problem.apply_active(state, U, y)
        r = problem.residual(state, U)
        res = _norm(r)
        it += 1
    return {"U": U, "res": res, "iter": it, "converged": bool(res <= tol)}


def nloopext(state, U_pred, ds, U_base=None, tau=None):
    """Newton for the extended system (G, q, arclength); one bordered solve
    per iteration.  U_base/tau default to the state's current point/tangent."""
    U = np.array(U_pred, dtype=float)
    U_base = state.u if U_base is None else U_base
    tau = state.tau if tau is None else tau
    tol, imax = state.controls.tol, state.controls.imax
    chord = state.switches.newt == 1
    cache = linsolve.FactorCache()
    w = problem.weights_vector(state)
    y_base = problem.pack_active(state, U_base)
    border = w * tau

    def p_res(Uc):
        return float(border @ (problem.pack_active(state, Uc) - y_base)) - ds

    r = problem.residual(state, U)
    res = max(_norm(r), abs(p_res(U)))
    it = 0
    A = None
    while res > tol and it < imax:
        try:
            if A is None or not chord:
                A = problem.jacobian_active(state, U)
            dy = linsolve.blss(A, border, -p_res(U), -r, cache=cache,
                               key="chord" if chord else None)
        except SingularMatrixError:
            return {"U": U, "res": res, "iter": it, "converged": False}
        y = problem.pack_active(state, U) + dy
        U = problem.apply_active(state, U, y)
        r = problem.residual(state, U)
        res = max(_norm(r), abs(p_res(U)))
        it += 1
    return {"U": U, "res": res, "iter": it, "converged": bool(res <= tol)}


# ---------------------------------------------------------------------------
# tangents and spectra

def compute_tangent(state, U, tau_old):
    """New tangent from the bordered system J tau = 0, <w tau_old, tau> = 1,
    normalized in the weighted product with continuity of direction."""
    A = problem.jacobian_active(state, U)
    w = problem.weights_vector(state)
    tau = linsolve.blss(A, w * tau_old, 1.0, np.zeros(state.nu + state.nq))
    tau /= np.sqrt(problem.weighted_dot(state, tau, tau))
    if problem.weighted_dot(state, tau, tau_old) < 0:
        tau = -tau
    return tau


def point_spectrum(state, U):
    """Near-zero spectrum of the PDE-block Jacobian at U (base block when
    running a fold/branch-point continuation)."""
    if state.mode == "spcont":
        from . import spcont as _spcont
        Gu, M = _spcont.base_pde_block(state, U)
    else:
        Gu, M = problem.pde_jacobian_u(state, U), state.ops.M
    return linsolve.spectrum_near_zero(Gu, M, state.controls.neig)


def _l2norm(state, U):
    u = U[:state.nu]
    if state.mode == "spcont":
        from . import spcont as _spcont
        return _spcont.base_l2norm(state, U)
    return float(np.sqrt(abs(u @ (state.ops.M @ u))))


def make_record(state, U, ptype, ineg, usr=0):
    pars = [float(U[state.nu + i - 1]) for i in state.ilam]
    user, out = [], state.callbacks.outfu
    if out is not None:
        user = [float(v) for v in np.atleast_1d(out(state, U))]
    return BranchRecord(count=state.file.count, ptype=ptype, pars=pars,
                        ineg=ineg, l2norm=_l2norm(state, U), usr=usr, user=user)


# ---------------------------------------------------------------------------
# stepsize control

def stepsize_update(state, it, failed):
    """Halve on failure (floor dsmin); grow by dsincfac after fast convergence,
    capped by dsmax and by the primary-parameter move dlammax."""
    nc = state.controls
    ds = state.sol.ds
    if failed:
        state.sol.ds = ds / 2.0
        return state.sol.ds
    if it < nc.dsinciter:
        ds = np.sign(ds) * min(abs(ds) * nc.dsincfac, nc.dsmax)
    lamd = abs(state.tau[-1]) if state.tau is not None else 0.0
    if lamd > 0 and abs(ds) * lamd > nc.dlammax:
        ds = np.sign(ds) * nc.dlammax / lamd
    state.sol.ds = ds
    return ds


# ---------------------------------------------------------------------------
# bisection localization

def _predict(state, y_l, tau_l, y_r, ds_br, s):
    """Predictor inside a bracket of arclength ds_br at position s from the
    left point: 0 tangent, 1 secant, 2 quadratic (default)."""
    mode = state.switches.bifloc
    if mode == 0:
        return y_l + s * tau_l
    if mode == 1:
        return y_l + (s / ds_br) * (y_r - y_l)
    quad = (y_r - y_l - ds_br * tau_l) / ds_br**2
    return y_l + s * tau_l + s**2 * quad


def bisect_special_point(state, left, right, kind):
    """Shrink a bracket [left, right] (dicts with U, tau, ineg, ds to the
    right point) around an ineg change (bifurcation) or a tangent-alpha sign
    change (fold).  Returns the located point dict with "warn" set on
    corrector failure inside the bisection."""
    nc = state.controls
    left, right = dict(left), dict(right)
    warn = False

    def indicator(pt):
        if kind == "fold":
            return pt["tau"][-1] > 0
        return pt["ineg"]

    for _ in range(nc.bisecmax):
        ds_br = left["ds"]
        if abs(ds_br) / 2.0 < nc.dsminbis:
            break
        s = ds_br / 2.0
        y_l = problem.pack_active(state, left["U"])
        y_r = problem.pack_active(state, right["U"])
        y_pred = _predict(state, y_l, left["tau"], y_r, ds_br, s)
        U_pred = problem.apply_active(state, left["U"], y_pred)
        res = nloopext(state, U_pred, s, U_base=left["U"], tau=left["tau"])
        if not res["converged"]:
            warn = True
            break
        U_mid = res["U"]
        tau_mid = compute_tangent(state, U_mid, left["tau"])
        mid = {"U": U_mid, "tau": tau_mid,
               "ineg": point_spectrum(state, U_mid)["ineg"], "ds": ds_br / 2.0}
        if indicator(mid) != indicator(left):
            right = mid
            left["ds"] = ds_br / 2.0
        else:
            left = mid
    # the right endpoint is past the crossing; report it as the located point
    out = dict(right)
    out["warn"] = warn
    return out


# ---------------------------------------------------------------------------
# main driver

def cont(state, nsteps=None):
    """Continue the branch: predictor -> corrector -> spectrum -> detection ->
    record/save -> stepsize update -> user-target interception."""
    from . import io as _io

    nc, sw = state.controls, state.switches
    nsteps = nc.nsteps if nsteps is None else nsteps
    problem.init_weights(state)
    if state.uold is None:
        state.uold = state.u.copy()
    if state.tau is None:
        from . import switching as _switching
        _switching.getinitau(state)
    if state.sol.ineg < 0 and sw.spcalc:
        state.sol.ineg = point_spectrum(state, state.u)["ineg"]
    if not state.branch:
        state.branch.append(make_record(state, state.u, state.ptype,
                                        state.sol.ineg))
        _save(state, _io)

    steps = 0
    while steps < nsteps and state.total_steps < nc.ntot:
        lam0 = state.primary_value
        tau0 = state.tau
        # predictor + corrector, with stepsize halving on failure
        while True:
            ds = state.sol.ds
            y_pred = problem.pack_active(state, state.u) + ds * tau0
            U_pred = problem.apply_active(state, state.u, y_pred)
            natural = sw.para == 0 or (sw.para == 1
                                       and abs(tau0[-1]) > nc.lamdtol)
            if natural:
                result = nloop(state, U_pred)
            else:
                result = nloopext(state, U_pred, ds)
            if result["converged"]:
                state.sol.meth = "nat" if natural else "arc"
                break
            if abs(ds) / 2.0 < nc.dsmin:
                state.sol.restart = True
                return state
            stepsize_update(state, result["iter"], failed=True)

        U_new = result["U"]
        state.sol.iter = result["iter"]
        tau_new = compute_tangent(state, U_new, tau0)
        ineg_new = state.sol.ineg
        if sw.spcalc:
            spec = point_spectrum(state, U_new)
            ineg_new = spec["ineg"]
            state.sol.muv = spec["eigenvalues"]

        # detection + localization between the previous and the new point
        old_pt = {"U": state.u.copy(), "tau": tau0, "ineg": state.sol.ineg,
                  "ds": ds}
        new_pt = {"U": U_new, "tau": tau_new, "ineg": ineg_new, "ds": ds}
        if sw.bifcheck and state.sol.ineg >= 0 and ineg_new != state.sol.ineg:
            loc = bisect_special_point(state, old_pt, new_pt, "bifurcation")
            state.file.bcount += 1
            _record_special(state, loc, 1, f"bpt{state.file.bcount}", _io)
        if sw.foldcheck and (tau_new[-1] > 0) != (tau0[-1] > 0):
            loc = bisect_special_point(state, old_pt, new_pt, "fold")
            state.file.fcount += 1
            _record_special(state, loc, 2, f"fpt{state.file.fcount}", _io)

        # user-target parameter values crossed in this step
        lam1 = float(U_new[state.nu + state.ilam[0] - 1])
        for target in sorted(state.usrlam, key=lambda t: abs(t - lam0)):
            if min(lam0, lam1) < target <= max(lam0, lam1) and target != lam0:
                _converge_at_lambda(state, old_pt["U"], U_new, target, _io)

        # accept
        state.uold = state.u.copy()
        state.u = U_new
        state.tau = tau_new
        state.sol.ineg = ineg_new
        state.sol.lamd = float(tau_new[-1])
        state.ptype = 0
        state.file.count += 1
        state.total_steps += 1
        steps += 1
        state.branch.append(make_record(state, state.u, 0, ineg_new))
        _save(state, _io)
        stepsize_update(state, result["iter"], failed=False)

        if not (nc.lammin <= state.primary_value <= nc.lammax):
            return state
    return state


def _converge_at_lambda(state, U_a, U_b, target, io_mod):
    """Natural-parametrization solve at exactly the requested primary value,
    started from the linear interpolant between the bracketing points."""
    slot = state.nu + state.ilam[0] - 1
    lam_a, lam_b = U_a[slot], U_b[slot]
    t = (target - lam_a) / (lam_b - lam_a)
    U0 = (1 - t) * U_a + t * U_b
    U0[slot] = target
    res = nloop(state, U0)
    if not res["converged"]:
        return
    state.file.count += 1
    rec = make_record(state, res["U"], 0, state.sol.ineg, usr=1)
    state.branch.append(rec)
    if state.file.dir:
        snap = _snapshot(state, res["U"], 0)
        io_mod.save_point(snap, f"pt{state.file.count}")


def _record_special(state, loc, ptype, name, io_mod):
    state.file.count += 1
    rec = make_record(state, loc["U"], ptype, loc["ineg"])
    state.branch.append(rec)
    if state.file.dir:
        snap = _snapshot(state, loc["U"], ptype, tau=loc["tau"])
        io_mod.save_point(snap, name)


def _snapshot(state, U, ptype, tau=None):
    """Shallow copy of the state carrying a different point (for file output)."""
    import copy
    snap = copy.copy(state)
    snap.u = np.array(U, dtype=float)
    snap.tau = state.tau if tau is None else tau
    snap.ptype = ptype
    return snap


def _save(state, io_mod):
    if state.file.dir:
        io_mod.save_point(state, f"pt{state.file.count}")


def _norm(r):
    return float(np.linalg.norm(r, np.inf)) if len(r) else 0.0
