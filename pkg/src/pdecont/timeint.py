"""Linearly implicit time integration of  d_t u = -G(u).

tint reassembles all operators at every step (general path); tints keeps
the stiff operator fixed and LU-factorizes Lambda = M + dt*K once, so each
step is a pair of sparse triangular solves.  Neither variant has error or
stepsize control.
"""

from __future__ import annotations

import numpy as np

from . import fem, linsolve, problem


class TimeintError(RuntimeError):
    pass


def tint(state, dt, nt, pmod=10):
    """nt linearly implicit steps with full reassembly at each u^n:
    (M + dt*A(u^n)) u^{n+1} = M u^n + dt*F(u^n), where A collects every
    assembled matrix term (diffusion, reaction, advection, boundary) and F
    the load and boundary-source terms.  Records the residual time series
    every pmod steps and writes snapshots when an output directory is set.
    """
    mesh, neq, per = state.mesh, state.neq, state.ops.per
    M = state.ops.M
    u = np.array(state.u[:state.nu], dtype=float)
    w = state.u[state.nu:]
    t = float(state.demo_config.get("time", 0.0))
    _record(state, t, first=True)
    for n in range(1, nt + 1):
        U = np.concatenate([u, w])
        ct = state.callbacks.G(state, U).normalized(mesh.ntri, neq)
        ops = fem.assemble_interior(mesh, fem.CoeffTensors(ct.c, ct.a, ct.b),
                                    neq)
        A = ops["K"] + ops["Ma"] + ops["Kadv"]
        F = fem.assemble_load(mesh, ct.f.T, neq)
        if state.callbacks.bc is not None:
            bdry = fem.assemble_boundary(mesh, state.callbacks.bc(state, U),
                                         per.fill @ u, w, neq)
            A = A + bdry["Q"]
            F = F + bdry["Gb"]
        Ar = (per.fill.T @ A @ per.fill).tocsc()
        Fr = per.fill.T @ F
        try:
            u = linsolve.lss(M + dt * Ar, M @ u + dt * Fr)
        except linsolve.SingularMatrixError as exc:
            raise TimeintError(f"linear solve failed at step {n}") from exc
        t += dt
        state.u[:state.nu] = u
        state.demo_config["time"] = t
        if n % pmod == 0 or n == nt:
            _record(state, t)
    return state


def tints(state, dt, nt, pmod, forcing, K=None, diagnostics=True):
    """Semilinear fast path: Lambda = M + dt*K factorized once, then
    u^{n+1} = Lambda^{-1} (M u^n + dt*f_n) with f_n = forcing(state, u^n),
    the assembled explicit forcing vector (load + boundary source).

    K defaults to the cached stiff operator including advection and boundary
    terms; pass an override matrix to keep parameter factors explicit in the
    forcing.  The factorization is cached per (dt, K) in the state's cache.
    """
    M = state.ops.M
    if K is None:
        K = state.ops.K + state.ops.Kadv + state.ops.Q
    Lam = (M + dt * K).tocsc()
    key = ("tints", float(dt), id(K))
    try:
        lu = state.ops.cache.factorize(Lam, key=key)
    except linsolve.SingularMatrixError as exc:
        raise TimeintError("stiff operator factorization failed") from exc

    u = np.array(state.u[:state.nu], dtype=float)
    t = float(state.demo_config.get("time", 0.0))
    _record(state, t, first=True, diagnostics=diagnostics)
    for n in range(1, nt + 1):
        u = lu.solve(M @ u + dt * forcing(state, u))
        if not np.all(np.isfinite(u)):
            raise TimeintError(f"non-finite solution at step {n}")
        t += dt
        state.u[:state.nu] = u
        state.demo_config["time"] = t
        if n % pmod == 0 or n == nt:
            _record(state, t, diagnostics=diagnostics)
    return state


def _record(state, t, first=False, diagnostics=True):
    if diagnostics:
        res = float(np.linalg.norm(problem.residual(state, state.u), np.inf))
        state.timeseries.append((t, res))
    if state.file.dir:
        from . import io as _io
        import os
        sub = os.path.join(state.file.dir, "pre")
        old = state.file.dir
        state.file.dir = sub
        try:
            _io.save_point(state, f"pt{len(state.timeseries) - 1}")
        finally:
            state.file.dir = old
