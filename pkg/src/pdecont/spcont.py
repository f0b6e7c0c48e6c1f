"""Fold and branch-point continuation in two parameters.

The extended system couples the PDE residual G(u,w), the kernel condition
(d_u G) phi = 0 and the normalization phi' M phi = 1; the kernel vector phi
is appended to the unknown vector, the normalization acts as the auxiliary
equation paired with the second freed parameter, and the generic arclength
machinery closes the system.
"""

from __future__ import annotations

from contextlib import contextmanager

import numpy as np
import scipy.sparse as sp

from . import linsolve, problem


class SpcontError(RuntimeError):
    pass


@contextmanager
def base_view(state):
    """Temporarily expose the state as its normal (non-extended) problem so
    the base residual/Jacobian callbacks can be evaluated."""
    state.mode = "normal"
    try:
        yield
    finally:
        state.mode = "spcont"


def split(state, U):
    """(u, phi, w) slices of an extended unknown vector."""
    nb = state.spdata["nu_base"]
    return U[:nb], U[nb:2 * nb], U[2 * nb:]


def base_vector(state, U):
    u, _, w = split(state, U)
    return np.concatenate([u, w])


# ---------------------------------------------------------------------------
# extended residual / Jacobian blocks (dispatched to from the problem module)

def extended_pde_residual(state, U):
    u, phi, w = split(state, U)
    Ub = np.concatenate([u, w])
    with base_view(state):
        G = problem.pde_residual(state, Ub)
        Gu = problem.pde_jacobian_u(state, Ub)
    return np.concatenate([G, Gu @ phi])


def extended_aux_residual(state, U):
    _, phi, _ = split(state, U)
    return np.array([float(phi @ (state.ops.M @ phi)) - 1.0])


def extended_pde_jacobian_u(state, U):
    u, phi, w = split(state, U)
    Ub = np.concatenate([u, w])
    with base_view(state):
        Gu = problem.pde_jacobian_u(state, Ub)
    if state.switches.spjac and state.callbacks.spjac is not None:
        S = state.callbacks.spjac(state, u, phi, w).tocsc()
    else:
        S = _fd_second_block(state, U, Gu)
    return sp.bmat([[Gu, None], [S, Gu]], format="csc")


def _fd_second_block(state, U, Gu):
    """Forward differences of the Jacobian-vector product d_u G * phi."""
    u, phi, w = split(state, U)
    nb = len(u)
    delta = state.controls.del_
    base = Gu @ phi
    cols = np.empty((nb, nb))
    for j in range(nb):
        up = np.array(u)
        up[j] += delta
        with base_view(state):
            Gup = problem.pde_jacobian_u(state, np.concatenate([up, w]))
        cols[:, j] = (Gup @ phi - base) / delta
    return sp.csc_matrix(cols)


def extended_aux_jacobian_u(state, U):
    _, phi, _ = split(state, U)
    nb = len(phi)
    row = np.concatenate([np.zeros(nb), 2.0 * (state.ops.M @ phi)])
    return sp.csc_matrix(row[None, :])


def base_pde_block(state, U):
    """PDE-block Jacobian and mass matrix of the underlying problem (used
    for the stability index along a fold/branch-point curve)."""
    with base_view(state):
        Gu = problem.pde_jacobian_u(state, base_vector(state, U))
    return Gu, state.ops.M


def base_l2norm(state, U):
    u, _, _ = split(state, U)
    return float(np.sqrt(abs(u @ (state.ops.M @ u))))


# ---------------------------------------------------------------------------
# entry / exit

def spcontini(state, extra_param_index, kerneltol=1e-2):
    """Enter fold (ptype=2) or branch-point (ptype=1) continuation.

    phi is initialized as the normalized near-zero eigenvector of the
    PDE-block Jacobian; the extra parameter becomes the new primary, the old
    primary stays active paired with the normalization equation.
    """
    if state.mode == "spcont":
        raise SpcontError("already in fold/branch-point continuation")
    if state.nq != 0:
        raise SpcontError("fold/branch-point continuation requires a base "
                          "problem without auxiliary equations")
    extra = int(extra_param_index)
    if not 1 <= extra <= state.naux:
        raise SpcontError(f"parameter index {extra} out of range")

    Gu = problem.pde_jacobian_u(state, state.u)
    spec = linsolve.spectrum_near_zero(Gu, state.ops.M,
                                       min(state.controls.neig, 10))
    mu = spec["eigenvalues"]
    if abs(mu[0]) > kerneltol:
        raise SpcontError(f"no near-zero eigenvalue (|mu|={abs(mu[0]):.2e}); "
                          "point is not a fold/branch point")
    phi = np.real(spec["eigenvectors"][:, 0])
    phi /= np.sqrt(abs(phi @ (state.ops.M @ phi)))
    i = int(np.argmax(np.abs(phi)))
    if phi[i] < 0:
        phi = -phi

    nb = state.nu
    old_primary = state.ilam[0]
    mode_code = 2 if state.ptype == 2 else 1
    state.u = np.concatenate([state.u[:nb], phi, state.u[nb:]])
    state.mode = "spcont"
    state.spdata = {"nu_base": nb, "old_primary": old_primary}
    state.nq = 1
    state.ilam = [extra, old_primary]
    state.switches.spcont = mode_code
    state.tau = None
    state.ptype = -1
    state.sol.ineg = -1
    state.branch = []
    state.file.count = state.file.bcount = state.file.fcount = 0
    return state


def spcontexit(state, primary_param_index=None):
    """Leave the extended system: strip phi, restore the normal layout with a
    single primary parameter, invalidate the tangent."""
    if state.mode != "spcont":
        raise SpcontError("state is not in fold/branch-point continuation")
    nb = state.spdata["nu_base"]
    primary = int(primary_param_index) if primary_param_index else state.ilam[1]
    state.u = np.concatenate([state.u[:nb], state.u[2 * nb:]])
    state.mode = "normal"
    state.spdata = None
    state.nq = 0
    state.ilam = [primary]
    state.switches.spcont = 0
    state.tau = None
    state.ptype = 0
    state.sol.ineg = -1
    state.branch = []
    state.file.count = state.file.bcount = state.file.fcount = 0
    return state


# ---------------------------------------------------------------------------
# verification helper

def spjac_check(state, u=None, phi=None):
    """Max-entry difference between the analytic d_u(d_u G phi) provider and
    forward differences, on a normal-mode state."""
    if state.callbacks.spjac is None:
        raise SpcontError("no analytic second-derivative provider set")
    nb = state.nu
    U = np.array(state.u, dtype=float)
    if u is not None:
        U[:nb] = u
    if phi is None:
        x = state.ops.M @ np.ones(nb)
        phi = x / np.sqrt(abs(x @ (state.ops.M @ x)))
    w = U[nb:]
    S = state.callbacks.spjac(state, U[:nb], phi, w).toarray()

    delta = state.controls.del_
    Gu = problem.pde_jacobian_u(state, U)
    base = Gu @ phi
    Sn = np.empty_like(S)
    for j in range(nb):
        Up = U.copy()
        Up[j] += delta
        Sn[:, j] = (problem.pde_jacobian_u(state, Up) @ phi - base) / delta
    return float(np.max(np.abs(S - Sn)))
