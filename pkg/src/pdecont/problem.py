"""Problem definition: unknown vector U=(u,w), operator cache, residual and
Jacobian dispatch, parameter activation and the weighted arclength product.

The unknown vector stores the nodal PDE values (length nu, reduced when a
periodization is active) followed by all auxiliary variables.  The active
auxiliary variables are selected by the 1-based index list ilam; ilam[0] is
the primary continuation parameter.  Active vectors (tangents, predictor
corrections) are laid out (u, wtilde, alpha) with the primary last.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.sparse as sp

from . import fem, linsolve
from .mesh import Mesh
from .periodic import Periodization, build_periodization


class ProblemError(ValueError):
    pass


# ---------------------------------------------------------------------------
# controls / switches

@dataclass
class Controls:
    tol: float = 1e-10
    imax: int = 10
    del_: float = 1e-8
    dsmin: float = 1e-8
    dsmax: float = 0.1
    dsinciter: int = 5          # kept at imax // 2
    dsincfac: float = 2.0
    dlammax: float = 1.0
    lamdtol: float = 0.5
    dsminbis: float = 1e-9
    bisecmax: int = 10
    nsteps: int = 10
    ntot: int = 10000
    neig: int = 50
    lammin: float = -1e6
    lammax: float = 1e6
    xi: Optional[float] = None      # set to 1/nu at continuation start
    xiq: Optional[float] = None
    stiff_spring: float = 1e3


@dataclass
class Switches:
    bifcheck: int = 1
    foldcheck: int = 0
    spcalc: int = 1
    jac: int = 1          # 1 analytic, 0 numeric
    qjac: int = 1
    spjac: int = 1
    sfem: int = 0         # 0 full path, 1 semilinear fast path
    para: int = 1         # 0 natural, 1 automatic, 2 arclength
    bifloc: int = 2       # 0 tangent, 1 secant, 2 quadratic predictor
    bcper: int = 0
    spcont: int = 0       # 0 normal, 1 branch point, 2 fold continuation
    newt: int = 0         # 0 full, 1 chord Newton


@dataclass
class SolInfo:
    ds: float = 0.01
    xi: float = 1.0
    xiq: float = 1.0
    ineg: int = -1
    muv: Optional[np.ndarray] = None
    iter: int = 0
    lamd: float = 0.0
    meth: str = "arc"
    restart: bool = False


@dataclass
class FileInfo:
    dir: str = ""
    count: int = 0
    bcount: int = 0
    fcount: int = 0


@dataclass
class Callbacks:
    G: Optional[Callable] = None          # (state, U) -> CoeffTensors
    Gjac: Optional[Callable] = None       # (state, U) -> CoeffTensors for Gu
    bc: Optional[Callable] = None         # (state, U) -> BCSpec
    bcjac: Optional[Callable] = None
    sG: Optional[Callable] = None         # (state, U) -> residual vector (nu)
    sGjac: Optional[Callable] = None      # (state, U) -> sparse nu x nu
    qf: Optional[Callable] = None         # (state, U) -> (nq,)
    qjac: Optional[Callable] = None       # (state, U) -> (nq, nu)
    spjac: Optional[Callable] = None      # (state, u, phi, pars) -> sparse nu x nu
    outfu: Optional[Callable] = None      # (state, U) -> list of user columns
    outnames: Sequence[str] = ()


@dataclass
class OperatorCache:
    M: Optional[sp.csc_matrix] = None         # consistent mass (reduced space)
    K: Optional[sp.csc_matrix] = None         # stiffness from eqn tensors
    Kadv: Optional[sp.csc_matrix] = None
    Kdx: Optional[sp.csc_matrix] = None       # int (dx phi_j) phi_i, reduced
    Kdy: Optional[sp.csc_matrix] = None
    Q: Optional[sp.csc_matrix] = None         # boundary matrix snapshot
    Gb: Optional[np.ndarray] = None
    Mtl: Optional[sp.csc_matrix] = None       # full-mesh load operator
    C: Optional[sp.csc_matrix] = None         # full-mesh node -> triangle mean
    Fload: Optional[sp.csc_matrix] = None     # fill' * Mtl  (load from tri values)
    Ctri: Optional[sp.csc_matrix] = None      # C * fill (reduced nodal -> tri)
    per: Optional[Periodization] = None
    cache: linsolve.FactorCache = field(default_factory=linsolve.FactorCache)


@dataclass
class EqnTensors:
    """u-independent tensors for the semilinear operator setup."""
    c: object = 0.0
    a: object = 0.0
    b: object = 0.0


@dataclass
class ProblemState:
    name: str
    mesh: Mesh
    neq: int
    u: np.ndarray                        # (nu + naux,)
    parnames: Sequence[str]
    callbacks: Callbacks
    controls: Controls = field(default_factory=Controls)
    switches: Switches = field(default_factory=Switches)
    sol: SolInfo = field(default_factory=SolInfo)
    file: FileInfo = field(default_factory=FileInfo)
    eqn: EqnTensors = field(default_factory=EqnTensors)
    ops: OperatorCache = field(default_factory=OperatorCache)
    ilam: list = field(default_factory=lambda: [1])
    nq: int = 0
    tau: Optional[np.ndarray] = None     # (nu + nq + 1,)
    uold: Optional[np.ndarray] = None    # previous accepted u (phase conditions)
    branch: list = field(default_factory=list)
    usrlam: list = field(default_factory=list)
    timeseries: list = field(default_factory=list)
    ptype: int = -1
    total_steps: int = 0
    demo_config: dict = field(default_factory=dict)
    mode: str = "normal"                 # "normal" or "spcont"
    spdata: Optional[dict] = None        # extended-system bookkeeping

    @property
    def nu(self) -> int:
        if self.mode == "spcont":
            return 2 * self.spdata["nu_base"]
        per = self.ops.per
        return per.nu_per if per is not None else self.neq * self.mesh.npoints

    @property
    def naux(self) -> int:
        return len(self.u) - self.nu

    def pars(self) -> np.ndarray:
        return self.u[self.nu:]

    def getaux(self, name_or_index) -> float:
        return self.u[self.nu + self._aux_index(name_or_index)]

    def setaux(self, name_or_index, value: float):
        self.u[self.nu + self._aux_index(name_or_index)] = value

    def _aux_index(self, key) -> int:
        if isinstance(key, str):
            return list(self.parnames).index(key)
        return int(key) - 1          # 1-based like ilam

    @property
    def primary_value(self) -> float:
        return self.u[self.nu + self.ilam[0] - 1]


# ---------------------------------------------------------------------------
# operator setup

def setfemops(state: ProblemState):
    """(Re)assemble the cached operators; called at init and after bcper changes."""
    mesh, neq = state.mesh, state.neq
    per = build_periodization(mesh, neq, state.switches.bcper)
    n_full = neq * mesh.npoints
    state.ops.per = per
    fill = per.fill
    # reduce a full-mesh unknown vector to the identified node set
    naux = len(state.parnames)
    if len(state.u) == n_full + naux and per.nu_per != n_full:
        state.u = np.concatenate([per.drop @ state.u[:n_full],
                                  state.u[n_full:]])

    M = fem.assemble_mass(mesh, neq)
    state.ops.M = (fill.T @ M @ fill).tocsc()

    ct = fem.CoeffTensors(c=state.eqn.c, a=0.0, b=state.eqn.b, f=0.0)
    ops = fem.assemble_interior(mesh, ct, neq)
    state.ops.K = (fill.T @ ops["K"] @ fill).tocsc()
    state.ops.Kadv = (fill.T @ ops["Kadv"] @ fill).tocsc()

    for attr, bvec in (("Kdx", (1.0, 0.0)), ("Kdy", (0.0, 1.0))):
        b = np.zeros((neq, neq, 2))
        for k in range(neq):
            b[k, k] = bvec
        adv = fem.assemble_interior(mesh, fem.CoeffTensors(b=b), neq)["Kadv"]
        # Kadv folds in the minus sign; Kdx/Kdy are the plain derivative forms
        setattr(state.ops, attr, (-(fill.T @ adv @ fill)).tocsc())

    state.ops.Mtl = fem.load_operator(mesh, neq)
    state.ops.C = fem.interp_operator(mesh, neq)
    state.ops.Fload = (fill.T @ state.ops.Mtl).tocsc()
    state.ops.Ctri = (state.ops.C @ fill).tocsc()

    if state.callbacks.bc is not None:
        u_full = fill @ state.u[:state.nu]
        bdry = fem.assemble_boundary(mesh, state.callbacks.bc(state, state.u),
                                     u_full, state.pars(), neq)
        state.ops.Q = (fill.T @ bdry["Q"] @ fill).tocsc()
        state.ops.Gb = fill.T @ bdry["Gb"]
    else:
        n = state.nu
        state.ops.Q = sp.csc_matrix((n, n))
        state.ops.Gb = np.zeros(n)
    state.ops.cache.invalidate()


# ---------------------------------------------------------------------------
# residual / jacobian

def pde_residual(state: ProblemState, U: np.ndarray) -> np.ndarray:
    """Discrete G(u,w), length nu."""
    if state.mode == "spcont":
        from . import spcont as _spcont
        return _spcont.extended_pde_residual(state, U)
    if state.switches.sfem == 1:
        return np.asarray(state.callbacks.sG(state, U))
    return _full_residual(state, U)


def _full_residual(state: ProblemState, U: np.ndarray) -> np.ndarray:
    mesh, neq = state.mesh, state.neq
    per = state.ops.per
    u = U[:state.nu]
    u_full = per.fill @ u
    ct = state.callbacks.G(state, U).normalized(mesh.ntri, neq)
    ops = fem.assemble_interior(mesh, fem.CoeffTensors(ct.c, ct.a, ct.b), neq)
    A = ops["K"] + ops["Ma"] + ops["Kadv"]
    F = fem.assemble_load(mesh, ct.f.T, neq)
    r = A @ u_full - F
    if state.callbacks.bc is not None:
        bdry = fem.assemble_boundary(mesh, state.callbacks.bc(state, U),
                                     u_full, U[state.nu:], neq)
        r = r + bdry["Q"] @ u_full - bdry["Gb"]
    return per.fill.T @ r


def pde_jacobian_u(state: ProblemState, U: np.ndarray) -> sp.csc_matrix:
    """d(PDE residual)/du, sparse nu x nu."""
    if state.mode == "spcont":
        from . import spcont as _spcont
        return _spcont.extended_pde_jacobian_u(state, U)
    if state.switches.jac == 0:
        return _fd_jacobian_u(state, U)
    if state.switches.sfem == 1:
        return state.callbacks.sGjac(state, U).tocsc()
    return _full_jacobian_u(state, U)


def _full_jacobian_u(state: ProblemState, U: np.ndarray) -> sp.csc_matrix:
    mesh, neq = state.mesh, state.neq
    per = state.ops.per
    ct = state.callbacks.Gjac(state, U).normalized(mesh.ntri, neq)
    ops = fem.assemble_interior(mesh, fem.CoeffTensors(ct.c, ct.a, ct.b), neq)
    J = ops["K"] + ops["Ma"] + ops["Kadv"]
    if np.any(ct.fu):
        D = fem.tri_diag_operator(ct.fu, neq)
        J = J - state.ops.Mtl @ D @ state.ops.C
    if state.callbacks.bc is not None:
        bcj = state.callbacks.bcjac or state.callbacks.bc
        u_full = per.fill @ U[:state.nu]
        bdry = fem.assemble_boundary(mesh, bcj(state, U), u_full,
                                     U[state.nu:], neq)
        J = J + bdry["Q"]
    return (per.fill.T @ J @ per.fill).tocsc()


def _fd_jacobian_u(state: ProblemState, U: np.ndarray) -> sp.csc_matrix:
    delta = state.controls.del_
    r0 = pde_residual(state, U)
    cols = []
    for j in range(state.nu):
        Up = np.array(U, dtype=float)
        Up[j] += delta
        cols.append((pde_residual(state, Up) - r0) / delta)
    return sp.csc_matrix(np.column_stack(cols))


def aux_residual(state: ProblemState, U: np.ndarray) -> np.ndarray:
    if state.nq == 0:
        return np.zeros(0)
    if state.mode == "spcont":
        from . import spcont as _spcont
        return _spcont.extended_aux_residual(state, U)
    return np.atleast_1d(np.asarray(state.callbacks.qf(state, U), dtype=float))


def residual(state: ProblemState, U: np.ndarray | None = None) -> np.ndarray:
    """Stacked residual (G(u,w), q(U)), length nu + nq."""
    U = state.u if U is None else np.asarray(U, dtype=float)
    if len(U) != state.nu + state.naux:
        raise ProblemError(f"unknown vector has length {len(U)}, "
                           f"expected {state.nu + state.naux}")
    return np.concatenate([pde_residual(state, U), aux_residual(state, U)])


def aux_jacobian_u(state: ProblemState, U: np.ndarray) -> sp.csc_matrix:
    if state.nq == 0:
        return sp.csc_matrix((0, state.nu))
    if state.mode == "spcont":
        from . import spcont as _spcont
        return _spcont.extended_aux_jacobian_u(state, U)
    if state.switches.qjac == 1 and state.callbacks.qjac is not None:
        qj = state.callbacks.qjac(state, U)
        return sp.csc_matrix(np.atleast_2d(np.asarray(qj, dtype=float)))
    delta = state.controls.del_
    q0 = aux_residual(state, U)
    cols = []
    for j in range(state.nu):
        Up = np.array(U, dtype=float)
        Up[j] += delta
        cols.append((aux_residual(state, Up) - q0) / delta)
    return sp.csc_matrix(np.column_stack(cols))


def jacobian_active(state: ProblemState, U: np.ndarray | None = None) -> sp.csc_matrix:
    """Jacobian of (G, q) w.r.t. (u, wtilde, alpha), shape (nu+nq) x (nu+nq+1).

    Derivatives w.r.t. the active auxiliary variables are one-sided forward
    differences with step del.
    """
    U = state.u if U is None else np.asarray(U, dtype=float)
    Gu = pde_jacobian_u(state, U)
    Qu = aux_jacobian_u(state, U)
    Ju = sp.vstack([Gu, Qu], format="csc")

    delta = state.controls.del_
    r0 = residual(state, U)
    wcols = []
    for idx in state.ilam[1:] + state.ilam[:1]:     # wtilde first, alpha last
        Up = np.array(U, dtype=float)
        Up[state.nu + idx - 1] += delta
        wcols.append((residual(state, Up) - r0) / delta)
    W = sp.csc_matrix(np.column_stack(wcols)) if wcols else \
        sp.csc_matrix((state.nu + state.nq, 0))
    return sp.hstack([Ju, W], format="csc")


# ---------------------------------------------------------------------------
# active vector plumbing

def active_slots(state: ProblemState) -> list:
    """Positions in U of (wtilde..., alpha)."""
    return [state.nu + i - 1 for i in state.ilam[1:] + state.ilam[:1]]


def pack_active(state: ProblemState, U: np.ndarray) -> np.ndarray:
    """(u, wtilde, alpha) vector of length nu + nq + 1."""
    U = np.asarray(U, dtype=float)
    return np.concatenate([U[:state.nu], U[active_slots(state)]])


def apply_active(state: ProblemState, U: np.ndarray, y: np.ndarray) -> np.ndarray:
    Un = np.array(U, dtype=float)
    Un[:state.nu] = y[:state.nu]
    Un[active_slots(state)] = y[state.nu:]
    return Un


def weights_vector(state: ProblemState) -> np.ndarray:
    xi, xiq = state.sol.xi, state.sol.xiq
    w = np.empty(state.nu + state.nq + 1)
    w[:state.nu] = xi
    w[state.nu:state.nu + state.nq] = xiq
    w[-1] = 1.0 - (xi + xiq) / 2.0
    return w


def weighted_dot(state: ProblemState, a: np.ndarray, b: np.ndarray) -> float:
    """xi <u,v> + xiq <wtilde, ztilde> + (1-(xi+xiq)/2) alpha beta."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    n = state.nu + state.nq + 1
    if a.shape != (n,) or b.shape != (n,):
        raise ProblemError(f"weighted_dot expects length {n} vectors")
    return float(np.sum(weights_vector(state) * a * b))


def init_weights(state: ProblemState):
    """Default weights at continuation start: xi = 1/nu unless user-set."""
    if state.controls.xi is None:
        state.sol.xi = 1.0 / state.nu
    else:
        state.sol.xi = state.controls.xi
    if state.controls.xiq is None:
        state.sol.xiq = state.sol.xi if state.nq else 0.0
    else:
        state.sol.xiq = state.controls.xiq


# ---------------------------------------------------------------------------
# parameter switching

def swipar(state: ProblemState, ilam_new) -> ProblemState:
    """Select new active auxiliary variables; invalidates the tangent."""
    ilam_new = [int(i) for i in np.atleast_1d(ilam_new)]
    for i in ilam_new:
        if not 1 <= i <= state.naux:
            raise ProblemError(f"parameter index {i} out of range 1..{state.naux}")
    if len(set(ilam_new)) != len(ilam_new):
        raise ProblemError("ilam entries must be pairwise distinct")
    state.ilam = ilam_new
    state.tau = None
    return state
