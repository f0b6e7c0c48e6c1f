"""Example problems, each returning a fully initialized ProblemState.

All nonlinear-interior demos carry both evaluation paths: the tensor
callbacks (G/Gjac) and the semilinear fast path (sG/sGjac) built from the
cached operators; both produce the identical discretization, with the
nonlinearity evaluated at triangle-mean solution values.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from . import problem
from .fem import BCSpec, CoeffTensors, dirichlet_bc
from .mesh import Mesh, build_rect_mesh, node_to_triangle
from .problem import Callbacks, EqnTensors, ProblemState


class DemoError(ValueError):
    pass


def _tri_values(state, u):
    """Triangle-mean values of the reduced nodal field, shape (neq, ntri)."""
    return (state.ops.Ctri @ u).reshape(state.neq, state.mesh.ntri)


def _minmax_out(state, U):
    nb = state.spdata["nu_base"] if state.mode == "spcont" else state.nu
    u = state.ops.per.fill @ U[:nb]
    n = state.mesh.npoints
    return [float(u[:n].max()), float(u[:n].min())]


def _build_state(name, mesh, neq, u0, pars, parnames, callbacks, config,
                 eqn_c=1.0):
    state = ProblemState(name=name, mesh=mesh, neq=neq,
                         u=np.concatenate([u0, np.asarray(pars, dtype=float)]),
                         parnames=parnames, callbacks=callbacks,
                         demo_config=dict(config))
    state.eqn = EqnTensors(c=eqn_c)
    return state


# ---------------------------------------------------------------------------
# cubic-quintic Allen-Cahn:  -c lap(u) - lam*u - u^3 + gam*u^5 = 0, Dirichlet

def init_acfold(config=None):
    cfg = {"lx": 1.0, "ly": 0.9, "nx": 60, "ny": 54,
           "lam": 1.0, "c": 0.25, "gam": 1.0}
    cfg.update(config or {})
    mesh = build_rect_mesh(cfg["lx"], cfg["ly"], cfg["nx"], cfg["ny"])

    def nonlin(U, state):
        lam, c, gam = U[state.nu:state.nu + 3]
        ut = _tri_values(state, U[:state.nu])[0]
        f = lam * ut + ut**3 - gam * ut**5
        fu = lam + 3 * ut**2 - 5 * gam * ut**4
        return c, f, fu

    def G(state, U):
        c, f, _ = nonlin(U, state)
        return CoeffTensors(c=c, f=f)

    def Gjac(state, U):
        c, _, fu = nonlin(U, state)
        return CoeffTensors(c=c, fu=fu)

    def bc(state, U):
        return dirichlet_bc(1, 0.0, stiff=state.controls.stiff_spring)

    def sG(state, U):
        c, f, _ = nonlin(U, state)
        u = U[:state.nu]
        return c * (state.ops.K @ u) + state.ops.Q @ u - state.ops.Gb \
            - state.ops.Fload @ f

    def sGjac(state, U):
        c, _, fu = nonlin(U, state)
        return (c * state.ops.K + state.ops.Q
                - state.ops.Fload @ sp.diags(fu) @ state.ops.Ctri).tocsc()

    def spjac(state, u, phi, w):
        gam = w[2]
        ut = _tri_values(state, u)[0]
        phit = _tri_values(state, phi)[0]
        fuu = 6 * ut - 20 * gam * ut**3
        return (-state.ops.Fload @ sp.diags(fuu * phit)
                @ state.ops.Ctri).tocsc()

    cb = Callbacks(G=G, Gjac=Gjac, bc=bc, bcjac=bc, sG=sG, sGjac=sGjac,
                   spjac=spjac, outfu=_minmax_out, outnames=("max", "min"))
    u0 = np.zeros(mesh.npoints)
    state = _build_state("acfold", mesh, 1, u0,
                         [cfg["lam"], cfg["c"], cfg["gam"]],
                         ("lambda", "c", "gamma"), cb, cfg)
    state.switches.sfem = 1
    state.usrlam = [3.5, 4.0]
    state.sol.ds = 0.1
    state.controls.dsmax = 0.1
    problem.setfemops(state)
    return state


# ---------------------------------------------------------------------------
# Schnakenberg:  d_t U = rho*D lap(U) + N(U) + sigma*(u-1/v)^2*(1,-1),
# D = diag(1, 60); optional comoving frame s*d_y U and phase condition

KC_SCHNAK = np.sqrt(np.sqrt(2.0) - 1.0)


def _schnak_f(ut, vt, lam, sigma):
    w = ut - 1.0 / vt
    f = np.stack([-ut + ut**2 * vt + sigma * w**2,
                  lam - ut**2 * vt - sigma * w**2])
    fu = np.empty((ut.shape[0], 2, 2))
    fu[:, 0, 0] = -1 + 2 * ut * vt + 2 * sigma * w
    fu[:, 0, 1] = ut**2 + 2 * sigma * w / vt**2
    fu[:, 1, 0] = -2 * ut * vt - 2 * sigma * w
    fu[:, 1, 1] = -(ut**2 + 2 * sigma * w / vt**2)
    return f, fu


def init_schnak(config=None):
    cfg = {"lx": 0.1, "ly": float(np.pi / KC_SCHNAK), "nx": 2, "ny": 40,
           "lam": 3.5, "rho": 1.0, "s": 0.0, "sigma": 0.0, "bcper": 0,
           "travel": False}
    cfg.update(config or {})
    mesh = build_rect_mesh(cfg["lx"], cfg["ly"], cfg["nx"], cfg["ny"])
    D = np.zeros((2, 2, 2, 2))
    D[0, 0] = np.eye(2)
    D[1, 1] = 60.0 * np.eye(2)

    def pieces(state, U):
        lam, rho, s, sigma = U[state.nu:state.nu + 4]
        ut, vt = _tri_values(state, U[:state.nu])
        f, fu = _schnak_f(ut, vt, lam, sigma)
        return lam, rho, s, sigma, f, fu

    def G(state, U):
        lam, rho, s, sigma, f, _ = pieces(state, U)
        b = np.zeros((2, 2, 2))
        b[0, 0] = (0.0, s)
        b[1, 1] = (0.0, s)
        return CoeffTensors(c=rho * D, b=b, f=f.T)

    def Gjac(state, U):
        lam, rho, s, sigma, _, fu = pieces(state, U)
        b = np.zeros((2, 2, 2))
        b[0, 0] = (0.0, s)
        b[1, 1] = (0.0, s)
        return CoeffTensors(c=rho * D, b=b, fu=fu)

    def sG(state, U):
        lam, rho, s, sigma, f, _ = pieces(state, U)
        u = U[:state.nu]
        return rho * (state.ops.K @ u) - s * (state.ops.Kdy @ u) \
            - state.ops.Fload @ f.ravel()

    def sGjac(state, U):
        lam, rho, s, sigma, _, fu = pieces(state, U)
        from .fem import tri_diag_operator
        Dmul = tri_diag_operator(fu, 2)
        return (rho * state.ops.K - s * state.ops.Kdy
                - state.ops.Fload @ Dmul @ state.ops.Ctri).tocsc()

    def spjac(state, u, phi, w):
        lam, rho, s, sigma = w[:4]
        ut, vt = _tri_values(state, u)
        p1, p2 = _tri_values(state, phi)
        wv = ut - 1.0 / vt
        f1uu = 2 * vt + 2 * sigma
        f1uv = 2 * ut + 2 * sigma / vt**2
        f1vv = 2 * sigma * (1.0 / vt**4 - 2 * wv / vt**3)
        S = np.empty((ut.shape[0], 2, 2))
        S[:, 0, 0] = f1uu * p1 + f1uv * p2
        S[:, 0, 1] = f1uv * p1 + f1vv * p2
        S[:, 1, 0] = -S[:, 0, 0]
        S[:, 1, 1] = -S[:, 0, 1]
        from .fem import tri_diag_operator
        return (-state.ops.Fload @ tri_diag_operator(S, 2)
                @ state.ops.Ctri).tocsc()

    def qf(state, U):
        uo = state.uold[:state.nu]
        return np.array([(state.ops.Kdy @ uo) @ U[:state.nu]])

    def qjac(state, U):
        uo = state.uold[:state.nu]
        return (state.ops.Kdy @ uo)[None, :]

    cb = Callbacks(G=G, Gjac=Gjac, sG=sG, sGjac=sGjac, spjac=spjac,
                   qf=qf, qjac=qjac, outfu=_minmax_out,
                   outnames=("max_u", "min_u"))
    state = _build_state("schnak", mesh, 2, np.zeros(2 * mesh.npoints),
                         [cfg["lam"], cfg["rho"], cfg["s"], cfg["sigma"]],
                         ("lambda", "rho", "s", "sigma"), cb, cfg, eqn_c=D)
    state.switches.sfem = 1
    state.switches.bcper = int(cfg["bcper"])
    state.sol.ds = -0.05
    state.controls.dsmax = 0.05
    problem.setfemops(state)
    set_schnak_homogeneous(state)
    if cfg["travel"]:
        schnak_travel_setup(state)
    return state


def set_schnak_homogeneous(state):
    """Install the homogeneous stationary state (u, v) = (lam, 1/lam)."""
    lam = state.u[state.nu + 0]
    npr = state.ops.per.np_per
    state.u[:npr] = lam
    state.u[npr:2 * npr] = 1.0 / lam
    return state


def init_schnaktravel(config=None):
    cfg = {"bcper": 1, "travel": True}
    cfg.update(config or {})
    return init_schnak(cfg)


def schnak_travel_setup(state):
    """Comoving-frame stage: wave speed s joins the active variables, paired
    with the phase condition <d_y u_old, u> = 0."""
    state.nq = 1
    state.ilam = [3, 2]
    state.tau = None
    state.uold = state.u.copy()
    return state


# ---------------------------------------------------------------------------
# Bratu:  -c lap(u) + 10(u - lam*exp(u)) = 0, zero-flux

def init_bratu(config=None):
    cfg = {"lx": 0.5, "ly": 0.5, "nx": 20, "ny": 20, "lam": 0.0, "c": 0.1}
    cfg.update(config or {})
    mesh = build_rect_mesh(cfg["lx"], cfg["ly"], cfg["nx"], cfg["ny"])

    def nonlin(U, state):
        lam, c = U[state.nu:state.nu + 2]
        ut = _tri_values(state, U[:state.nu])[0]
        f = 10.0 * (lam * np.exp(ut) - ut)
        fu = 10.0 * (lam * np.exp(ut) - 1.0)
        return c, f, fu

    def G(state, U):
        c, f, _ = nonlin(U, state)
        return CoeffTensors(c=c, f=f)

    def Gjac(state, U):
        c, _, fu = nonlin(U, state)
        return CoeffTensors(c=c, fu=fu)

    def sG(state, U):
        c, f, _ = nonlin(U, state)
        return c * (state.ops.K @ U[:state.nu]) - state.ops.Fload @ f

    def sGjac(state, U):
        c, _, fu = nonlin(U, state)
        return (c * state.ops.K
                - state.ops.Fload @ sp.diags(fu) @ state.ops.Ctri).tocsc()

    def spjac(state, u, phi, w):
        lam = w[0]
        ut = _tri_values(state, u)[0]
        phit = _tri_values(state, phi)[0]
        fuu = 10.0 * lam * np.exp(ut)
        return (-state.ops.Fload @ sp.diags(fuu * phit)
                @ state.ops.Ctri).tocsc()

    cb = Callbacks(G=G, Gjac=Gjac, sG=sG, sGjac=sGjac, spjac=spjac,
                   outfu=_minmax_out, outnames=("max", "min"))
    state = _build_state("bratu", mesh, 1, np.zeros(mesh.npoints),
                         [cfg["lam"], cfg["c"]], ("lambda", "c"), cb, cfg)
    state.switches.sfem = 1
    state.switches.foldcheck = 1
    state.sol.ds = 0.05
    state.controls.dsmax = 0.05
    problem.setfemops(state)
    return state


# ---------------------------------------------------------------------------
# Laplace on a disk with nonlinear boundary condition:
# -lap(u) = 0,  d_n u + lam*(0.5+x+y)*u*(1-u) = 0

def _disk_mesh(nx, ny):
    """Map the structured square mesh smoothly onto the unit disk; boundary
    nodes land exactly on the unit circle."""
    mesh = build_rect_mesh(1.0, 1.0, nx, ny)
    x, y = mesh.points[:, 0].copy(), mesh.points[:, 1].copy()
    mesh.points[:, 0] = x * np.sqrt(np.maximum(1.0 - y**2 / 2.0, 0.0))
    mesh.points[:, 1] = y * np.sqrt(np.maximum(1.0 - x**2 / 2.0, 0.0))
    return mesh


def init_nlbc(config=None):
    cfg = {"nx": 30, "ny": 30, "lam": 0.1}
    cfg.update(config or {})
    mesh = _disk_mesh(cfg["nx"], cfg["ny"])

    def G(state, U):
        return CoeffTensors(c=1.0)

    def bc(state, U):
        def q(x, um, pars, seg):
            lam = pars[0]
            out = np.empty((len(x), 1, 1))
            out[:, 0, 0] = lam * (0.5 + x[:, 0] + x[:, 1]) * (1.0 - um[:, 0])
            return out

        def g(x, um, pars, seg):
            return np.zeros((len(x), 1))
        return BCSpec(q, g)

    def bcjac(state, U):
        def q(x, um, pars, seg):
            lam = pars[0]
            out = np.empty((len(x), 1, 1))
            out[:, 0, 0] = lam * (0.5 + x[:, 0] + x[:, 1]) \
                * (1.0 - 2.0 * um[:, 0])
            return out

        def g(x, um, pars, seg):
            return np.zeros((len(x), 1))
        return BCSpec(q, g)

    cb = Callbacks(G=G, Gjac=G, bc=bc, bcjac=bcjac, outfu=_minmax_out,
                   outnames=("max", "min"))
    state = _build_state("nlbc", mesh, 1, np.zeros(mesh.npoints),
                         [cfg["lam"]], ("lambda",), cb, cfg)
    state.sol.ds = 0.05
    state.controls.dsmax = 0.05
    problem.setfemops(state)
    return state


# ---------------------------------------------------------------------------
# Bistable front:  -lap(u) - lam*u*(1-u)*(mu+u) - s*dx(u) = 0, zero-flux;
# freezing stage adds the phase condition <dx u_old, u_old - u> = 0

def init_acfront(config=None):
    cfg = {"lx": 25.0, "ly": 0.25, "nx": 250, "ny": 1,
           "lam": 1.0, "mu": 1.0, "s": 0.0}
    cfg.update(config or {})
    mesh = build_rect_mesh(cfg["lx"], cfg["ly"], cfg["nx"], cfg["ny"])

    def nonlin(U, state):
        lam, mu, s = U[state.nu:state.nu + 3]
        ut = _tri_values(state, U[:state.nu])[0]
        f = lam * (mu * ut + (1 - mu) * ut**2 - ut**3)
        fu = lam * (mu + 2 * (1 - mu) * ut - 3 * ut**2)
        return s, f, fu

    def G(state, U):
        s, f, _ = nonlin(U, state)
        b = np.zeros((1, 1, 2))
        b[0, 0] = (s, 0.0)
        return CoeffTensors(c=1.0, b=b, f=f)

    def Gjac(state, U):
        s, _, fu = nonlin(U, state)
        b = np.zeros((1, 1, 2))
        b[0, 0] = (s, 0.0)
        return CoeffTensors(c=1.0, b=b, fu=fu)

    def sG(state, U):
        s, f, _ = nonlin(U, state)
        u = U[:state.nu]
        return state.ops.K @ u - s * (state.ops.Kdx @ u) \
            - state.ops.Fload @ f

    def sGjac(state, U):
        s, _, fu = nonlin(U, state)
        return (state.ops.K - s * state.ops.Kdx
                - state.ops.Fload @ sp.diags(fu) @ state.ops.Ctri).tocsc()

    def spjac(state, u, phi, w):
        lam, mu = w[0], w[1]
        ut = _tri_values(state, u)[0]
        phit = _tri_values(state, phi)[0]
        fuu = lam * (2 * (1 - mu) - 6 * ut)
        return (-state.ops.Fload @ sp.diags(fuu * phit)
                @ state.ops.Ctri).tocsc()

    def qf(state, U):
        uo = state.uold[:state.nu]
        xd = state.ops.Kdx @ uo
        return np.array([xd @ (uo - U[:state.nu])])

    def qjac(state, U):
        uo = state.uold[:state.nu]
        return (-(state.ops.Kdx @ uo))[None, :]

    cb = Callbacks(G=G, Gjac=Gjac, sG=sG, sGjac=sGjac, spjac=spjac,
                   qf=qf, qjac=qjac, outfu=_minmax_out,
                   outnames=("max", "min"))
    mu = cfg["mu"]
    lam = cfg["lam"]
    width = np.sqrt(2.0) / (np.sqrt(lam) * (1.0 + mu))
    v0 = 0.5 * (1.0 + np.tanh(mesh.points[:, 0] / (2.0 * width)))
    u0 = -mu + (1.0 + mu) * v0
    state = _build_state("acfront", mesh, 1, u0,
                         [lam, mu, cfg["s"]], ("lambda", "mu", "s"), cb, cfg)
    state.switches.sfem = 1
    state.sol.ds = -0.02
    state.controls.dsmax = 0.02
    problem.setfemops(state)
    return state


def acfront_freeze(state):
    """Enter the comoving frame: speed s becomes active, mu the primary
    parameter, and the phase condition pins the front position."""
    state.nq = 1
    state.ilam = [2, 3]
    state.tau = None
    state.uold = state.u.copy()
    return state


# ---------------------------------------------------------------------------
# registry

DEMOS = {
    "acfold": init_acfold,
    "schnak": init_schnak,
    "schnaktravel": init_schnaktravel,
    "bratu": init_bratu,
    "nlbc": init_nlbc,
    "acfront": init_acfront,
}


def make(name, config=None):
    if name not in DEMOS:
        raise DemoError(f"unknown demo {name!r}; choose from "
                        f"{sorted(DEMOS)}")
    return DEMOS[name](config)
