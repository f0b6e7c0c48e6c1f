import numpy as np
import pytest

from pdecont import demos, problem
from pdecont.demos import DEMOS, DemoError, KC_SCHNAK, make


def test_registry_and_unknown_name():
    assert set(DEMOS) == {"acfold", "schnak", "schnaktravel", "bratu",
                          "nlbc", "acfront"}
    with pytest.raises(DemoError):
        make("nosuchdemo")


def test_acfold_trivial_state_is_exact():
    st = make("acfold", {"nx": 10, "ny": 10})
    assert np.abs(problem.residual(st)).max() == 0.0
    assert st.parnames == ("lambda", "c", "gamma")
    assert st.usrlam == [3.5, 4.0]


def test_schnak_wavenumber_and_homogeneous_state():
    assert KC_SCHNAK == pytest.approx(np.sqrt(np.sqrt(2.0) - 1.0))
    st = make("schnak")
    lam = st.getaux("lambda")
    npr = st.ops.per.np_per
    assert np.all(st.u[:npr] == lam)
    assert np.all(st.u[npr:2 * npr] == 1.0 / lam)
    # homogeneous state solves the reaction-diffusion system to roundoff
    assert np.abs(problem.residual(st)).max() <= 1e-10
    # quasi-1D strip tuned to one critical wavelength across
    assert st.demo_config["ly"] == pytest.approx(np.pi / KC_SCHNAK)
    assert st.demo_config["lx"] == pytest.approx(0.1)


def test_schnaktravel_periodic_setup():
    st = make("schnaktravel")
    assert st.switches.bcper == 1
    assert st.nq == 1 and st.ilam == [3, 2]
    assert st.uold is not None
    # the phase condition vanishes at the reference state
    assert abs(problem.aux_residual(st, st.u)[0]) <= 1e-10
    # reduced space dropped one row of nodes per component
    full = st.neq * st.mesh.npoints
    assert st.nu == full - st.neq * (st.mesh.nx + 1)


def test_bratu_trivial_state_and_switches():
    st = make("bratu")
    assert np.abs(problem.residual(st)).max() == 0.0
    assert st.switches.foldcheck == 1
    assert st.getaux("c") == 0.1


def test_nlbc_mesh_on_unit_disk():
    st = make("nlbc", {"nx": 12, "ny": 12})
    pts = st.mesh.points
    r = np.hypot(pts[:, 0], pts[:, 1])
    assert r.max() <= 1.0 + 1e-12
    bnodes = np.unique(st.mesh.edges)
    assert np.allclose(r[bnodes], 1.0, atol=1e-12)
    assert np.all(st.mesh.tri_areas() > 0)


def test_nlbc_trivial_solutions_exact():
    # u = 0 solves the problem for every lam; u = 1 kills the boundary term
    st = make("nlbc", {"nx": 12, "ny": 12})
    assert np.abs(problem.residual(st)).max() == 0.0
    U = np.array(st.u)
    U[:st.nu] = 1.0
    st.u = U
    problem.setfemops(st)          # refresh u-dependent boundary operators
    assert np.abs(problem.residual(st)).max() <= 1e-12


def test_acfront_profile_and_phase():
    st = make("acfront")
    u = st.u[:st.nu]
    # front connects -mu on the left to 1 on the right
    mu = st.getaux("mu")
    x = st.mesh.points[:, 0]
    assert u[np.argmin(x)] == pytest.approx(-mu, abs=1e-6)
    assert u[np.argmax(x)] == pytest.approx(1.0, abs=1e-6)
    demos.acfront_freeze(st)
    assert st.nq == 1 and st.ilam == [2, 3]
    assert abs(problem.aux_residual(st, st.u)[0]) <= 1e-12


def test_output_columns_are_field_extrema():
    st = make("acfold", {"nx": 8, "ny": 8})
    rng = np.random.default_rng(0)
    st.u[:st.nu] = rng.standard_normal(st.nu)
    vals = st.callbacks.outfu(st, st.u)
    u = st.u[:st.nu]
    assert vals[0] == pytest.approx(u.max())
    assert vals[1] == pytest.approx(u.min())
    assert st.callbacks.outnames == ("max", "min")


def test_config_overrides_apply():
    st = make("bratu", {"nx": 6, "ny": 4, "lam": 0.1, "c": 0.2})
    assert st.mesh.nx == 6 and st.mesh.ny == 4
    assert st.getaux("lambda") == 0.1
    assert st.getaux("c") == 0.2
    assert st.demo_config["nx"] == 6
