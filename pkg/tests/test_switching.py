import numpy as np
import pytest

from pdecont import demos, problem, switching
from pdecont.continuation import cont
from pdecont.switching import SwitchingError, findbif, getinitau, swibra

# small Dirichlet Allen-Cahn domain: first bifurcations of the trivial branch
# at lam_kl = c*((k*pi/2/lx)^2 + (l*pi/2/ly)^2) with c=0.25, lx=1, ly=0.9
def _lam(k, l):
    return 0.25 * ((k * np.pi / 2.0) ** 2 + (l * np.pi / 1.8) ** 2)


@pytest.fixture
def ac():
    return demos.make("acfold", {"nx": 18, "ny": 16})


def test_getinitau_trivial_branch(ac):
    getinitau(ac)
    tau = ac.tau
    assert np.isclose(problem.weighted_dot(ac, tau, tau), 1.0, atol=1e-10)
    assert tau[-1] > 0
    # on the trivial branch the solution does not move with lam
    assert np.abs(tau[:ac.nu]).max() <= 1e-8 * abs(tau[-1])


def test_findbif_locates_first_eigenvalue(ac):
    findbif(ac, 1)
    bifs = [r for r in ac.branch if r.ptype == 1]
    assert len(bifs) == 1
    assert abs(bifs[0].pars[0] - _lam(1, 1)) / _lam(1, 1) <= 0.02
    # stability index increments across the located point
    inegs = [r.ineg for r in ac.branch]
    assert inegs[0] == 0 and inegs[-1] >= 1


def test_findbif_respects_parameter_window(ac):
    ac.controls.lammax = 0.5 * _lam(1, 1)
    findbif(ac, 1)
    assert all(r.ptype != 1 for r in ac.branch)


def test_swibra_requires_bifurcation_point(ac):
    getinitau(ac)
    with pytest.raises(SwitchingError):
        swibra(ac, 0.1)


def test_swibra_tangent_properties(ac, tmp_path):
    ac.file.dir = str(tmp_path)
    findbif(ac, 1)
    from pdecont import io
    st = io.load_point(str(tmp_path), "bpt1")
    tau_old = np.array(st.tau)
    swibra(st, 0.1)
    z = st.tau
    # orthogonal to the old tangent and unit in the weighted product
    assert abs(problem.weighted_dot(st, z, tau_old)) <= 1e-8
    assert np.isclose(problem.weighted_dot(st, z, z), 1.0, atol=1e-8)
    assert st.ptype == -2
    assert st.branch == [] and st.file.count == 0
    # kernel quality: the active Jacobian nearly annihilates the new tangent
    A = problem.jacobian_active(st)
    scale = max(1.0, abs(A).max())
    assert np.abs(A @ z).max() <= 1e-6 * scale


def test_swibra_two_directions_give_mirror_branches(ac, tmp_path):
    ac.file.dir = str(tmp_path)
    findbif(ac, 1)
    from pdecont import io
    outs = []
    for ds in (0.05, -0.05):
        st = io.load_point(str(tmp_path), "bpt1")
        st.file.dir = ""
        swibra(st, ds)
        cont(st, 5)
        outs.append(st.u[:st.nu])
    # pitchfork of an odd nonlinearity: the two directions are sign mirrors
    assert np.allclose(outs[0], -outs[1], atol=1e-6)
    assert np.abs(outs[0]).max() > 1e-3      # genuinely nontrivial


def test_findbif_ladder_matches_eigenvalues(ac):
    findbif(ac, 3)
    bifs = sorted(r.pars[0] for r in ac.branch if r.ptype == 1)
    targets = sorted([_lam(1, 1), _lam(2, 1), _lam(1, 2)])
    assert len(bifs) == 3
    # discretization error on this deliberately coarse mesh is a few percent
    for got, want in zip(bifs, targets):
        assert abs(got - want) / want <= 0.04


def test_findbif_restores_switches(ac):
    ac.switches.bifcheck = 0
    ac.switches.spcalc = 0
    findbif(ac, 1)
    assert ac.switches.bifcheck == 0
    assert ac.switches.spcalc == 0
