import numpy as np
import pytest
import scipy.sparse.linalg as spla
from hypothesis import given, settings, strategies as st

from pdecont import demos, fem
from pdecont.mesh import build_rect_mesh

LX, LY = 1.0, 0.8
AREA = 4.0 * LX * LY
PERIM = 4.0 * (LX + LY)


@pytest.fixture(scope="module")
def mesh():
    return build_rect_mesh(LX, LY, 8, 6)


def test_mass_matrix_total_and_symmetry(mesh):
    M = fem.assemble_mass(mesh)
    assert np.isclose(M.sum(), AREA, atol=1e-12)
    assert abs(M - M.T).max() == 0.0
    # consistent mass: row sum equals the lumped nodal area, all positive
    rows = np.asarray(M.sum(axis=1)).ravel()
    assert np.all(rows > 0)
    assert np.isclose(rows.sum(), AREA, atol=1e-12)


def test_mass_matrix_block_diagonal(mesh):
    M1 = fem.assemble_mass(mesh)
    M2 = fem.assemble_mass(mesh, neq=2)
    n = mesh.npoints
    assert M2.shape == (2 * n, 2 * n)
    assert abs(M2[:n, :n] - M1).max() == 0.0
    assert abs(M2[n:, n:] - M1).max() == 0.0
    assert abs(M2[:n, n:]).max() == 0.0


def test_stiffness_annihilates_constants(mesh):
    ops = fem.assemble_interior(mesh, fem.CoeffTensors(c=1.0))
    K = ops["K"]
    assert np.allclose(K @ np.ones(mesh.npoints), 0.0, atol=1e-12)
    assert abs(K - K.T).max() < 1e-13


def test_stiffness_dirichlet_energy_of_linear_field(mesh):
    # int |grad(ax + by)|^2 = (a^2 + b^2) * area, exactly for P1
    K = fem.assemble_interior(mesh, fem.CoeffTensors(c=1.0))["K"]
    a, b = 0.7, -1.3
    u = a * mesh.points[:, 0] + b * mesh.points[:, 1]
    assert np.isclose(u @ (K @ u), (a * a + b * b) * AREA, rtol=1e-12)


def test_anisotropic_diffusion_energy(mesh):
    c = np.zeros((1, 1, 2, 2))
    c[0, 0] = [[2.0, 0.0], [0.0, 5.0]]
    K = fem.assemble_interior(mesh, fem.CoeffTensors(c=c))["K"]
    a, b = 1.0, 1.0
    u = a * mesh.points[:, 0] + b * mesh.points[:, 1]
    assert np.isclose(u @ (K @ u), (2 * a * a + 5 * b * b) * AREA, rtol=1e-12)


def test_reaction_block_equals_mass(mesh):
    Ma = fem.assemble_interior(mesh, fem.CoeffTensors(a=1.0))["Ma"]
    M = fem.assemble_mass(mesh)
    assert abs(Ma - M).max() < 1e-14


def test_advection_of_linear_field(mesh):
    # residual term is -int (b . grad u) phi; for b=(1,0), u=x the total over
    # all test functions is -int 1 = -area
    b = np.zeros((1, 1, 2))
    b[0, 0] = [1.0, 0.0]
    Kadv = fem.assemble_interior(mesh, fem.CoeffTensors(b=b))["Kadv"]
    u = mesh.points[:, 0].copy()
    assert np.isclose((Kadv @ u).sum(), -AREA, rtol=1e-12)
    # constants are transported trivially
    assert np.allclose(Kadv @ np.ones(mesh.npoints), 0.0, atol=1e-12)


def test_load_and_load_operator_consistency(mesh):
    rng = np.random.default_rng(3)
    f = rng.standard_normal(mesh.ntri)
    F = fem.assemble_load(mesh, f)
    Mtl = fem.load_operator(mesh)
    assert np.allclose(F, Mtl @ f, atol=1e-14)
    # f = 1 integrates to the domain area
    assert np.isclose(fem.assemble_load(mesh, np.ones(mesh.ntri)).sum(),
                      AREA, atol=1e-12)


def test_interp_operator_exact_on_linear(mesh):
    C = fem.interp_operator(mesh)
    u = 2.0 * mesh.points[:, 0] - mesh.points[:, 1] + 0.5
    cent = mesh.points[mesh.triangles].mean(axis=1)
    assert np.allclose(C @ u, 2.0 * cent[:, 0] - cent[:, 1] + 0.5, atol=1e-13)


def test_tri_diag_operator_matches_dense(mesh):
    rng = np.random.default_rng(5)
    nt = mesh.ntri
    fu = rng.standard_normal((nt, 2, 2))
    D = fem.tri_diag_operator(fu, 2)
    v = rng.standard_normal(2 * nt)
    want = np.concatenate([
        fu[:, 0, 0] * v[:nt] + fu[:, 0, 1] * v[nt:],
        fu[:, 1, 0] * v[:nt] + fu[:, 1, 1] * v[nt:]])
    assert np.allclose(D @ v, want, atol=1e-13)


def test_boundary_neumann_is_zero(mesh):
    ops = fem.assemble_boundary(mesh, fem.neumann_bc(1),
                                np.zeros(mesh.npoints), np.zeros(3))
    assert ops["Q"].nnz == 0
    assert np.all(ops["Gb"] == 0.0)


def test_boundary_measures(mesh):
    bc = fem.BCSpec(q=lambda x, u, p, s: np.ones((len(x), 1, 1)),
                    g=lambda x, u, p, s: np.ones((len(x), 1)))
    ops = fem.assemble_boundary(mesh, bc, np.zeros(mesh.npoints), np.zeros(3))
    # sum of Q entries = int_boundary 1 ds = perimeter, same for Gb
    assert np.isclose(ops["Q"].sum(), PERIM, atol=1e-12)
    assert np.isclose(ops["Gb"].sum(), PERIM, atol=1e-12)


def test_stiff_spring_dirichlet_enforces_value(mesh):
    # -Delta u = 0 with u = 2 on the boundary -> u ~ 2 everywhere
    K = fem.assemble_interior(mesh, fem.CoeffTensors(c=1.0))["K"]
    bops = fem.assemble_boundary(mesh, fem.dirichlet_bc(1, value=2.0),
                                 np.zeros(mesh.npoints), np.zeros(3))
    u = spla.spsolve((K + bops["Q"]).tocsc(), bops["Gb"])
    assert np.allclose(u, 2.0, atol=1e-10)


def test_boundary_quadrature_midpoint_rule(mesh):
    # q(x) = x weight: Q row sums must integrate x over the boundary edges by
    # the midpoint rule, which is exact for this linear integrand
    bc = fem.BCSpec(q=lambda x, u, p, s: x[:, 0].reshape(-1, 1, 1),
                    g=lambda x, u, p, s: np.zeros((len(x), 1)))
    Q = fem.assemble_boundary(mesh, bc, np.zeros(mesh.npoints),
                              np.zeros(3))["Q"]
    # int_boundary x ds = 0 by symmetry of the rectangle
    assert np.isclose(Q.sum(), 0.0, atol=1e-12)


def test_coeff_broadcast_shapes(mesh):
    nt = mesh.ntri
    ct = fem.CoeffTensors(c=2.0, a=1.0).normalized(nt, 2)
    assert ct.c.shape == (nt, 2, 2, 2, 2)
    # scalar c -> isotropic diagonal blocks only
    assert np.all(ct.c[:, 0, 0, 0, 0] == 2.0)
    assert np.all(ct.c[:, 0, 1] == 0.0)
    assert np.all(ct.a[:, 0, 0] == 1.0) and np.all(ct.a[:, 0, 1] == 0.0)


def test_coeff_broadcast_errors(mesh):
    nt = mesh.ntri
    with pytest.raises(fem.AssemblyError):
        fem.CoeffTensors(b=1.0).normalized(nt, 1)     # nonzero scalar advection
    with pytest.raises(fem.AssemblyError):
        fem.CoeffTensors(f=np.ones(nt - 1)).normalized(nt, 1)
    # scalar-problem reduced shapes are accepted
    ct = fem.CoeffTensors(fu=np.ones(nt)).normalized(nt, 1)
    assert ct.fu.shape == (nt, 1, 1)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_load_operator_linearity(seed):
    m = build_rect_mesh(1.0, 1.0, 4, 3)
    Mtl = fem.load_operator(m)
    rng = np.random.default_rng(seed)
    f1, f2 = rng.standard_normal((2, m.ntri))
    a = float(rng.standard_normal())
    assert np.allclose(Mtl @ (a * f1 + f2), a * (Mtl @ f1) + Mtl @ f2,
                       atol=1e-11)


@pytest.mark.parametrize("demo", ["acfold", "schnak", "bratu", "nlbc",
                                  "acfront"])
def test_jaccheck_on_demos(demo):
    state = demos.make(demo)
    chk = fem.jaccheck(state)
    assert chk["maxdiff"] <= 1e-5, f"{demo}: maxdiff={chk['maxdiff']:.3e}"
