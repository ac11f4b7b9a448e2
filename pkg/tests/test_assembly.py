import numpy as np
import pytest
import scipy.linalg as sla

from platedecay.assembly import (assemble, assemble_load, build_dof_map,
                                 default_sigma, dump_coo, energy, sigma_floor,
                                 solve_static)
from platedecay.errors import (AssemblyStabilityError, InvalidArgumentError)
from platedecay.geometry import unit_square_domain
from platedecay.meshing import refine, triangulate
from platedecay.plate_forms import PlateMaterial, PolyField, bilinear_a

DOM = unit_square_domain(gamma0_edges=(0, 3))
MAT = PlateMaterial(mu=0.3, rho=1.0, inertia=1.0, d1=1.0, d2=1.0)


def small_system(h=0.5, degree=2, mat=MAT, gains=None, j_variant=2,
                 gamma0=(0, 3), corner_gains=None):
    dom = unit_square_domain(gamma0_edges=gamma0, corner_gains=corner_gains)
    mesh = triangulate(dom, h)
    dofs = build_dof_map(mesh, degree)
    return dom, mesh, dofs, assemble(mesh, dofs, mat, gains=gains,
                                     j_variant=j_variant)


def test_p2_dof_count_example():
    mesh = triangulate(DOM, 0.5)
    dofs = build_dof_map(mesh, 2)
    assert mesh.n_triangles == 8
    assert dofs.n_dofs == 25
    assert int(dofs.constrained.sum()) == 9


def test_p2_dof_count_formula():
    mesh = triangulate(DOM, 0.25)
    dofs = build_dof_map(mesh, 2)
    assert dofs.n_dofs == mesh.n_nodes + len(mesh.edge_set())


def test_p3_dof_count_formula():
    mesh = triangulate(DOM, 0.5)
    dofs = build_dof_map(mesh, 3)
    assert dofs.n_dofs == (mesh.n_nodes + 2 * len(mesh.edge_set())
                           + mesh.n_triangles)


def test_unsupported_degree():
    mesh = triangulate(DOM, 0.5)
    with pytest.raises(InvalidArgumentError):
        build_dof_map(mesh, 4)


def test_free_corner_maps_to_free_vertex_dof():
    mesh = triangulate(DOM, 0.5)
    dofs = build_dof_map(mesh, 2)
    # corner (1, 1) has both incident edges free
    c = dofs.corner_dofs[2]
    assert not dofs.constrained[c]
    # corners on the clamped closure are eliminated
    for i in (0, 1, 3):
        assert dofs.constrained[dofs.corner_dofs[i]]


def test_matrices_symmetric_and_definite():
    _, _, dofs, system = small_system(h=0.25)
    for A in (system.K, system.M, system.D):
        assert abs(A - A.T).max() == 0.0
    K = system.K.toarray()
    M = system.M.toarray()
    D = system.D.toarray()
    scale = abs(K).max()
    assert np.linalg.eigvalsh(K).min() > 0
    assert np.linalg.eigvalsh(M).min() > 0
    assert np.linalg.eigvalsh(D).min() >= -1e-12 * max(abs(D).max(), 1.0)
    assert scale > 0


def test_zero_damping_gives_zero_matrix():
    mat0 = PlateMaterial(mu=0.3, rho=1.0, inertia=1.0, d1=0.0, d2=0.0)
    _, _, _, system = small_system(mat=mat0, gains=[0, 0, 0, 0])
    assert system.D.nnz == 0 or abs(system.D).max() == 0.0


def test_interior_mass_only_when_boundary_constants_vanish():
    mat0 = PlateMaterial(mu=0.3, rho=0.0, inertia=0.0, d1=1.0, d2=1.0)
    _, _, _, system = small_system(mat=mat0)
    assert abs(system.M - system.mass_parts["interior"]).max() == 0.0


def test_mass_parts_against_polynomial_oracle():
    # g = x1*x2 vanishes on the clamped edges, P2 represents it exactly
    _, mesh, dofs, system = small_system(h=0.25)
    g = dofs.restrict(dofs.interpolate(lambda x: x[..., 0] * x[..., 1]))
    interior = float(g @ (system.mass_parts["interior"] @ g))
    trace = float(g @ (system.mass_parts["trace"] @ g))
    normal = float(g @ (system.mass_parts["normal"] @ g))
    assert abs(interior - 1.0 / 9.0) < 1e-13      # int x1^2 x2^2
    assert abs(trace - 2.0 / 3.0) < 1e-13         # right + top edge traces
    assert abs(normal - 2.0 / 3.0) < 1e-13        # normal derivative traces


def test_energy_decomposition():
    _, _, dofs, system = small_system(h=0.25)
    rng = np.random.default_rng(0)
    u = rng.standard_normal(system.n_free)
    v = rng.standard_normal(system.n_free)
    total = energy(system, u, v)
    parts = system.mass_parts
    by_parts = 0.5 * float(u @ (system.K @ u)) \
        + 0.5 * float(v @ (parts["interior"] @ v)) \
        + 0.5 * MAT.rho * float(v @ (parts["trace"] @ v)) \
        + 0.5 * MAT.inertia * float(v @ (parts["normal"] @ v))
    assert abs(total - by_parts) < 1e-12 * max(1.0, abs(total))


def test_energy_size_mismatch():
    _, _, _, system = small_system()
    with pytest.raises(InvalidArgumentError):
        energy(system, np.zeros(3), np.zeros(system.n_free))


def test_energy_zero_state():
    _, _, _, system = small_system()
    z = np.zeros(system.n_free)
    assert energy(system, z, z) == 0.0


def test_gain_linearity_single_diagonal_entry():
    dom = unit_square_domain(gamma0_edges=(0, 3), corner_gains=(0, 0, 2.5, 0))
    mesh = triangulate(dom, 0.5)
    dofs = build_dof_map(mesh, 2)
    with_gain = assemble(mesh, dofs, MAT, j_variant=2)
    without = assemble(mesh, dofs, MAT, gains=[0, 0, 0, 0], j_variant=2)
    diff = (with_gain.D - without.D).tocoo()
    assert len(diff.data) == 1
    assert diff.row[0] == diff.col[0] == dofs.free_index[dofs.corner_dofs[2]]
    assert diff.data[0] == 2.5


def test_variant_1_has_no_corner_entries():
    dom = unit_square_domain(gamma0_edges=(0, 3), corner_gains=(0, 0, 2.5, 0))
    mesh = triangulate(dom, 0.5)
    dofs = build_dof_map(mesh, 2)
    j1 = assemble(mesh, dofs, MAT, j_variant=1)
    assert j1.damping_parts["corner"].nnz == 0


def test_positive_gain_at_clamped_closure_corner_rejected():
    mesh = triangulate(DOM, 0.5)
    dofs = build_dof_map(mesh, 2)
    # corner 1 = (1, 0): incoming edge clamped, outgoing free
    with pytest.raises(InvalidArgumentError):
        assemble(mesh, dofs, MAT, gains=[0, 1.0, 0, 0], j_variant=2)


def test_sigma_floor_enforced():
    mesh = triangulate(DOM, 0.5)
    dofs = build_dof_map(mesh, 2)
    assert default_sigma(2) == 60.0 and sigma_floor(2) == 12.0
    with pytest.raises(AssemblyStabilityError):
        assemble(mesh, dofs, MAT, sigma=5.0)


def test_stiffness_interpolant_convergence():
    uex = PolyField.monomial(2, 2)
    exact = bilinear_a(uex, uex, DOM, MAT.mu)
    mesh = triangulate(DOM, 0.25)
    errs = []
    for _ in range(3):
        dofs = build_dof_map(mesh, 2)
        system = assemble(mesh, dofs, MAT)
        uI = dofs.restrict(dofs.interpolate(
            lambda x: x[..., 0] ** 2 * x[..., 1] ** 2))
        errs.append(abs(float(uI @ (system.K @ uI)) - exact))
        mesh = refine(mesh)
    assert errs[0] > errs[1] > errs[2]
    assert np.log2(errs[1] / errs[2]) > 1.7


def test_p3_stiffness_is_exact_for_cubics():
    # x1^2 x2 lies in the P3 space; it satisfies both clamped conditions on
    # the left edge, so all jump and Nitsche terms drop and u'Ku = a(u).
    dom = unit_square_domain(gamma0_edges=(3,))
    mesh = triangulate(dom, 0.5)
    dofs = build_dof_map(mesh, 3)
    system = assemble(mesh, dofs, MAT)
    g = PolyField.from_terms({(2, 1): 1.0})
    uI = dofs.restrict(dofs.interpolate(
        lambda x: x[..., 0] ** 2 * x[..., 1]))
    exact = bilinear_a(g, g, dom, MAT.mu)
    assert abs(float(uI @ (system.K @ uI)) - exact) < 1e-10


def test_manufactured_solution_convergence():
    uex = PolyField.monomial(2, 2)
    mesh = triangulate(DOM, 0.25)
    errs = []
    for _ in range(3):
        dofs = build_dof_map(mesh, 2)
        system = assemble(mesh, dofs, MAT)
        F = assemble_load(mesh, dofs, DOM, MAT, uex)
        uh = solve_static(system, F)
        uI = dofs.restrict(dofs.interpolate(
            lambda x: x[..., 0] ** 2 * x[..., 1] ** 2))
        e = uh - uI
        errs.append(float(np.sqrt(e @ (system.K @ e))))
        mesh = refine(mesh)
    assert errs[0] > errs[1] > errs[2]
    assert errs[1] / errs[2] > 1.8  # at least first-order in energy norm


def test_dump_coo_roundtrip(tmp_path):
    _, _, _, system = small_system()
    path = tmp_path / "K.txt"
    dump_coo(path, system.K)
    rows = np.loadtxt(path)
    K = system.K.tocoo()
    assert len(rows) == K.nnz
    assert rows[:, 0].min() >= 1 and rows[:, 1].min() >= 1
    total = rows[:, 2].sum()
    assert abs(total - K.data.sum()) < 1e-9 * max(1.0, abs(K.data).max())


def test_deterministic_assembly():
    _, _, dofs, s1 = small_system(h=0.25)
    _, _, _, s2 = small_system(h=0.25)
    assert (s1.K != s2.K).nnz == 0
    assert (s1.M != s2.M).nnz == 0
    assert (s1.D != s2.D).nnz == 0
