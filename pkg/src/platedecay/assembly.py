"""Discrete operators of the damped plate on a C0 interior-penalty space.

The fourth-order bending form is discretized with continuous Lagrange
elements (degree 2 or 3): element integrals of the plate energy density,
plus interface terms that penalize the jump of the normal derivative and
restore consistency through the averaged co-normal bending moment.  The
clamped displacement condition is eliminated strongly; the clamped normal
derivative is enforced weakly with the same Nitsche-type terms on clamped
boundary edges.  Mass and damping pick up the boundary trace terms of the
dynamical free edge, and the corner feedback gains enter the damping matrix
as diagonal entries on free corner vertex dofs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import (AssemblyStabilityError, InvalidArgumentError,
                     InvalidGeometryError)
from .geometry import GAMMA0, GAMMA1
from .plate_forms import (PlateMaterial, bending_trace_field, corner_jump,
                          shear_trace_field)
from .quadrature import gauss_01, triangle_rule


# ---------------------------------------------------------------------------
# Lagrange reference element
# ---------------------------------------------------------------------------

def _reference_nodes(p):
    """Local nodes: 3 vertices, (p-1) per edge (from first vertex), interior."""
    verts = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]
    nodes = list(verts)
    local_edges = [(0, 1), (1, 2), (2, 0)]
    for (a, b) in local_edges:
        pa, pb = np.array(verts[a]), np.array(verts[b])
        for k in range(1, p):
            nodes.append(tuple(pa + (pb - pa) * k / p))
    if p >= 3:
        nodes.append((1.0 / 3.0, 1.0 / 3.0))
    return np.array(nodes), local_edges


def _monomial_exponents(p):
    return [(i, j) for d in range(p + 1) for i in range(d, -1, -1)
            for j in [d - i]]


def _eval_monomials(exps, pts, dx=0, dy=0):
    """Matrix of d^dx/dxi d^dy/deta monomials at reference points."""
    pts = np.asarray(pts, dtype=float)
    out = np.zeros((len(pts), len(exps)))
    for m, (i, j) in enumerate(exps):
        ii, jj = i - dx, j - dy
        if ii < 0 or jj < 0:
            continue
        coef = 1.0
        for k in range(dx):
            coef *= i - k
        for k in range(dy):
            coef *= j - k
        out[:, m] = coef * pts[:, 0] ** ii * pts[:, 1] ** jj
    return out


class _ReferenceElement:
    """Lagrange basis on the unit triangle with derivative evaluation."""

    def __init__(self, p):
        self.p = p
        self.nodes, self.local_edges = _reference_nodes(p)
        self.exps = _monomial_exponents(p)
        vand = _eval_monomials(self.exps, self.nodes)
        self.coeffs = np.linalg.inv(vand)  # column a = coeffs of phi_a
        self.n_local = len(self.nodes)

    def eval(self, pts, dx=0, dy=0):
        """(n_pts, n_local) array of basis derivatives at reference points."""
        return _eval_monomials(self.exps, pts, dx, dy) @ self.coeffs

    def local_edge_dofs(self, le):
        """Local dof indices with support needed on local edge le (all dofs)."""
        return list(range(self.n_local))


_REFERENCE = {}


def reference_element(p):
    if p not in _REFERENCE:
        _REFERENCE[p] = _ReferenceElement(p)
    return _REFERENCE[p]


# ---------------------------------------------------------------------------
# dof map
# ---------------------------------------------------------------------------

@dataclass
class DofMap:
    """Global Lagrange dof enumeration with clamped-trace elimination.

    Vertex dofs coincide with mesh node ids; edge dofs follow in lexicographic
    mesh-edge order (slots measured from the lower-numbered endpoint);
    interior dofs come last in triangle order.  The enumeration is a pure
    function of the mesh, so identical input gives identical numbering.
    """

    degree: int
    n_dofs: int
    cell_dofs: np.ndarray
    dof_coords: np.ndarray
    constrained: np.ndarray
    corner_dofs: np.ndarray
    free: np.ndarray = field(init=False)
    free_index: np.ndarray = field(init=False)

    def __post_init__(self):
        self.free = np.nonzero(~self.constrained)[0]
        self.free_index = np.full(self.n_dofs, -1, dtype=int)
        self.free_index[self.free] = np.arange(len(self.free))

    @property
    def n_free(self):
        return len(self.free)

    def interpolate(self, f):
        """Nodal interpolant: f evaluated at all dof coordinates."""
        return np.asarray(f(self.dof_coords), dtype=float)

    def restrict(self, full):
        return np.asarray(full)[self.free]

    def extend(self, free_vec):
        full = np.zeros(self.n_dofs)
        full[self.free] = free_vec
        return full


def build_dof_map(mesh, degree):
    if degree not in (2, 3):
        raise InvalidArgumentError(f"unsupported element degree {degree}",
                                   invariant="degree-supported")
    p = degree
    ref = reference_element(p)
    edges = mesh.edge_set()
    edge_index = {tuple(e): i for i, e in enumerate(edges.tolist())}
    n_nodes = mesh.n_nodes
    n_edofs = (p - 1) * len(edges)
    n_cdofs = mesh.n_triangles if p >= 3 else 0
    n_dofs = n_nodes + n_edofs + n_cdofs

    coords = np.zeros((n_dofs, 2))
    coords[:n_nodes] = mesh.nodes
    for (a, b), ei in edge_index.items():
        pa, pb = mesh.nodes[a], mesh.nodes[b]
        for s in range(p - 1):
            coords[n_nodes + (p - 1) * ei + s] = pa + (pb - pa) * (s + 1) / p

    cell_dofs = np.zeros((mesh.n_triangles, ref.n_local), dtype=int)
    for t, tri in enumerate(mesh.triangles):
        dofs = list(tri)
        for (la, lb) in ref.local_edges:
            ga, gb = int(tri[la]), int(tri[lb])
            key = (ga, gb) if ga < gb else (gb, ga)
            ei = edge_index[key]
            for k in range(1, p):
                # local point at k/p from ga; slot measured from min(ga, gb)
                s = (k - 1) if ga < gb else (p - 1 - k)
                dofs.append(n_nodes + (p - 1) * ei + s)
        if p >= 3:
            dofs.append(n_nodes + n_edofs + t)
            coords[n_nodes + n_edofs + t] = mesh.nodes[tri].mean(axis=0)
        cell_dofs[t] = dofs

    constrained = np.zeros(n_dofs, dtype=bool)
    for (a, b), lab in zip(mesh.boundary_edges.tolist(), mesh.boundary_labels):
        if lab != GAMMA0:
            continue
        constrained[a] = constrained[b] = True
        key = (a, b) if a < b else (b, a)
        ei = edge_index[key]
        constrained[n_nodes + (p - 1) * ei: n_nodes + (p - 1) * (ei + 1)] = True

    corner_dofs = mesh.corner_nodes.copy()
    return DofMap(degree=p, n_dofs=n_dofs, cell_dofs=cell_dofs,
                  dof_coords=coords, constrained=constrained,
                  corner_dofs=corner_dofs)


# ---------------------------------------------------------------------------
# assembled system
# ---------------------------------------------------------------------------

@dataclass
class AssembledSystem:
    """Sparse stiffness/mass/damping on the free dofs.

    ``mass_parts`` holds the unscaled pieces (interior, gamma1 trace, gamma1
    normal-derivative trace); ``damping_parts`` holds the scaled channels
    (d1, d2, corner), which sum to D exactly.
    """

    K: sp.csr_matrix
    M: sp.csr_matrix
    D: sp.csr_matrix
    j_variant: int
    penalty_sigma: float
    material: PlateMaterial
    gains: np.ndarray
    mass_parts: dict
    damping_parts: dict
    dofs: DofMap = None
    mesh: object = None

    @property
    def n_free(self):
        return self.K.shape[0]


def _corner_incident_labels(mesh):
    """Set of boundary labels of the chords touching each corner node."""
    labels = [set() for _ in mesh.corner_nodes]
    node_to_corner = {int(c): i for i, c in enumerate(mesh.corner_nodes)}
    for (a, b), lab in zip(mesh.boundary_edges.tolist(), mesh.boundary_labels):
        for n in (a, b):
            if n in node_to_corner:
                labels[node_to_corner[n]].add(int(lab))
    return labels


def sigma_floor(degree):
    return 2.0 * degree * (degree + 1)


def default_sigma(degree):
    return 10.0 * degree * (degree + 1)


def _second_deriv_rows(ref, pts, binv):
    """Physical (xx, yy, xy) second-derivative rows of all basis functions."""
    hxx = ref.eval(pts, 2, 0)
    hxy = ref.eval(pts, 1, 1)
    hyy = ref.eval(pts, 0, 2)
    b = binv
    pxx = b[0, 0] ** 2 * hxx + 2 * b[0, 0] * b[1, 0] * hxy + b[1, 0] ** 2 * hyy
    pyy = b[0, 1] ** 2 * hxx + 2 * b[0, 1] * b[1, 1] * hxy + b[1, 1] ** 2 * hyy
    pxy = (b[0, 0] * b[0, 1] * hxx
           + (b[0, 0] * b[1, 1] + b[1, 0] * b[0, 1]) * hxy
           + b[1, 0] * b[1, 1] * hyy)
    return pxx, pyy, pxy


def _gradient_rows(ref, pts, binv):
    gx_ref = ref.eval(pts, 1, 0)
    gy_ref = ref.eval(pts, 0, 1)
    gx = binv[0, 0] * gx_ref + binv[1, 0] * gy_ref
    gy = binv[0, 1] * gx_ref + binv[1, 1] * gy_ref
    return gx, gy


def _bending_rows(pxx, pyy, pxy, mu, n):
    """Co-normal bending moment rows: Lap + (1-mu)(2 n1 n2 pxy - n1^2 pyy - n2^2 pxx)."""
    return (pxx + pyy + (1.0 - mu) * (2.0 * n[0] * n[1] * pxy
                                      - n[0] ** 2 * pyy - n[1] ** 2 * pxx))


def _sym(block):
    """Exact symmetrization; the forms are symmetric, rounding is not."""
    return 0.5 * (block + block.T)


class _Scatter:
    def __init__(self):
        self.rows, self.cols, self.vals = [], [], []

    def add(self, dofs_r, dofs_c, block):
        r = np.repeat(dofs_r, len(dofs_c))
        c = np.tile(dofs_c, len(dofs_r))
        self.rows.append(r)
        self.cols.append(c)
        self.vals.append(np.asarray(block, dtype=float).ravel())

    def matrix(self, n):
        if not self.rows:
            return sp.csr_matrix((n, n))
        return sp.coo_matrix(
            (np.concatenate(self.vals),
             (np.concatenate(self.rows), np.concatenate(self.cols))),
            shape=(n, n)).tocsr()


def assemble(mesh, dofs, material, gains=None, j_variant=2, sigma=None):
    """Assemble stiffness K, mass M, damping D on the free dofs.

    ``sigma`` is the interior-penalty weight (default 10 p (p+1)); below the
    floor 2 p (p+1) assembly is refused since coercivity is no longer
    guaranteed.  With j_variant = 1 the corner gains do not enter at all;
    with j_variant = 2 they add diagonal damping at corner vertex dofs, and a
    positive gain at a corner touching the clamped closure is rejected.
    """
    p = dofs.degree
    if j_variant not in (1, 2):
        raise InvalidArgumentError("j_variant must be 1 or 2",
                                   invariant="variant")
    if sigma is None:
        sigma = default_sigma(p)
    if sigma < sigma_floor(p):
        raise AssemblyStabilityError(
            f"penalty sigma = {sigma} below stability floor {sigma_floor(p)}",
            invariant="penalty-floor")
    if gains is None:
        gains = mesh.corner_gains
    gains = np.asarray(gains, dtype=float)
    if len(gains) != len(mesh.corner_nodes):
        raise InvalidArgumentError("one gain per domain corner required",
                                   invariant="gain-count")
    if np.any(gains < 0):
        raise InvalidArgumentError("corner gains must be >= 0",
                                   invariant="gain-nonnegative")

    mu = material.mu
    ref = reference_element(p)
    tri_pts, tri_w = triangle_rule(2 * p)
    seg_t, seg_w = gauss_01(p + 2)

    sc_K = _Scatter()
    sc_M = _Scatter()
    sc_Gt = _Scatter()   # gamma1 trace mass
    sc_Gn = _Scatter()   # gamma1 normal-derivative trace mass

    n_basis = ref.eval(tri_pts)

    # element terms: plate energy density and interior mass
    cell_geoms = []
    for t in range(mesh.n_triangles):
        tri = mesh.triangles[t]
        pts = mesh.nodes[tri]
        jac = np.array([[pts[1, 0] - pts[0, 0], pts[2, 0] - pts[0, 0]],
                        [pts[1, 1] - pts[0, 1], pts[2, 1] - pts[0, 1]]])
        det = jac[0, 0] * jac[1, 1] - jac[0, 1] * jac[1, 0]
        if det <= 0:
            raise InvalidGeometryError(f"triangle {t} is degenerate or flipped",
                                       invariant="triangle-orientation")
        binv = np.array([[jac[1, 1], -jac[0, 1]],
                         [-jac[1, 0], jac[0, 0]]]) / det
        cell_geoms.append((pts[0], binv, det))
        w = tri_w * det  # reference weights sum to 1/2: |T| = det/2
        pxx, pyy, pxy = _second_deriv_rows(ref, tri_pts, binv)
        kel = _sym((pxx * w[:, None]).T @ pxx + (pyy * w[:, None]).T @ pyy
                   + mu * ((pxx * w[:, None]).T @ pyy + (pyy * w[:, None]).T @ pxx)
                   + 2.0 * (1.0 - mu) * (pxy * w[:, None]).T @ pxy)
        mel = _sym((n_basis * w[:, None]).T @ n_basis)
        cd = dofs.cell_dofs[t]
        sc_K.add(cd, cd, kel)
        sc_M.add(cd, cd, mel)

    # edge adjacency
    edge_tris = {}
    for t in range(mesh.n_triangles):
        tri = mesh.triangles[t]
        for le, (la, lb) in enumerate(ref.local_edges):
            a, b = int(tri[la]), int(tri[lb])
            key = (a, b) if a < b else (b, a)
            edge_tris.setdefault(key, []).append((t, la, lb))
    boundary_info = {}
    for j, (a, b) in enumerate(mesh.boundary_edges.tolist()):
        key = (a, b) if a < b else (b, a)
        boundary_info[key] = int(mesh.boundary_labels[j])

    def edge_traces(t, la, lb, xa, xb):
        """Normal-derivative and bending rows of triangle t on segment xa-xb."""
        x0, binv, _ = cell_geoms[t]
        phys = xa[None, :] + seg_t[:, None] * (xb - xa)[None, :]
        refpts = (phys - x0[None, :]) @ binv.T
        gx, gy = _gradient_rows(ref, refpts, binv)
        pxx, pyy, pxy = _second_deriv_rows(ref, refpts, binv)
        nvals = ref.eval(refpts)
        return gx, gy, pxx, pyy, pxy, nvals

    for key in sorted(edge_tris):
        owners = edge_tris[key]
        a, b = key
        xa, xb = mesh.nodes[a], mesh.nodes[b]
        length = float(np.hypot(*(xb - xa)))
        w = seg_w * length

        if len(owners) == 2:
            (t1, la1, lb1), (t2, la2, lb2) = owners
            tri1 = mesh.triangles[t1]
            # outward normal of t1 across this edge, in t1's CCW traversal
            p_la, p_lb = mesh.nodes[tri1[la1]], mesh.nodes[tri1[lb1]]
            tang = (p_lb - p_la) / np.hypot(*(p_lb - p_la))
            n = np.array([tang[1], -tang[0]])
            gx1, gy1, pxx1, pyy1, pxy1, _ = edge_traces(t1, la1, lb1, xa, xb)
            gx2, gy2, pxx2, pyy2, pxy2, _ = edge_traces(t2, la2, lb2, xa, xb)
            dn1 = n[0] * gx1 + n[1] * gy1
            dn2 = n[0] * gx2 + n[1] * gy2
            b1 = _bending_rows(pxx1, pyy1, pxy1, mu, n)
            b2 = _bending_rows(pxx2, pyy2, pxy2, mu, n)
            jump = np.concatenate([dn1, -dn2], axis=1)
            avg = 0.5 * np.concatenate([b1, b2], axis=1)
            union = np.concatenate([dofs.cell_dofs[t1], dofs.cell_dofs[t2]])
            block = _sym((sigma / length) * (jump * w[:, None]).T @ jump
                         - (avg * w[:, None]).T @ jump
                         - (jump * w[:, None]).T @ avg)
            sc_K.add(union, union, block)
        else:
            (t1, la1, lb1) = owners[0]
            label = boundary_info.get(key)
            if label is None:
                raise InvalidGeometryError(
                    f"triangulation boundary edge {key} missing from boundary list",
                    invariant="boundary-consistency")
            tri1 = mesh.triangles[t1]
            p_la, p_lb = mesh.nodes[tri1[la1]], mesh.nodes[tri1[lb1]]
            tang = (p_lb - p_la) / np.hypot(*(p_lb - p_la))
            n = np.array([tang[1], -tang[0]])
            gx1, gy1, pxx1, pyy1, pxy1, nvals = edge_traces(t1, la1, lb1, xa, xb)
            dn = n[0] * gx1 + n[1] * gy1
            cd = dofs.cell_dofs[t1]
            if label == GAMMA0:
                b1 = _bending_rows(pxx1, pyy1, pxy1, mu, n)
                block = _sym((sigma / length) * (dn * w[:, None]).T @ dn
                             - (b1 * w[:, None]).T @ dn
                             - (dn * w[:, None]).T @ b1)
                sc_K.add(cd, cd, block)
            else:
                sc_Gt.add(cd, cd, _sym((nvals * w[:, None]).T @ nvals))
                sc_Gn.add(cd, cd, _sym((dn * w[:, None]).T @ dn))

    n = dofs.n_dofs
    K_full = sc_K.matrix(n)
    M_int = sc_M.matrix(n)
    G_t = sc_Gt.matrix(n)
    G_n = sc_Gn.matrix(n)

    # corner feedback gains
    corner_rows, corner_vals = [], []
    incident = _corner_incident_labels(mesh)
    for i, c in enumerate(mesh.corner_nodes.tolist()):
        if gains[i] == 0.0:
            continue
        if j_variant == 2 and GAMMA0 in incident[i]:
            raise InvalidArgumentError(
                f"corner {i} touches the clamped closure; positive feedback "
                "gain is not admissible there",
                invariant="clamped-corner-gain")
        if j_variant == 2:
            corner_rows.append(c)
            corner_vals.append(gains[i])
    D_corner = sp.csr_matrix((corner_vals, (corner_rows, corner_rows)),
                             shape=(n, n))

    fi = dofs.free

    def restrict(A):
        return A.tocsr()[fi][:, fi].tocsr()

    Kf = restrict(K_full)
    Kf = (0.5 * (Kf + Kf.T)).tocsr()  # scatter order leaves ulp-level skew
    Mi, Gt, Gn = restrict(M_int), restrict(G_t), restrict(G_n)
    Dc = restrict(D_corner)
    M = (Mi + material.rho * Gt + material.inertia * Gn).tocsr()
    if j_variant == 1:
        D = (material.d1 * Gn + material.d2 * Gt).tocsr()
        damping_parts = {"d1": (material.d1 * Gn).tocsr(),
                         "d2": (material.d2 * Gt).tocsr(),
                         "corner": sp.csr_matrix(Kf.shape)}
    else:
        D = (material.d1 * Gn + material.d2 * Gt + Dc).tocsr()
        damping_parts = {"d1": (material.d1 * Gn).tocsr(),
                         "d2": (material.d2 * Gt).tocsr(),
                         "corner": Dc}
    return AssembledSystem(
        K=Kf, M=M, D=D, j_variant=j_variant, penalty_sigma=float(sigma),
        material=material, gains=gains,
        mass_parts={"interior": Mi, "trace": Gt, "normal": Gn},
        damping_parts=damping_parts, dofs=dofs, mesh=mesh)


def energy(system, u, v):
    """Discrete energy 0.5 (u' K u + v' M v) of a displacement/velocity pair."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != (system.n_free,) or v.shape != (system.n_free,):
        raise InvalidArgumentError(
            f"state vectors must have length {system.n_free}",
            invariant="dof-size")
    return 0.5 * (float(u @ (system.K @ u)) + float(v @ (system.M @ v)))


def assemble_load(mesh, dofs, domain, material, u_exact):
    """Load vector reproducing a manufactured polynomial solution.

    Builds F(v) = (Lap^2 u, v) - boundary work of the exact bending and
    shear traces on the free boundary - corner jump work at free corners,
    using the closed-form traces;  straight-edge domains only.  The exact
    field must satisfy the clamped conditions on the clamped part.
    """
    if not domain.is_straight():
        raise InvalidArgumentError("manufactured loads need straight edges",
                                   invariant="straight-edges")
    p = dofs.degree
    ref = reference_element(p)
    f_field = u_exact.biharmonic()
    deg_vol = max(f_field.degree, 0) + p
    tri_pts, tri_w = triangle_rule(deg_vol)
    n_basis = ref.eval(tri_pts)
    F = np.zeros(dofs.n_dofs)

    for t in range(mesh.n_triangles):
        tri = mesh.triangles[t]
        pts = mesh.nodes[tri]
        jac = np.array([[pts[1, 0] - pts[0, 0], pts[2, 0] - pts[0, 0]],
                        [pts[1, 1] - pts[0, 1], pts[2, 1] - pts[0, 1]]])
        det = jac[0, 0] * jac[1, 1] - jac[0, 1] * jac[1, 0]
        phys = pts[0][None, :] + tri_pts @ jac.T
        fw = f_field(phys) * tri_w * det
        F[dofs.cell_dofs[t]] += n_basis.T @ fw

    seg_t, seg_w = gauss_01(max(1, (u_exact.degree + p + 2) // 2))
    edge_tris = {}
    for t in range(mesh.n_triangles):
        tri = mesh.triangles[t]
        for le, (la, lb) in enumerate(ref.local_edges):
            a, b = int(tri[la]), int(tri[lb])
            key = (a, b) if a < b else (b, a)
            edge_tris.setdefault(key, []).append((t, la, lb))

    for j, (a, b) in enumerate(mesh.boundary_edges.tolist()):
        if mesh.boundary_labels[j] != GAMMA1:
            continue
        src = int(mesh.boundary_source[j])
        if src < 0:
            raise InvalidArgumentError(
                "boundary chords must reference domain edges for loads",
                invariant="boundary-source")
        nu = domain.segment_normal(src)
        b1f = bending_trace_field(u_exact, material.mu, nu)
        b2f = shear_trace_field(u_exact, material.mu, nu)
        key = (a, b) if a < b else (b, a)
        (t1, la1, lb1) = edge_tris[key][0]
        tri = mesh.triangles[t1]
        x0 = mesh.nodes[tri[0]]
        pts_t = mesh.nodes[tri]
        jac = np.array([[pts_t[1, 0] - pts_t[0, 0], pts_t[2, 0] - pts_t[0, 0]],
                        [pts_t[1, 1] - pts_t[0, 1], pts_t[2, 1] - pts_t[0, 1]]])
        det = jac[0, 0] * jac[1, 1] - jac[0, 1] * jac[1, 0]
        binv = np.array([[jac[1, 1], -jac[0, 1]],
                         [-jac[1, 0], jac[0, 0]]]) / det
        xa, xb = mesh.nodes[a], mesh.nodes[b]
        length = float(np.hypot(*(xb - xa)))
        phys = xa[None, :] + seg_t[:, None] * (xb - xa)[None, :]
        refpts = (phys - x0[None, :]) @ binv.T
        nvals = ref.eval(refpts)
        gx, gy = _gradient_rows(ref, refpts, binv)
        dn = nu[0] * gx + nu[1] * gy
        w = seg_w * length
        F[dofs.cell_dofs[t1]] += nvals.T @ (-b2f(phys) * w)
        F[dofs.cell_dofs[t1]] += dn.T @ (b1f(phys) * w)

    pcount = domain.n_corners
    for i in range(pcount):
        if domain.corner_in_clamped_closure(i):
            continue
        nu_in = domain.segment_normal((i - 1) % pcount)
        nu_out = domain.segment_normal(i)
        jmp = corner_jump(u_exact, material.mu, domain.vertices[i], nu_in, nu_out)
        F[dofs.corner_dofs[i]] -= jmp

    return F[dofs.free]


def solve_static(system, load):
    """Direct solve K u = load on the free dofs."""
    from scipy.sparse.linalg import spsolve
    return spsolve(system.K.tocsc(), load)


def dump_coo(path, matrix):
    """Write a sparse matrix as '<row> <col> <value>' lines, 1-based."""
    coo = sp.coo_matrix(matrix)
    order = np.lexsort((coo.col, coo.row))
    with open(path, "w") as f:
        for i in order:
            f.write(f"{coo.row[i] + 1} {coo.col[i] + 1} {coo.data[i]:.17g}\n")
