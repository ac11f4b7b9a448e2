"""Small planar-polygon helpers shared by geometry, meshing and plate_forms.

All polygons are arrays of shape (n, 2) listing vertices once, in order,
without repeating the first vertex at the end.
"""

import numpy as np

from .errors import InvalidGeometryError


def signed_area(points):
    """Shoelace signed area; positive for counterclockwise loops."""
    p = np.asarray(points, dtype=float)
    x, y = p[:, 0], p[:, 1]
    return 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)


def _orient(a, b, c):
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _segments_properly_intersect(p1, p2, p3, p4):
    """True when open segments p1-p2 and p3-p4 cross (shared endpoints ignore)."""
    o1 = _orient(p1, p2, p3)
    o2 = _orient(p1, p2, p4)
    o3 = _orient(p3, p4, p1)
    o4 = _orient(p3, p4, p2)
    return (o1 * o2 < 0) and (o3 * o4 < 0)


def polygon_is_simple(points):
    """Check that no two non-adjacent polygon edges cross."""
    p = np.asarray(points, dtype=float)
    n = len(p)
    for i in range(n):
        a1, a2 = p[i], p[(i + 1) % n]
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue
            if _segments_properly_intersect(a1, a2, p[j], p[(j + 1) % n]):
                return False
    return True


def _point_in_triangle(pt, a, b, c, eps):
    d1 = _orient(a, b, pt)
    d2 = _orient(b, c, pt)
    d3 = _orient(c, a, pt)
    return d1 >= -eps and d2 >= -eps and d3 >= -eps


def ear_clip(points):
    """Triangulate a simple CCW polygon by ear clipping.

    Returns a list of index triples into ``points``, each CCW.  Raises
    InvalidGeometryError when no ear can be found (degenerate input).
    """
    p = np.asarray(points, dtype=float)
    n = len(p)
    if n < 3:
        raise InvalidGeometryError("polygon needs at least 3 vertices",
                                   invariant="polygon-size")
    if signed_area(p) <= 0:
        raise InvalidGeometryError("polygon must be counterclockwise",
                                   invariant="polygon-orientation")
    scale = float(np.max(np.abs(p))) or 1.0
    eps = 1e-12 * scale * scale

    idx = list(range(n))
    triangles = []
    while len(idx) > 3:
        clipped = False
        m = len(idx)
        for k in range(m):
            i0, i1, i2 = idx[(k - 1) % m], idx[k], idx[(k + 1) % m]
            a, b, c = p[i0], p[i1], p[i2]
            if _orient(a, b, c) <= eps:
                continue  # reflex or flat corner, not an ear
            blocked = False
            for j in idx:
                if j in (i0, i1, i2):
                    continue
                if _point_in_triangle(p[j], a, b, c, eps):
                    blocked = True
                    break
            if not blocked:
                triangles.append((i0, i1, i2))
                del idx[k]
                clipped = True
                break
        if not clipped:
            raise InvalidGeometryError(
                "ear clipping stuck: polygon is degenerate or self-intersecting",
                invariant="polygon-simple")
    triangles.append(tuple(idx))
    return triangles


def random_convex_polygon(rng, n_vertices, radius=1.0, center=(0.0, 0.0)):
    """Random convex CCW polygon: sorted angles on a jittered circle."""
    angles = np.sort(rng.uniform(0.0, 2.0 * np.pi, size=n_vertices))
    # enforce minimal angular separation so no edge degenerates
    while np.min(np.diff(np.concatenate([angles, [angles[0] + 2 * np.pi]]))) < 0.05:
        angles = np.sort(rng.uniform(0.0, 2.0 * np.pi, size=n_vertices))
    r = radius * rng.uniform(0.5, 1.5)
    pts = np.stack([r * np.cos(angles), r * np.sin(angles)], axis=1)
    return pts + np.asarray(center, dtype=float)
