"""Per-face geometric measures: covering inradius, eccentricity, circumradius.

All routines work on raw coordinate arrays; the wrappers at the bottom accept
face records from :mod:`tessgof.geometry`.  Faces of periodic tessellations
carry unwrapped representative coordinates, so nothing here needs to know
about the torus.
"""

import itertools

import numpy as np

from .errors import InvariantViolationError

__all__ = [
    "min_enclosing_ball",
    "circumradius",
    "polygon_area",
    "polygon_centroid",
    "plane_basis",
    "inradius_constraints",
    "covering_inradius",
    "face_inradius",
    "face_eccentricity",
    "face_eccentricity_generalized",
]

_MEB_EPS = 1e-13


def _ball_2(a, b):
    c = 0.5 * (a + b)
    return c, float(np.linalg.norm(a - c))


def _circumsphere_3(a, b, c):
    """Circumcenter of a triangle in its affine hull, or None if collinear."""
    u, v = b - a, c - a
    uu, vv, uv = u @ u, v @ v, u @ v
    det = uu * vv - uv * uv
    if det <= _MEB_EPS * uu * vv:
        return None
    s = 0.5 * (uu * vv - vv * uv) / det
    t = 0.5 * (uu * vv - uu * uv) / det
    center = a + s * u + t * v
    return center, float(np.linalg.norm(center - a))


def _circumsphere_4(a, b, c, d):
    m = 2.0 * np.array([b - a, c - a, d - a])
    rhs = np.array([b @ b - a @ a, c @ c - a @ a, d @ d - a @ a])
    try:
        center = np.linalg.solve(m, rhs)
    except np.linalg.LinAlgError:
        return None
    scale = max(np.abs(m).max(), 1.0)
    if abs(np.linalg.det(m)) <= 1e-12 * scale**3:
        return None
    return center, float(np.linalg.norm(center - a))


def _meb_of_support(points):
    """Exact smallest enclosing ball of at most d+1 points."""
    pts = [np.asarray(p, dtype=float) for p in points]
    k = len(pts)
    if k == 0:
        return None, -1.0
    if k == 1:
        return pts[0], 0.0
    best = None
    for i, j in itertools.combinations(range(k), 2):
        c, r = _ball_2(pts[i], pts[j])
        if _contains_all(pts, c, r) and (best is None or r < best[1]):
            best = (c, r)
    if best is not None:
        return best
    for sub in itertools.combinations(range(k), 3):
        res = _circumsphere_3(*(pts[i] for i in sub))
        if res is None:
            continue
        c, r = res
        if _contains_all(pts, c, r) and (best is None or r < best[1]):
            best = (c, r)
    if best is not None:
        return best
    if k == 4:
        res = _circumsphere_4(*pts)
        if res is not None:
            return res
    # fully degenerate support: fall back to the bounding box ball
    arr = np.array(pts)
    c = 0.5 * (arr.min(0) + arr.max(0))
    return c, float(np.linalg.norm(arr - c, axis=1).max())


def _contains_all(pts, center, radius):
    tol = _MEB_EPS * max(radius * radius, 1e-30) + 1e-300
    rr = radius * radius + tol
    return all(((p - center) @ (p - center)) <= rr for p in pts)


def min_enclosing_ball(points):
    """Smallest ball containing the points (Welzl's algorithm).

    Returns ``(center, radius)``.  Deterministic: the internal shuffle uses a
    fixed seed.  Works in any dimension up to 3.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n, dim = pts.shape
    if n == 1:
        return pts[0].copy(), 0.0
    order = np.random.default_rng(0x5EB).permutation(n)
    pts = pts[order]
    max_support = dim + 1

    def solve(n_active, support):
        if n_active == 0 or len(support) == max_support:
            return _meb_of_support(support)
        c, r = solve(n_active - 1, support)
        p = pts[n_active - 1]
        if c is not None:
            tol = _MEB_EPS * max(r * r, 1e-30) + 1e-300
            if (p - c) @ (p - c) <= r * r + tol:
                return c, r
        return solve(n_active - 1, support + [p])

    center, radius = solve(n, [])
    return center, radius


def circumradius(points):
    """Radius of the minimum enclosing ball of a nonempty point list."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[0] == 0:
        raise ValueError("circumradius needs at least one point")
    return min_enclosing_ball(pts)[1]


def plane_basis(coords):
    """Orthonormal (origin, u, v, normal) frame of a planar 3D point set."""
    coords = np.asarray(coords, dtype=float)
    origin = coords.mean(axis=0)
    rel = coords - origin
    _, s, vt = np.linalg.svd(rel, full_matrices=True)
    return origin, vt[0], vt[1], vt[2], s


def polygon_area(coords):
    """Area of a planar convex polygon in 3D, vertices in cyclic order."""
    coords = np.asarray(coords, dtype=float)
    if coords.shape[0] < 3:
        return 0.0
    rel = coords - coords[0]
    cross = np.cross(rel[1:-1], rel[2:])
    return 0.5 * float(np.linalg.norm(cross.sum(axis=0)))


def polygon_centroid(coords):
    """Area centroid of a planar convex polygon in 3D, cyclic vertex order."""
    coords = np.asarray(coords, dtype=float)
    if coords.shape[0] < 3:
        return coords.mean(axis=0)
    a = coords[0]
    cross = np.cross(coords[1:-1] - a, coords[2:] - a)
    areas = 0.5 * np.linalg.norm(cross, axis=1)
    mids = (a + coords[1:-1] + coords[2:]) / 3.0
    total = areas.sum()
    if total <= 0.0:
        return coords.mean(axis=0)
    return (areas[:, None] * mids).sum(axis=0) / total


def _to_plane(coords):
    """Project a planar polygon to 2D; raises if vertices are not coplanar."""
    origin, u, v, normal, svals = plane_basis(coords)
    rel = coords - origin
    off = np.abs(rel @ normal)
    diam = max(svals[0], 1e-30)
    if off.max() > 1e-7 * diam:
        raise InvariantViolationError(
            "planar-face", f"vertex out of plane by {off.max():.2e}"
        )
    return np.c_[rel @ u, rel @ v]


def inradius_constraints(coords2d):
    """Inward edge normals and offsets of a convex polygon given in 2D.

    Returns ``(normals, offsets)``; edge ``j`` joins vertex ``j`` to vertex
    ``j+1`` and the polygon is ``{x : normals @ x >= offsets}``.  Raises for
    non-convex input.
    """
    k = coords2d.shape[0]
    if k < 3:
        raise InvariantViolationError("convex-face", "polygon needs >= 3 vertices")
    edges = np.roll(coords2d, -1, axis=0) - coords2d
    # cross products of consecutive edges decide orientation/convexity
    nxt = np.roll(edges, -1, axis=0)
    cross = edges[:, 0] * nxt[:, 1] - edges[:, 1] * nxt[:, 0]
    scale = np.abs(edges).max() ** 2 + 1e-30
    if (cross > 1e-9 * scale).any() and (cross < -1e-9 * scale).any():
        raise InvariantViolationError("convex-face", "polygon is not convex")
    lengths = np.linalg.norm(edges, axis=1)
    if lengths.min() <= 0.0:
        raise InvariantViolationError("convex-face", "zero-length edge")
    sign = 1.0 if cross.sum() > 0 else -1.0
    normals = sign * np.c_[-edges[:, 1], edges[:, 0]] / lengths[:, None]
    offsets = (normals * coords2d).sum(axis=1)
    return normals, offsets


def covering_inradius(coords, thicknesses=None):
    """Dilation radius at which the (thickened) boundary edges cover the face.

    ``max_x min_j (dist(x, e_j) - rho_j)`` over the convex polygon, clamped at
    zero.  Solved exactly as a three-variable linear program by enumerating
    basic solutions (triples of active edge constraints).
    """
    coords = np.asarray(coords, dtype=float)
    pts2 = _to_plane(coords)
    normals, offsets = inradius_constraints(pts2)
    k = len(normals)
    rho = np.zeros(k)
    if thicknesses is not None:
        rho = np.asarray(thicknesses, dtype=float)
        if rho.shape != (k,):
            raise ValueError(f"expected {k} thicknesses, got {rho.shape}")
        if (rho < 0).any():
            raise ValueError("thicknesses must be nonnegative")
    rhs = offsets + rho
    # LP: max r  s.t.  n_j . x - r >= rhs_j.  The optimum is a basic solution
    # with three active constraints (edge normals positively span the plane,
    # so the problem is bounded).
    triples = np.array(list(itertools.combinations(range(k), 3)))
    mats = np.empty((len(triples), 3, 3))
    mats[:, :, :2] = normals[triples]
    mats[:, :, 2] = -1.0
    dets = np.linalg.det(mats)
    good = np.abs(dets) > 1e-12
    if not good.any():
        raise InvariantViolationError("convex-face", "degenerate edge normals")
    sols = np.linalg.solve(mats[good], rhs[triples[good]][..., None])[..., 0]
    slack = sols[:, :2] @ normals.T - sols[:, 2:3] - rhs[None, :]
    scale = max(np.abs(rhs).max(), 1.0)
    feasible = (slack >= -1e-9 * scale).all(axis=1)
    if not feasible.any():
        raise InvariantViolationError("convex-face", "inradius LP infeasible")
    best = sols[feasible, 2].max()
    return max(float(best), 0.0)


def face_inradius(face, edge_thicknesses=None):
    """Covering inradius of a 2-face record (or raw cyclic vertex coords)."""
    coords = getattr(face, "vertex_coords", face)
    return covering_inradius(coords, edge_thicknesses)


def face_eccentricity(face, tess=None):
    """Largest distance from the face to the two generating cell centers.

    The maximum of a convex distance function over a polygon is attained at a
    vertex, so only face vertices are scanned.  Raises for boundary faces of
    non-periodic windows, which have a single incident cell.
    """
    centers = np.asarray(face.cell_centers, dtype=float)
    if centers.shape[0] != 2:
        raise _two_sided_error(face, centers.shape[0])
    d = np.linalg.norm(
        face.vertex_coords[:, None, :] - centers[None, :, :], axis=2
    )
    return float(d.max())


def _two_sided_error(face, n_cells):
    return InvariantViolationError(
        "two-sided-face",
        f"eccentricity needs a face shared by exactly 2 cells, got {n_cells} "
        f"(dim={getattr(face, 'dim', '?')}, id={getattr(face, 'index', '?')})",
    )


def face_eccentricity_generalized(face, tess=None):
    """Max distance from face vertices to every incident cell center.

    Extension of the two-cell eccentricity to faces of any dimension; for
    2-faces shared by two cells it coincides with :func:`face_eccentricity`.
    """
    centers = np.asarray(face.cell_centers, dtype=float)
    if centers.shape[0] == 0:
        raise _two_sided_error(face, 0)
    d = np.linalg.norm(
        face.vertex_coords[:, None, :] - centers[None, :, :], axis=2
    )
    return float(d.max())
