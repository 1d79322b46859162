"""Laguerre/Voronoi tessellations on cubic windows with a full face lattice.

Periodic windows use the dual of the regular triangulation: generators are
lifted to ``(x, |x|^2 - r^2)``, the lower convex hull of the 3^p replicated
cloud is the weighted Delaunay triangulation, and tessellation faces are its
duals (simplex -> vertex, ..., generator -> cell).  Faces are deduplicated to
one canonical representative per torus face, keyed by their generator-id and
lattice-offset tuple modulo translation.

Non-periodic windows build each cell directly as the intersection of power
half-spaces with the window box and glue shared faces by their active
constraint sets.
"""

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, HalfspaceIntersection, QhullError

from .errors import DegenerateInputError, InvariantViolationError

__all__ = [
    "Window",
    "MarkedPoint",
    "Face",
    "Tessellation",
    "build_laguerre",
    "build_voronoi",
    "validate_tessellation",
]

DEGENERACY_TOL = 1e-10


@dataclass(frozen=True)
class Window:
    """Cubic sampling window ``[0, edge_length)^p``."""

    edge_length: float
    periodic: bool = True
    dim: int = 3

    def __post_init__(self):
        if not self.edge_length > 0:
            raise ValueError("window edge_length must be positive")
        if self.dim not in (2, 3):
            raise ValueError("only p = 2 and p = 3 windows are supported")


@dataclass(frozen=True)
class MarkedPoint:
    """Generator location with its Laguerre weight radius."""

    location: tuple
    radius: float = 0.0

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("radius must be nonnegative")


@dataclass(slots=True)
class Face:
    """One face of the tessellation's face lattice.

    ``vertex_coords`` are the coordinates of this face's canonical
    representative; for periodic windows they are unwrapped, so all geometry
    of the face can be measured directly on them.  ``cell_centers`` holds the
    generator locations of the incident cells in the same frame.
    """

    dim: int
    index: int
    vertex_ids: np.ndarray
    vertex_coords: np.ndarray
    boundary: np.ndarray
    cell_ids: np.ndarray
    cell_centers: np.ndarray
    cofaces: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    on_boundary: bool = False


@dataclass
class Tessellation:
    """Laguerre tessellation: generators plus the face lattice by dimension."""

    points: np.ndarray
    radii: np.ndarray
    window: Window
    faces: list
    empty_cells: np.ndarray
    cell_face_of_generator: np.ndarray

    @property
    def p(self):
        return self.window.dim

    @property
    def n_generators(self):
        return len(self.points)

    def face_counts(self):
        return tuple(len(f) for f in self.faces)

    def euler_characteristic(self):
        return sum((-1) ** q * len(f) for q, f in enumerate(self.faces))

    def generators(self):
        return [
            MarkedPoint(tuple(p), float(r))
            for p, r in zip(self.points, self.radii)
        ]

    def interior_faces(self, q):
        return [f for f in self.faces[q] if not f.on_boundary]

    def cell_of_face(self, face):
        """Generator id of the lexicographically minimal incident center."""
        centers = face.cell_centers
        order = np.lexsort(centers.T[::-1])
        return int(face.cell_ids[order[0]])


# ---------------------------------------------------------------------------
# shared helpers


def _group_rows(arr):
    """Row grouping like ``np.unique(axis=0)`` but via lexsort (much faster).

    Returns ``(unique, inverse, counts, first_index)`` where ``first_index``
    maps each group to one representative row index.
    """
    arr = np.ascontiguousarray(arr)
    if len(arr) == 0:
        empty = np.empty(0, dtype=np.int64)
        return arr, empty, empty, empty
    order = np.lexsort(arr.T[::-1])
    s = arr[order]
    change = np.empty(len(arr), dtype=bool)
    change[0] = True
    change[1:] = (s[1:] != s[:-1]).any(axis=1)
    group_sorted = np.cumsum(change) - 1
    inverse = np.empty(len(arr), dtype=np.int64)
    inverse[order] = group_sorted
    counts = np.bincount(group_sorted)
    first = order[np.nonzero(change)[0]]
    return s[change], inverse, counts, first


def _as_points_and_radii(points, radii, p):
    if points is None or (hasattr(points, "__len__") and len(points) == 0):
        raise ValueError("empty generator list")
    if isinstance(points[0], MarkedPoint):
        radii = np.array([mp.radius for mp in points], dtype=float)
        points = np.array([mp.location for mp in points], dtype=float)
    else:
        points = np.asarray(points, dtype=float)
        if radii is None:
            radii = np.zeros(len(points))
        else:
            radii = np.asarray(radii, dtype=float)
            if radii.shape == ():
                radii = np.full(len(points), float(radii))
    if points.ndim != 2 or points.shape[1] != p:
        raise ValueError(f"points must have shape (n, {p})")
    if radii.shape != (len(points),):
        raise ValueError("radii must match the number of points")
    if not np.isfinite(points).all() or not np.isfinite(radii).all():
        raise ValueError("points and radii must be finite")
    if (radii < 0).any():
        raise ValueError("radii must be nonnegative")
    return points, radii


def build_voronoi(points, window):
    """Voronoi tessellation: Laguerre with all radii zero."""
    points = np.asarray(points, dtype=float)
    return build_laguerre(points, window, radii=np.zeros(len(points)))


def build_laguerre(points, window, radii=None, degeneracy_tol=DEGENERACY_TOL):
    """Full face lattice of the Laguerre diagram of marked points.

    ``points`` is either an ``(n, p)`` array (with ``radii`` given separately)
    or a list of :class:`MarkedPoint`.  Generators whose Laguerre cell is
    empty are flagged in ``Tessellation.empty_cells`` but kept in the
    generator list.
    """
    p = window.dim
    points, radii = _as_points_and_radii(points, radii, p)
    L = window.edge_length
    points = np.where(points == L, 0.0, points)
    if (points < 0).any() or (points >= L).any():
        raise ValueError("generator locations must lie in [0, L)^p")
    if window.periodic:
        if len(points) < p + 2:
            raise ValueError(
                f"periodic windows need at least {p + 2} generators"
            )
        return _build_periodic(points, radii, window, degeneracy_tol)
    return _build_box(points, radii, window, degeneracy_tol)


# ---------------------------------------------------------------------------
# periodic construction (dual of the regular triangulation)


def _canonical_keys(ids, cgen, coff):
    """Translation-invariant key per face instance (rows of cloud ids).

    The anchor is the member with the smallest generator id; keys are the
    sorted ``(generator, offset - anchor_offset)`` codes.  Requires distinct
    generators per row to be collision-free, which holds for every genuine
    torus face when the window exceeds twice the largest cell diameter.
    """
    g = cgen[ids]
    o = coff[ids]
    anchor = np.argmin(g, axis=1)
    d = o[np.arange(len(ids)), anchor]
    rel = o - d[:, None, :]
    code = g.astype(np.int64)
    for k in range(o.shape[2]):
        code = code * 5 + (rel[..., k] + 2)
    return np.sort(code, axis=1)


def _pick_representatives(inverse, n_groups, inside, what):
    """One canonical representative (instance row) per group, or -1."""
    idx = np.nonzero(inside)[0]
    groups_in = inverse[idx]
    if len(groups_in) and np.bincount(groups_in, minlength=n_groups).max() > 1:
        raise InvariantViolationError(
            "periodic-window",
            f"duplicate fundamental-domain representatives for {what}; "
            "the window is too small relative to the cells",
        )
    rep = np.full(n_groups, -1, dtype=np.int64)
    rep[groups_in] = idx
    return rep


def _ring_order(others):
    """Cyclic order of the simplices around a dual 2-face, or None.

    ``others`` holds, per incident simplex, the two cloud ids besides the
    defining pair.  Consecutive ring simplices share exactly one of them.
    """
    k = len(others)
    sets = [set(map(int, o)) for o in others]
    adj = [[] for _ in range(k)]
    for i in range(k):
        for j in range(i + 1, k):
            if len(sets[i] & sets[j]) == 1:
                adj[i].append(j)
                adj[j].append(i)
    if any(len(a) != 2 for a in adj):
        return None
    ring = [0]
    prev, cur = -1, 0
    for _ in range(k - 1):
        nxt = adj[cur][0] if adj[cur][0] != prev else adj[cur][1]
        ring.append(nxt)
        prev, cur = cur, nxt
    if len(set(ring)) != k or ring[0] not in adj[ring[-1]]:
        return None
    return ring


def _build_periodic(points, radii, window, degeneracy_tol):
    p = window.dim
    L = window.edge_length
    n = len(points)

    offs = np.array(list(itertools.product((-1, 0, 1), repeat=p)), dtype=np.int64)
    offs = offs[np.argsort((offs != 0).any(axis=1), kind="stable")]  # identity first
    n_copies = len(offs)
    cloud = (points[None, :, :] + L * offs[:, None, :]).reshape(-1, p)
    cgen = np.tile(np.arange(n, dtype=np.int64), n_copies)
    coff = np.repeat(offs, n, axis=0)
    weights = (cloud**2).sum(axis=1) - np.tile(radii**2, n_copies)

    try:
        hull = ConvexHull(np.c_[cloud, weights], qhull_options="Qt")
    except QhullError as exc:
        raise DegenerateInputError(f"regular triangulation failed: {exc}") from exc
    lower = hull.equations[:, p] < -1e-12
    simps = np.sort(hull.simplices[lower], axis=1)

    pts = cloud[simps]
    ws = weights[simps]
    mat = 2.0 * (pts[:, 1:, :] - pts[:, 0:1, :])
    rhs = ws[:, 1:] - ws[:, 0:1]
    dets = np.linalg.det(mat)
    # Qt may emit zero-volume slivers when triangulating merged facets on the
    # cloud boundary; they carry no dual vertex.
    ok = np.abs(dets) > 1e-12 * max(L, 1.0) ** p
    simps = simps[ok]
    centers = np.linalg.solve(mat[ok], rhs[ok][..., None])[..., 0]
    m = len(simps)
    if m == 0:
        raise DegenerateInputError("no full-dimensional simplices found")

    in_domain = lambda x: ((x >= 0) & (x < L)).all(axis=1)
    band = 0.2 * L

    # ---- vertices: duals of the simplices
    vkeys = _canonical_keys(simps, cgen, coff)
    _, vinv, _, _ = _group_rows(vkeys)
    n_vgroups = vinv.max() + 1
    vrep = _pick_representatives(vinv, n_vgroups, in_domain(centers), "vertices")
    kept_v = np.nonzero(vrep >= 0)[0]
    vid_of_group = np.full(n_vgroups, -1, dtype=np.int64)
    vid_of_group[kept_v] = np.arange(len(kept_v))
    vid_of_simplex = vid_of_group[vinv]

    # ---- edges: duals of interior (p-1)-subfaces of the simplices
    sub_local = np.array(list(itertools.combinations(range(p + 1), p)))
    subs = simps[:, sub_local].reshape(-1, p)
    simplex_of_sub = np.repeat(np.arange(m), p + 1)
    usub, sub_inv, sub_cnt, _ = _group_rows(subs)
    order = np.argsort(sub_inv, kind="stable")
    starts = np.cumsum(np.r_[0, sub_cnt])
    interior = np.nonzero(sub_cnt == 2)[0]
    end_a = simplex_of_sub[order[starts[interior]]]
    end_b = simplex_of_sub[order[starts[interior] + 1]]

    gap = np.linalg.norm(centers[end_a] - centers[end_b], axis=1)
    mids = 0.5 * (centers[end_a] + centers[end_b])
    near = ((mids > -band) & (mids < L + band)).all(axis=1)
    if (gap[near] < degeneracy_tol).any():
        raise DegenerateInputError(
            "power-equidistant generator tuple beyond tolerance "
            f"{degeneracy_tol:g} (coincident dual vertices)"
        )

    ekeys = _canonical_keys(usub[interior], cgen, coff)
    _, einv, _, _ = _group_rows(ekeys)
    n_egroups = einv.max() + 1 if len(einv) else 0
    erep = _pick_representatives(einv, n_egroups, in_domain(mids), "edges")
    kept_e = np.nonzero(erep >= 0)[0]
    eid_of_group = np.full(n_egroups, -1, dtype=np.int64)
    eid_of_group[kept_e] = np.arange(len(kept_e))
    # lookup: sub-face instance tuple -> canonical edge id.  Ring boundary
    # wiring only ever asks for triangles joining two kept vertices.
    both_kept = (vid_of_simplex[end_a] >= 0) & (vid_of_simplex[end_b] >= 0)
    eid_of_subrow = {}
    for local in np.nonzero(both_kept)[0]:
        eid = eid_of_group[einv[local]]
        if eid >= 0:
            eid_of_subrow[tuple(usub[interior[local]])] = int(eid)

    # ---- 2-faces: duals of (p-2)-subfaces (pairs for p = 3, points for p = 2)
    if p == 3:
        pair_local = np.array(list(itertools.combinations(range(p + 1), 2)))
        prs = simps[:, pair_local].reshape(-1, 2)
        simplex_of_pair = np.repeat(np.arange(m), len(pair_local))
        upair, pair_inv, pair_cnt, _ = _group_rows(prs)
        pkeys = _canonical_keys(upair, cgen, coff)
        _, pkinv, _, _ = _group_rows(pkeys)
        n_pgroups = pkinv.max() + 1
        su = np.zeros((len(upair), p))
        np.add.at(su, pair_inv, centers[simplex_of_pair])
        pmean = su / pair_cnt[:, None]
        prep_inst = _pick_representatives(
            pkinv, n_pgroups, in_domain(pmean), "2-faces"
        )
        kept_f = np.nonzero(prep_inst >= 0)[0]
        fid_of_group = np.full(n_pgroups, -1, dtype=np.int64)
        fid_of_group[kept_f] = np.arange(len(kept_f))
        fid_of_pairinstance = fid_of_group[pkinv]

        pair_order = np.argsort(pair_inv, kind="stable")
        pair_starts = np.cumsum(np.r_[0, pair_cnt])
        # pair instances anchored at an original point, for cell boundaries
        anchored = np.nonzero(upair[:, 0] < n)[0]
        fid_of_origpair = {
            (int(upair[r, 0]), int(upair[r, 1])): int(fid_of_pairinstance[r])
            for r in anchored
        }
    else:
        upair = np.arange(len(cloud), dtype=np.int64)[:, None]
        flat = simps.reshape(-1)
        simplex_of_pair = np.repeat(np.arange(m), p + 1)
        pair_inv = flat
        pair_cnt = np.bincount(flat, minlength=len(cloud))
        pkeys = _canonical_keys(upair, cgen, coff)
        _, pkinv, _, _ = _group_rows(pkeys)
        n_pgroups = pkinv.max() + 1
        # for p = 2 cells are the 2-faces; canonical copy is the identity one
        inside_p = np.zeros(len(upair), dtype=bool)
        inside_p[:n] = pair_cnt[:n] > 0
        prep_inst = _pick_representatives(pkinv, n_pgroups, inside_p, "cells")
        kept_f = np.nonzero(prep_inst >= 0)[0]
        fid_of_group = np.full(n_pgroups, -1, dtype=np.int64)
        fid_of_group[kept_f] = np.arange(len(kept_f))
        fid_of_pairinstance = fid_of_group[pkinv]
        pair_order = np.argsort(pair_inv, kind="stable")
        pair_starts = np.cumsum(np.r_[0, np.bincount(pair_inv, minlength=len(upair))])

    # ---- assemble Face records -------------------------------------------
    verts = []
    for gid in kept_v:
        inst = vrep[gid]
        tet = simps[inst]
        if len(set(cgen[tet].tolist())) != p + 1:
            raise InvariantViolationError(
                "periodic-window",
                "a tessellation vertex touches the same generator twice; "
                "the window is too small",
            )
        verts.append(
            Face(
                dim=0,
                index=len(verts),
                vertex_ids=np.array([len(verts)], dtype=np.int64),
                vertex_coords=centers[inst][None, :].copy(),
                boundary=np.empty(0, dtype=np.int64),
                cell_ids=cgen[tet].copy(),
                cell_centers=cloud[tet].copy(),
            )
        )

    edges = []
    for gid in kept_e:
        inst = erep[gid]
        row = interior[inst]
        a, b = end_a[inst], end_b[inst]
        va, vb = vid_of_simplex[a], vid_of_simplex[b]
        if va < 0 or vb < 0:
            raise InvariantViolationError(
                "periodic-window", "edge endpoint missing its canonical vertex"
            )
        if va == vb:
            raise InvariantViolationError(
                "periodic-window", "edge closes on itself across the torus"
            )
        sub = usub[row]
        edges.append(
            Face(
                dim=1,
                index=len(edges),
                vertex_ids=np.array([va, vb], dtype=np.int64),
                vertex_coords=np.vstack([centers[a], centers[b]]),
                boundary=np.array([va, vb], dtype=np.int64),
                cell_ids=cgen[sub].copy(),
                cell_centers=cloud[sub].copy(),
            )
        )

    faces2 = []
    if p == 3:
        for gid in kept_f:
            inst = prep_inst[gid]
            a, b = upair[inst]
            sl = pair_order[pair_starts[inst] : pair_starts[inst + 1]]
            ring_simps = simplex_of_pair[sl]
            block = simps[ring_simps]
            others = block[(block != a) & (block != b)].reshape(-1, 2)
            ring = _ring_order(others)
            if ring is None:
                raise InvariantViolationError(
                    "periodic-window",
                    "dual polygon of a 2-face does not close into a ring",
                )
            ring_simps = ring_simps[ring]
            others = others[ring]
            vids = vid_of_simplex[ring_simps]
            if (vids < 0).any() or len(set(vids.tolist())) != len(vids):
                raise InvariantViolationError(
                    "periodic-window", "2-face ring references missing vertices"
                )
            bnd = []
            k = len(ring_simps)
            for i in range(k):
                j = (i + 1) % k
                shared = set(map(int, others[i])) & set(map(int, others[j]))
                tri = tuple(sorted((int(a), int(b), shared.pop())))
                eid = eid_of_subrow.get(tri)
                if eid is None:
                    raise InvariantViolationError(
                        "periodic-window", "2-face boundary edge not found"
                    )
                bnd.append(eid)
            faces2.append(
                Face(
                    dim=2,
                    index=len(faces2),
                    vertex_ids=vids.astype(np.int64),
                    vertex_coords=centers[ring_simps].copy(),
                    boundary=np.array(sorted(set(bnd)), dtype=np.int64),
                    cell_ids=cgen[[a, b]].copy(),
                    cell_centers=cloud[[a, b]].copy(),
                )
            )
            if len(set(bnd)) != k:
                raise InvariantViolationError(
                    "periodic-window", "duplicate boundary edge on a 2-face"
                )

    # ---- cells: duals of the identity-copy generators
    flat = simps.reshape(-1)
    simplex_of_entry = np.repeat(np.arange(m), p + 1)
    orig = flat < n
    pt_of_entry = flat[orig]
    simp_of_entry = simplex_of_entry[orig]
    order2 = np.argsort(pt_of_entry, kind="stable")
    pt_sorted = pt_of_entry[order2]
    simp_sorted = simp_of_entry[order2]
    cell_starts = np.searchsorted(pt_sorted, np.arange(n + 1))

    if p == 3:
        # 2-face ids per (original generator, pair instance) incidence
        col0, col1 = prs[:, 0], prs[:, 1]
        m0, m1 = col0 < n, col1 < n
        inc_gen = np.r_[col0[m0], col1[m1]]
        inc_fid = fid_of_pairinstance[np.r_[pair_inv[m0], pair_inv[m1]]]
        order3 = np.argsort(inc_gen, kind="stable")
        inc_gen_sorted = inc_gen[order3]
        inc_fid_sorted = inc_fid[order3]
        inc_starts = np.searchsorted(inc_gen_sorted, np.arange(n + 1))

    cells = []
    cell_face_of_generator = np.full(n, -1, dtype=np.int64)
    empty = []
    for g in range(n):
        sl = simp_sorted[cell_starts[g] : cell_starts[g + 1]]
        if len(sl) == 0:
            empty.append(g)
            continue
        vids = vid_of_simplex[sl]
        if (vids < 0).any():
            raise InvariantViolationError(
                "periodic-window", "cell references a missing canonical vertex"
            )
        if p == 3:
            fids = inc_fid_sorted[inc_starts[g] : inc_starts[g + 1]]
            if (fids < 0).any():
                raise InvariantViolationError(
                    "periodic-window", "cell boundary 2-face not found"
                )
            boundary = np.unique(fids)
        else:
            boundary = np.empty(0, dtype=np.int64)
        uniq_v, first_idx = np.unique(vids, return_index=True)
        cell_face_of_generator[g] = len(cells)
        cells.append(
            Face(
                dim=p,
                index=len(cells),
                vertex_ids=uniq_v.astype(np.int64),
                vertex_coords=centers[sl][first_idx].copy(),
                boundary=boundary,
                cell_ids=np.array([g], dtype=np.int64),
                cell_centers=points[g][None, :].copy(),
            )
        )

    if p == 2:
        # assemble the polygonal cells as 2-faces ordered around the center
        faces2 = []
        for c in cells:
            rel = c.vertex_coords - points[c.cell_ids[0]]
            ang = np.arctan2(rel[:, 1], rel[:, 0])
            order3 = np.argsort(ang)
            c.vertex_ids = c.vertex_ids[order3]
            c.vertex_coords = c.vertex_coords[order3]
            vset = set(c.vertex_ids.tolist())
            bnd = [
                e.index
                for e in edges
                if vset.issuperset(e.vertex_ids.tolist())
                and int(c.cell_ids[0]) in set(e.cell_ids.tolist())
            ]
            c.boundary = np.array(sorted(bnd), dtype=np.int64)
            c.index = len(faces2)
            faces2.append(c)
        face_lists = [verts, edges, faces2]
        for g in range(n):
            if cell_face_of_generator[g] >= 0:
                cell_face_of_generator[g] = faces2[
                    cell_face_of_generator[g]
                ].index
    else:
        face_lists = [verts, edges, faces2, cells]

    _wire_cofaces(face_lists)
    tess = Tessellation(
        points=points,
        radii=radii,
        window=window,
        faces=face_lists,
        empty_cells=np.array(empty, dtype=np.int64),
        cell_face_of_generator=cell_face_of_generator,
    )
    chi = tess.euler_characteristic()
    if chi != 0:
        raise InvariantViolationError(
            "torus-euler", f"V-E+F-C = {chi}, expected 0 on the torus"
        )
    return tess


def _wire_cofaces(face_lists):
    for q in range(len(face_lists) - 1):
        buckets = [[] for _ in face_lists[q]]
        for f in face_lists[q + 1]:
            for b in f.boundary:
                buckets[b].append(f.index)
        for f, cof in zip(face_lists[q], buckets):
            f.cofaces = np.array(sorted(cof), dtype=np.int64)


# ---------------------------------------------------------------------------
# non-periodic construction (per-cell half-space intersections, glued)


def _chebyshev_point(A, b, L):
    """Interior point of {A y <= b} by maximizing the slack radius."""
    norms = np.linalg.norm(A, axis=1)
    c = np.zeros(A.shape[1] + 1)
    c[-1] = -1.0
    A_ub = np.c_[A, norms]
    bounds = [(None, None)] * A.shape[1] + [(0, 2 * L)]
    res = linprog(c, A_ub=A_ub, b_ub=b, bounds=bounds, method="highs")
    if not res.success or res.x[-1] <= 1e-12 * L:
        return None
    return res.x[:-1]


def _build_box(points, radii, window, degeneracy_tol):
    p = window.dim
    L = window.edge_length
    n = len(points)
    w = (points**2).sum(axis=1) - radii**2

    # constraint planes: n power bisectors per cell plus 2p walls, as rows
    # (normal, offset) of {normal . y <= offset}
    wall_normals = np.vstack([-np.eye(p), np.eye(p)])
    wall_offsets = np.r_[np.zeros(p), np.full(p, L)]

    faces_by_key = [dict() for _ in range(p + 1)]  # key -> face data
    cell_records = []
    empty = []

    for i in range(n):
        others = np.delete(np.arange(n), i)
        A = np.vstack([2.0 * (points[others] - points[i]), wall_normals])
        b = np.r_[w[others] - w[i], wall_offsets]
        labels = [("b", int(min(i, j)), int(max(i, j))) for j in others] + [
            ("w", k) for k in range(2 * p)
        ]
        interior = _chebyshev_point(A, b, L)
        if interior is None:
            empty.append(i)
            continue
        try:
            hs = HalfspaceIntersection(np.c_[A, -b], interior)
        except QhullError as exc:
            raise DegenerateInputError(
                f"half-space intersection failed for cell {i}: {exc}"
            ) from exc
        vcoords = hs.intersections
        norms = np.linalg.norm(A, axis=1)
        resid = np.abs(vcoords @ A.T - b[None, :]) / norms[None, :]
        active = resid <= max(degeneracy_tol * 10, 1e-9) * max(L, 1.0)
        n_active = active.sum(axis=1)
        if (n_active > p).any():
            raise DegenerateInputError(
                "power-equidistant generator tuple beyond tolerance: a cell "
                f"vertex of generator {i} lies on {int(n_active.max())} planes"
            )
        # vertex key: incident generators + walls derived from active planes
        vkeys = []
        for vi in range(len(vcoords)):
            gens, walls = {i}, set()
            for ci in np.nonzero(active[vi])[0]:
                lab = labels[ci]
                if lab[0] == "b":
                    gens.update(lab[1:])
                else:
                    walls.add(lab[1])
            vkeys.append((frozenset(gens), frozenset(walls)))
        cell_records.append((i, vcoords, active, labels, vkeys))

    # glue vertices
    for i, vcoords, active, labels, vkeys in cell_records:
        for vi, key in enumerate(vkeys):
            rec = faces_by_key[0].setdefault(
                key, {"coords": vcoords[vi], "gens": key[0], "walls": key[1]}
            )
            if np.linalg.norm(rec["coords"] - vcoords[vi]) > 1e-6 * max(L, 1.0):
                raise InvariantViolationError(
                    "glue-vertices", "inconsistent shared vertex coordinates"
                )

    vkey_list = sorted(
        faces_by_key[0], key=lambda k: (sorted(k[0]), sorted(k[1]))
    )
    vid = {k: idx for idx, k in enumerate(vkey_list)}

    # per-cell facets and edges from active plane sets
    for i, vcoords, active, labels, vkeys in cell_records:
        for ci in range(active.shape[1]):
            on_plane = np.nonzero(active[:, ci])[0]
            if len(on_plane) < p:
                continue
            lab = labels[ci]
            if lab[0] == "b":
                fkey = (frozenset(lab[1:]), frozenset())
            else:
                fkey = (frozenset({i}), frozenset({lab[1]}))
            members = frozenset(vkeys[vi] for vi in on_plane)
            rec = faces_by_key[p - 1].setdefault(
                fkey, {"vkeys": members, "cells": set()}
            )
            rec["cells"].add(i)
            if rec["vkeys"] != members:
                raise InvariantViolationError(
                    "glue-facets", "inconsistent facet vertex sets"
                )
            if p == 3:
                # edges of this facet: consecutive vertices on the polygon
                coords = np.array([vcoords[vi] for vi in on_plane])
                ring = _order_polygon(coords)
                for a_i, b_i in zip(ring, np.roll(ring, -1)):
                    ka, kb = vkeys[on_plane[a_i]], vkeys[on_plane[b_i]]
                    ekey = (ka[0] & kb[0], ka[1] & kb[1])
                    erec = faces_by_key[1].setdefault(
                        ekey, {"vkeys": frozenset((ka, kb))}
                    )
                    if erec["vkeys"] != frozenset((ka, kb)):
                        raise InvariantViolationError(
                            "glue-edges", "inconsistent edge endpoints"
                        )

    # materialize Face objects -------------------------------------------
    verts = []
    for key in vkey_list:
        rec = faces_by_key[0][key]
        live_gens = sorted(g for g in rec["gens"] if g not in set(empty))
        verts.append(
            Face(
                dim=0,
                index=len(verts),
                vertex_ids=np.array([len(verts)], dtype=np.int64),
                vertex_coords=np.asarray(rec["coords"], dtype=float)[None, :],
                boundary=np.empty(0, dtype=np.int64),
                cell_ids=np.array(live_gens, dtype=np.int64),
                cell_centers=points[live_gens].copy(),
                on_boundary=bool(rec["walls"]),
            )
        )

    def _sorted_keys(d):
        return sorted(
            d, key=lambda k: (sorted(map(str, k[0])), sorted(map(str, k[1])))
        )

    edges = []
    if p == 3:
        for key in _sorted_keys(faces_by_key[1]):
            rec = faces_by_key[1][key]
            ids = sorted(vid[vk] for vk in rec["vkeys"])
            if len(ids) != 2:
                raise InvariantViolationError(
                    "glue-edges", f"edge with {len(ids)} endpoints"
                )
            cells_here = sorted(g for g in key[0] if g not in set(empty))
            edges.append(
                Face(
                    dim=1,
                    index=len(edges),
                    vertex_ids=np.array(ids, dtype=np.int64),
                    vertex_coords=np.vstack(
                        [verts[ids[0]].vertex_coords[0], verts[ids[1]].vertex_coords[0]]
                    ),
                    boundary=np.array(ids, dtype=np.int64),
                    cell_ids=np.array(cells_here, dtype=np.int64),
                    cell_centers=points[cells_here].copy(),
                    on_boundary=bool(key[1]),
                )
            )
    edge_id_by_vids = {tuple(e.vertex_ids): e.index for e in edges}

    faces2 = []
    for key in _sorted_keys(faces_by_key[p - 1]):
        rec = faces_by_key[p - 1][key]
        ids = np.array(sorted(vid[vk] for vk in rec["vkeys"]), dtype=np.int64)
        coords = np.vstack([verts[j].vertex_coords[0] for j in ids])
        ring = _order_polygon(coords) if p == 3 else np.argsort(coords[:, 0])
        ids = ids[ring]
        coords = coords[ring]
        if p == 3:
            bnd = []
            for a_i, b_i in zip(ids, np.roll(ids, -1)):
                eid = edge_id_by_vids.get(tuple(sorted((int(a_i), int(b_i)))))
                if eid is None:
                    raise InvariantViolationError(
                        "glue-facets", "facet boundary edge missing"
                    )
                bnd.append(eid)
        else:
            bnd = list(ids)
        cells_here = sorted(g for g in key[0] if g not in set(empty))
        faces2.append(
            Face(
                dim=p - 1,
                index=len(faces2),
                vertex_ids=ids,
                vertex_coords=coords,
                boundary=np.array(sorted(set(bnd)), dtype=np.int64),
                cell_ids=np.array(cells_here, dtype=np.int64),
                cell_centers=points[cells_here].copy(),
                on_boundary=bool(key[1]),
            )
        )
    f2_by_key = {}
    for key in _sorted_keys(faces_by_key[p - 1]):
        f2_by_key[key] = len(f2_by_key)

    cells = []
    cell_face_of_generator = np.full(n, -1, dtype=np.int64)
    for i, vcoords, active, labels, vkeys in cell_records:
        ids = np.array(sorted({vid[vk] for vk in vkeys}), dtype=np.int64)
        coords = np.vstack([verts[j].vertex_coords[0] for j in ids])
        bnd = sorted(
            idx
            for key, idx in f2_by_key.items()
            if i in faces_by_key[p - 1][key]["cells"]
        )
        touches_wall = any(vkeys[vi][1] for vi in range(len(vkeys)))
        cell_face_of_generator[i] = len(cells)
        cells.append(
            Face(
                dim=p,
                index=len(cells),
                vertex_ids=ids,
                vertex_coords=coords,
                boundary=np.array(bnd, dtype=np.int64),
                cell_ids=np.array([i], dtype=np.int64),
                cell_centers=points[i][None, :].copy(),
                on_boundary=touches_wall,
            )
        )

    face_lists = [verts, edges, faces2, cells] if p == 3 else [verts, faces2, cells]
    _wire_cofaces(face_lists)
    tess = Tessellation(
        points=points,
        radii=radii,
        window=window,
        faces=face_lists,
        empty_cells=np.array(sorted(empty), dtype=np.int64),
        cell_face_of_generator=cell_face_of_generator,
    )
    chi = tess.euler_characteristic()
    if chi != 1:
        raise InvariantViolationError(
            "box-euler", f"alternating face count = {chi}, expected 1 for a box"
        )
    return tess


def _order_polygon(coords):
    """Cyclic order of coplanar points around their centroid."""
    center = coords.mean(axis=0)
    rel = coords - center
    _, _, vt = np.linalg.svd(rel, full_matrices=False)
    u, v = vt[0], vt[1]
    ang = np.arctan2(rel @ v, rel @ u)
    return np.argsort(ang)


# ---------------------------------------------------------------------------
# invariants


def validate_tessellation(tess, strict=True):
    """Check structural invariants, raising :class:`InvariantViolationError`.

    Structural checks (id validity, boundary closure, incidence symmetry)
    always run.  ``strict`` additionally requires every face below the top
    dimension to have a coface, generic vertex incidence, and the Euler
    characteristic of the window topology.
    """
    p = tess.p
    nq = len(tess.faces)
    for q, faces in enumerate(tess.faces):
        for pos, f in enumerate(faces):
            if f.dim != q or f.index != pos:
                raise InvariantViolationError(
                    "face-ids", f"dim {q} position {pos} holds face "
                    f"(dim={f.dim}, index={f.index})"
                )
            if q >= 1:
                lower = tess.faces[q - 1]
                for b in f.boundary:
                    if not (0 <= b < len(lower)):
                        raise InvariantViolationError(
                            "boundary-ids", f"dim {q} face {f.index} -> {b}"
                        )
                    if q >= 2 and not set(lower[b].vertex_ids.tolist()) <= set(
                        f.vertex_ids.tolist()
                    ):
                        raise InvariantViolationError(
                            "boundary-closure",
                            f"dim {q} face {f.index} boundary {b} has "
                            "vertices outside the face",
                        )
                    if f.index not in lower[b].cofaces:
                        raise InvariantViolationError(
                            "incidence-symmetry",
                            f"dim {q} face {f.index} missing from cofaces "
                            f"of its boundary face {b}",
                        )
    if not strict:
        return
    for q in range(nq - 1):
        for f in tess.faces[q]:
            if f.on_boundary:
                continue
            if len(f.cofaces) == 0:
                raise InvariantViolationError(
                    "coface-existence", f"interior dim {q} face {f.index}"
                )
    if p == 3:
        for f in tess.faces[0]:
            if f.on_boundary:
                continue
            if len(f.cell_ids) != 4 or len(f.cofaces) != 4:
                raise InvariantViolationError(
                    "simple-vertex",
                    f"vertex {f.index} touches {len(f.cell_ids)} cells / "
                    f"{len(f.cofaces)} edges, expected 4 / 4",
                )
    chi = tess.euler_characteristic()
    expected = 0 if tess.window.periodic else 1
    if chi != expected:
        raise InvariantViolationError(
            "euler-characteristic", f"got {chi}, expected {expected}"
        )
