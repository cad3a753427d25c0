from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import geometry as geo


class MeshError(ValueError):
    """Raised for invalid cells or non-conforming meshes."""


@dataclass(frozen=True)
class PlanarEdge:
    """A maximal run of collinear boundary edges of one cell.

    ``positions`` indexes into the cell's vertex list, from the start corner
    to the end corner inclusive (wrapping around).
    """

    positions: tuple
    start: int
    end: int
    midpoint: np.ndarray

    @property
    def n_edges(self):
        return len(self.positions) - 1


class PolygonMesh:
    """Immutable polygonal mesh.

    Parameters
    ----------
    vertices : (nv, 2) array
    cells : sequence of CCW vertex-index sequences
    meta : optional dict carried through I/O (family, n, seed, ...)

    Use :func:`build_topology` to construct one; it validates the cells and
    fills in the edge table.
    """

    def __init__(self, vertices, cells, edges, areas, centroids, diameters, meta=None,
                 parents=None):
        self.vertices = vertices
        self.cells = cells
        self.edges = edges
        self.areas = areas
        self.centroids = centroids
        self.diameters = diameters
        self.meta = dict(meta or {})
        self.parents = parents
        for arr in (vertices, edges, areas, centroids, diameters):
            arr.setflags(write=False)
        self._cache = {}

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_cells(self):
        return len(self.cells)

    @property
    def h(self):
        return float(self.diameters.max())

    @cached_property
    def boundary_edges(self):
        return self.edges[self.edges[:, 3] < 0, :2]

    @cached_property
    def boundary_vertex_flags(self):
        flags = np.zeros(self.n_vertices, dtype=bool)
        flags[self.boundary_edges.ravel()] = True
        flags.setflags(write=False)
        return flags

    @cached_property
    def boundary_vertices(self):
        return np.flatnonzero(self.boundary_vertex_flags)

    @cached_property
    def vertex_cells(self):
        """For every vertex, the sorted ids of the cells that list it."""
        out = [[] for _ in range(self.n_vertices)]
        for c, cell in enumerate(self.cells):
            for v in cell:
                out[v].append(c)
        return [tuple(x) for x in out]

    @cached_property
    def edge_cells(self):
        """Map from sorted vertex pair to the one or two cells sharing it."""
        out = {}
        for a, b, left, right in self.edges:
            key = (int(min(a, b)), int(max(a, b)))
            out[key] = (int(left),) if right < 0 else (int(left), int(right))
        return out

    @cached_property
    def total_area(self):
        return float(self.areas.sum())

    def cell_points(self, c):
        return self.vertices[self.cells[c]]

    def cell_edges(self, c):
        cell = self.cells[c]
        return [(int(cell[k]), int(cell[(k + 1) % len(cell)])) for k in range(len(cell))]

    def __repr__(self):
        fam = self.meta.get("family", "?")
        return f"PolygonMesh(family={fam}, vertices={self.n_vertices}, cells={self.n_cells}, h={self.h:.4g})"


def cell_area_centroid(mesh, cell_id):
    """Area and area centroid of one cell; degenerate cells are rejected."""
    pts = mesh.cell_points(cell_id)
    a, c = geo.area_centroid(pts)
    if a <= 1e-14 * geo.diameter(pts) ** 2:
        raise MeshError(f"cell {cell_id} is degenerate (area {a:.3e})")
    return a, c


def _check_t_junctions(vertices, bedges):
    """Look for vertices lying strictly inside a once-used edge."""
    if len(bedges) == 0:
        return
    cand = np.unique(bedges.ravel())
    q = vertices[cand]
    for a, b in bedges:
        pa, pb = vertices[a], vertices[b]
        e = pb - pa
        L2 = float(e @ e)
        w = q - pa
        t = (w @ e) / L2
        cr = e[0] * w[:, 1] - e[1] * w[:, 0]
        hit = (t > 1e-9) & (t < 1 - 1e-9) & (np.abs(cr) <= 1e-10 * L2)
        hit &= (cand != a) & (cand != b)
        if hit.any():
            v = int(cand[np.flatnonzero(hit)[0]])
            raise MeshError(
                f"non-conforming edge ({int(a)}, {int(b)}): vertex {v} lies inside it but "
                "is not part of the adjacent cell"
            )


def build_topology(vertices, cells, meta=None, parents=None, check_simple=True):
    """Validate raw vertex/cell lists and assemble a :class:`PolygonMesh`.

    Cells must be simple, CCW and non-degenerate. Every undirected edge has
    to be used once (boundary) or twice in opposite directions (interior).
    A vertex sitting inside a boundary edge signals a missing hanging node
    and is reported as a non-conforming edge.
    """
    vertices = np.array(vertices, dtype=float).reshape(-1, 2)
    if not np.all(np.isfinite(vertices)):
        raise MeshError("non-finite vertex coordinates")
    nv = len(vertices)
    cells = [np.array(c, dtype=np.int64) for c in cells]
    nc = len(cells)
    areas = np.empty(nc)
    centroids = np.empty((nc, 2))
    diameters = np.empty(nc)
    directed = {}
    for ci, cell in enumerate(cells):
        if len(cell) < 3:
            raise MeshError(f"cell {ci} has fewer than 3 vertices")
        if cell.min() < 0 or cell.max() >= nv:
            raise MeshError(f"cell {ci} references a missing vertex")
        if len(set(cell.tolist())) != len(cell):
            raise MeshError(f"cell {ci} repeats a vertex")
        pts = vertices[cell]
        a, c = geo.area_centroid(pts)
        d = geo.diameter(pts)
        if a <= 1e-14 * d * d:
            if a < 0:
                raise MeshError(f"cell {ci} is clockwise (signed area {a:.3e})")
            raise MeshError(f"cell {ci} is degenerate (area {a:.3e})")
        if check_simple and not geo.is_simple(pts):
            raise MeshError(f"cell {ci} is not simple")
        areas[ci], centroids[ci], diameters[ci] = a, c, d
        n = len(cell)
        for k in range(n):
            e = (int(cell[k]), int(cell[(k + 1) % n]))
            if e in directed:
                raise MeshError(f"edge {e} is used twice in the same direction")
            directed[e] = ci
    rows = []
    for (a, b), left in directed.items():
        right = directed.get((b, a))
        if right is None:
            rows.append((a, b, left, -1))
        elif a < b:
            rows.append((a, b, left, right))
    edges = np.array(rows, dtype=np.int64).reshape(-1, 4)
    _check_t_junctions(vertices, edges[edges[:, 3] < 0, :2])
    used = np.zeros(nv, dtype=bool)
    for cell in cells:
        used[cell] = True
    if not used.all():
        raise MeshError(f"{np.count_nonzero(~used)} vertices are not used by any cell")
    for cell in cells:
        cell.setflags(write=False)
    return PolygonMesh(vertices, tuple(cells), edges, areas, centroids, diameters, meta, parents)


def corner_positions(pts, tol=geo.COLLINEAR_TOL):
    """Positions of the vertices that are not hanging nodes."""
    n = len(pts)
    return [k for k in range(n)
            if not geo.is_straight(pts[k - 1], pts[k], pts[(k + 1) % n], tol)]


def planar_edges_of(pts, tol=geo.COLLINEAR_TOL):
    """Planar-edge decomposition of a single polygon given by its points."""
    n = len(pts)
    corners = corner_positions(pts, tol)
    runs = []
    for j, s in enumerate(corners):
        e = corners[(j + 1) % len(corners)]
        span = (e - s) % n or n
        pos = tuple((s + k) % n for k in range(span + 1))
        runs.append(PlanarEdge(pos, s, e, 0.5 * (pts[s] + pts[e])))
    return runs


def planar_edges(mesh, cell_id, tol=geo.COLLINEAR_TOL):
    """Maximal collinear edge runs of a cell.

    Returns a list of :class:`PlanarEdge` in CCW order; each reports the
    start/end positions in the cell's vertex list and the geometric
    midpoint of the run.
    """
    return planar_edges_of(mesh.cell_points(cell_id), tol)
