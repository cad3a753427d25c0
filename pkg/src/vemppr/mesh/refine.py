"""Barycentric refinement of marked polygons with hanging-node bookkeeping.

A marked cell is cut into one quadrilateral per planar edge by joining its
area centroid to the midpoints of its planar edges. The midpoint of a
planar edge is inserted into the unmarked neighbour as an extra collinear
vertex, which keeps the mesh conforming in the vertex-to-vertex sense.
"""

import numpy as np

from . import geometry as geo
from .core import MeshError, build_topology, corner_positions, planar_edges_of

_MID_TOL = 1e-9


class _Refiner:
    def __init__(self, mesh):
        self.verts = [tuple(v) for v in mesh.vertices]
        self.cells = {c: [int(v) for v in cell] for c, cell in enumerate(mesh.cells)}
        self.owner = {}
        for c, cell in self.cells.items():
            self._own(c, cell)
        self.next_key = mesh.n_cells

    def _own(self, key, cell):
        n = len(cell)
        for k in range(n):
            self.owner[cell[k], cell[(k + 1) % n]] = key

    def _disown(self, cell):
        n = len(cell)
        for k in range(n):
            del self.owner[cell[k], cell[(k + 1) % n]]

    def pts(self, cell):
        return np.array([self.verts[v] for v in cell])

    def new_vertex(self, p):
        self.verts.append((float(p[0]), float(p[1])))
        return len(self.verts) - 1

    def add_cell(self, cell):
        key = self.next_key
        self.next_key += 1
        self.cells[key] = cell
        self._own(key, cell)
        return key

    def remove_cell(self, key):
        cell = self.cells.pop(key)
        self._disown(cell)
        return cell

    def insert_on_edge(self, a, b, m):
        """Insert vertex ``m`` into directed edge a->b and into its twin b->a."""
        for (p, q) in ((a, b), (b, a)):
            key = self.owner.pop((p, q), None)
            if key is None:
                continue
            cell = self.cells[key]
            k = cell.index(p)
            cell.insert(k + 1, m)
            self.owner[p, m] = key
            self.owner[m, q] = key

    def _plan(self, cell):
        """Geometric plan of a split: run midpoints and child polygons, or None."""
        pts = self.pts(cell)
        runs = planar_edges_of(pts)
        _, cen = geo.area_centroid(pts)
        if not geo.point_in_polygon(cen, pts, strict=True):
            return None
        plan = []
        for run in runs:
            ps, pe = pts[run.start], pts[run.end]
            d = pe - ps
            ts = [float(np.dot(pts[p] - ps, d) / np.dot(d, d)) for p in run.positions]
            hit = next((j for j, t in enumerate(ts) if abs(t - 0.5) <= _MID_TOL), None)
            if hit is not None:
                plan.append(("existing", run, hit))
            else:
                j = next(j for j in range(len(ts) - 1) if ts[j] < 0.5 < ts[j + 1])
                plan.append(("new", run, j))
        # child polygons by coordinates, for validation before committing
        diam = geo.diameter(pts)
        m = len(runs)
        for k in range(m):
            kind_p, run_p, jp = plan[k - 1]
            kind_n, run_n, jn = plan[k]
            poly = []
            mp = 0.5 * (pts[run_p.start] + pts[run_p.end])
            poly.append(mp)
            for pos in run_p.positions[jp + 1:]:
                poly.append(pts[pos])
            last = jn if kind_n == "existing" else jn + 1
            for pos in run_n.positions[1:last]:
                poly.append(pts[pos])
            poly.append(0.5 * (pts[run_n.start] + pts[run_n.end]))
            poly.append(cen)
            poly = np.array(poly)
            if geo.signed_area(poly) <= 1e-14 * diam * diam or not geo.is_simple(poly):
                return None
        return runs, plan, cen

    def split(self, key):
        cell = self.cells[key]
        planned = self._plan(cell)
        if planned is None:
            return None
        runs, plan, cen = planned
        pts = self.pts(cell)
        # resolve ids first: insertions below shift positions in ``cell``
        todo = []
        for kind, run, j in plan:
            if kind == "existing":
                todo.append(cell[run.positions[j]])
            else:
                todo.append((cell[run.positions[j]], cell[run.positions[j + 1]],
                             0.5 * (pts[run.start] + pts[run.end])))
        mids = []
        for item in todo:
            if isinstance(item, tuple):
                a, b, p = item
                m = self.new_vertex(p)
                self.insert_on_edge(a, b, m)
                mids.append(m)
            else:
                mids.append(item)
        cell = self.remove_cell(key)
        c = self.new_vertex(cen)
        n = len(cell)
        pos = {v: k for k, v in enumerate(cell)}
        children = []
        for k in range(len(runs)):
            s, e = pos[mids[k - 1]], pos[mids[k]]
            span = (e - s) % n
            child = [cell[(s + t) % n] for t in range(span + 1)] + [c]
            children.append(self.add_cell(child))
        return children

    def split_convex_pieces(self, key):
        """Ear-clip the corner polygon and re-attach hanging vertices to the pieces."""
        cell = self.cells[key]
        pts = self.pts(cell)
        corners = corner_positions(pts)
        tris = geo.ear_clip(pts[corners])
        if not tris:
            raise MeshError(f"cannot triangulate cell {key} for refinement")
        nc = len(corners)
        n = len(cell)
        self.remove_cell(key)
        pieces = []
        for tri in tris:
            verts = []
            for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
                pa = corners[a]
                verts.append(cell[pa])
                if b == (a + 1) % nc:
                    pb = corners[b]
                    span = (pb - pa) % n
                    verts.extend(cell[(pa + t) % n] for t in range(1, span))
            pieces.append(self.add_cell(verts))
        return pieces

    def refine_cell(self, key):
        children = self.split(key)
        if children is not None:
            return children
        out = []
        for piece in self.split_convex_pieces(key):
            sub = self.split(piece)
            if sub is None:
                raise MeshError(f"refinement of cell {key} failed after convex pre-splitting")
            out.extend(sub)
        return out


def refine(mesh, marked):
    """Refine the marked cells of ``mesh``; returns a new mesh.

    Cells keep their relative order; each marked cell is replaced in place
    by its children. ``result.parents[i]`` is the index of the cell of the
    input mesh that cell ``i`` came from.
    """
    marked = sorted({int(c) for c in marked})
    for c in marked:
        if not 0 <= c < mesh.n_cells:
            raise MeshError(f"marked cell {c} does not exist")
    r = _Refiner(mesh)
    children = {}
    for c in marked:
        children[c] = r.refine_cell(c)
    new_cells = []
    parents = []
    for c in range(mesh.n_cells):
        keys = children.get(c, [c])
        for k in keys:
            new_cells.append(r.cells[k])
            parents.append(c)
    meta = dict(mesh.meta)
    meta["refinements"] = int(meta.get("refinements", 0)) + 1
    return build_topology(np.array(r.verts), new_cells, meta=meta,
                          parents=np.array(parents, dtype=np.int64))


def refine_all(mesh):
    return refine(mesh, range(mesh.n_cells))
