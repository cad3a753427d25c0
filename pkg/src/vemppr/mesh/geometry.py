"""Planar polygon primitives shared by the mesh, quadrature and refinement code.

Polygons are ``(N, 2)`` float arrays listed counter-clockwise. Consecutive
collinear vertices are allowed everywhere.
"""

import numpy as np

COLLINEAR_TOL = 1e-10


def signed_area(pts):
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def area_centroid(pts):
    """Exact area and area centroid of a simple polygon (shoelace).

    Coordinates are shifted to the first vertex before accumulating so the
    result does not lose digits for small cells far from the origin.
    """
    p0 = pts[0]
    q = pts - p0
    x, y = q[:, 0], q[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    a = 0.5 * cross.sum()
    if a == 0.0:
        return 0.0, pts.mean(axis=0)
    cx = ((x + xn) * cross).sum() / (6.0 * a)
    cy = ((y + yn) * cross).sum() / (6.0 * a)
    return float(a), np.array([cx, cy]) + p0


def diameter(pts):
    d = pts[:, None, :] - pts[None, :, :]
    return float(np.sqrt((d ** 2).sum(axis=-1).max()))


def is_collinear(u, v, w, tol=COLLINEAR_TOL):
    """Scale-free collinearity of three points.

    ``|cross(v - u, w - u)| <= tol * |v - u| * |w - u|``
    """
    a = v - u
    b = w - u
    cr = a[0] * b[1] - a[1] * b[0]
    return abs(cr) <= tol * np.hypot(*a) * np.hypot(*b)


def is_straight(prev, v, nxt, tol=COLLINEAR_TOL):
    """True when ``v`` lies inside the segment ``prev -- nxt`` (a hanging node)."""
    if not is_collinear(prev, v, nxt, tol):
        return False
    return float(np.dot(v - prev, nxt - v)) > 0.0


def is_convex(pts, tol=COLLINEAR_TOL):
    """Convexity test that tolerates collinear vertices."""
    e = np.roll(pts, -1, axis=0) - pts
    ep = np.roll(e, 1, axis=0)
    cr = ep[:, 0] * e[:, 1] - ep[:, 1] * e[:, 0]
    scale = np.hypot(ep[:, 0], ep[:, 1]) * np.hypot(e[:, 0], e[:, 1])
    return bool(np.all(cr >= -tol * scale))


def _orient(a, b, c):
    return (b[..., 0] - a[..., 0]) * (c[..., 1] - a[..., 1]) - (b[..., 1] - a[..., 1]) * (
        c[..., 0] - a[..., 0]
    )


def is_simple(pts):
    """True if no two non-adjacent edges of the closed polyline touch.

    Adjacent edges may only share their common vertex, so a fold-back
    (a spike of zero width) is also rejected.
    """
    n = len(pts)
    if n < 3:
        return False
    a = pts
    b = np.roll(pts, -1, axis=0)
    scale = max(diameter(pts), 1e-300)
    tol = 1e-12 * scale * scale
    i, j = np.triu_indices(n, k=1)
    adjacent = (j == i + 1) | ((i == 0) & (j == n - 1))
    i, j = i[~adjacent], j[~adjacent]
    if len(i):
        d1 = _orient(a[i], b[i], a[j])
        d2 = _orient(a[i], b[i], b[j])
        d3 = _orient(a[j], b[j], a[i])
        d4 = _orient(a[j], b[j], b[i])
        proper = (d1 * d2 < -tol * tol) & (d3 * d4 < -tol * tol)
        if proper.any():
            return False
        # touching cases: an endpoint lying on the other segment
        for (p, q, r, d) in ((a[i], b[i], a[j], d1), (a[i], b[i], b[j], d2),
                             (a[j], b[j], a[i], d3), (a[j], b[j], b[i], d4)):
            on_line = np.abs(d) <= tol
            if on_line.any():
                t = np.einsum("ij,ij->i", r - p, q - p) / np.einsum("ij,ij->i", q - p, q - p)
                if np.any(on_line & (t >= -1e-12) & (t <= 1 + 1e-12)):
                    return False
    # adjacent edges folding back onto each other
    e = b - a
    ep = np.roll(e, 1, axis=0)
    cr = ep[:, 0] * e[:, 1] - ep[:, 1] * e[:, 0]
    dot = (ep * e).sum(axis=1)
    scale_e = np.hypot(ep[:, 0], ep[:, 1]) * np.hypot(e[:, 0], e[:, 1])
    if np.any((np.abs(cr) <= COLLINEAR_TOL * scale_e) & (dot < 0)):
        return False
    return True


def point_in_polygon(p, pts, strict=True):
    """Even-odd test; with ``strict`` points within 1e-12 of the boundary are outside."""
    a = pts
    b = np.roll(pts, -1, axis=0)
    scale = diameter(pts)
    e = b - a
    w = p - a
    t = np.clip(np.einsum("ij,ij->i", w, e) / np.einsum("ij,ij->i", e, e), 0.0, 1.0)
    dist = np.sqrt(((w - t[:, None] * e) ** 2).sum(axis=1)).min()
    if dist <= 1e-12 * scale:
        return not strict
    crosses = (a[:, 1] > p[1]) != (b[:, 1] > p[1])
    with np.errstate(divide="ignore", invalid="ignore"):
        xint = a[:, 0] + (p[1] - a[:, 1]) * e[:, 0] / e[:, 1]
    return bool(np.count_nonzero(crosses & (p[0] < xint)) % 2)


def ear_clip(pts):
    """Triangulate a simple CCW polygon; returns a list of index triples.

    Collinear vertices are never clipped as ears; triangles of zero area are
    dropped, so a polygon with hanging nodes yields only proper triangles.
    """
    idx = list(range(len(pts)))
    tris = []
    scale = diameter(pts)
    atol = 1e-14 * scale * scale
    guard = 0
    while len(idx) > 3 and guard < 10 * len(pts) ** 2:
        guard += 1
        m = len(idx)
        clipped = False
        for k in range(m):
            i0, i1, i2 = idx[k - 1], idx[k], idx[(k + 1) % m]
            a, b, c = pts[i0], pts[i1], pts[i2]
            if _orient(a, b, c) <= 2 * atol:
                continue
            others = [j for j in idx if j not in (i0, i1, i2)]
            if others:
                q = pts[others]
                d0 = _orient(a, b, q)
                d1 = _orient(b, c, q)
                d2 = _orient(c, a, q)
                inside = (d0 >= -atol) & (d1 >= -atol) & (d2 >= -atol)
                # a vertex coinciding with a or c does not block the ear
                if inside.any():
                    continue
            tris.append((i0, i1, i2))
            del idx[k]
            clipped = True
            break
        if not clipped:
            # only collinear leftovers remain
            break
    if len(idx) == 3:
        a, b, c = (pts[i] for i in idx)
        if _orient(a, b, c) > 2 * atol:
            tris.append(tuple(idx))
    return tris


def clip_to_box(pts, xmin, xmax, ymin, ymax):
    """Sutherland-Hodgman clip of a polygon against an axis-aligned box.

    Intersection points get the clip coordinate exactly, so neighbours cut by
    the same line produce identical boundary points.
    """
    poly = [tuple(p) for p in pts]
    planes = ((0, xmin, 1.0), (0, xmax, -1.0), (1, ymin, 1.0), (1, ymax, -1.0))
    for axis, val, sign in planes:
        if not poly:
            break
        out = []
        n = len(poly)
        for k in range(n):
            cur = poly[k]
            nxt = poly[(k + 1) % n]
            cin = sign * (cur[axis] - val) >= 0
            nin = sign * (nxt[axis] - val) >= 0
            if cin:
                out.append(cur)
            if cin != nin:
                t = (val - cur[axis]) / (nxt[axis] - cur[axis])
                other = 1 - axis
                q = [0.0, 0.0]
                q[axis] = val
                q[other] = cur[other] + t * (nxt[other] - cur[other])
                out.append(tuple(q))
        poly = out
    return np.array(poly, dtype=float).reshape(-1, 2)
