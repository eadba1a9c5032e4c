"""Closed level curves of a lifted cell potential on the 2-torus.

Presentation only: the cut-edge representation of a section is what the
analyses use. Values sit at cell centres; the lifted value of cell (i, j)
translated by n in Z^2 is ``F(i, j) + alpha(n)``. Marching squares runs over
the squares spanned by four neighbouring centres, one level ``t + k`` at a
time, and segments are glued into closed curves while tracking the lattice
translate. Curves are oriented with the higher side on the left, so a curve
with homology h represents the class (-h2, h1).
"""

from __future__ import annotations

import numpy as np

# corners of a square in (di, dj) order: 0=(0,0), 1=(1,0), 2=(1,1), 3=(0,1)
_CORNERS = ((0, 0), (1, 0), (1, 1), (0, 1))
# edge k joins corner k to corner k+1 (mod 4)


def _lifted(F2, alpha, i, j):
    n = F2.shape[0]
    m = F2.shape[1]
    return F2[i % n, j % m] + alpha[0] * (i // n) + alpha[1] * (j // m)


def _canonical(edge_k, i, j, n, m):
    """Canonical key of square (i, j)'s edge k and the lattice offset of the square frame."""
    # horizontal edges start at their left centre, vertical edges at their lower centre
    if edge_k == 0:
        a, b, kind = i, j, 0
    elif edge_k == 1:
        a, b, kind = i + 1, j, 1
    elif edge_k == 2:
        a, b, kind = i, j + 1, 0
    else:
        a, b, kind = i, j, 1
    off = (a // n, b // m)
    return (kind, a % n, b % m), off


def trace_level_curves(g, alpha, potential, t: float):
    """Closed polylines of ``F = t mod 1`` for a 2D grid graph.

    Returns (curves, classes): each curve is a (k, 2) array of points in the
    universal cover (unit-square coordinates, first point in [0, 1)^2, last
    point equal to the first translated by the curve's homology), and each
    class is the integer covector it represents.
    """
    n, m = g.grid.shape
    a = tuple(int(c) for c in alpha.covector)
    F2 = np.asarray(potential, dtype=np.int64).reshape(n, m)
    ii, jj = np.meshgrid(np.arange(n), np.arange(m), indexing="ij")
    vals = np.stack([_lifted(F2, a, ii + di, jj + dj) for di, dj in _CORNERS], axis=-1)
    lo = np.ceil(vals.min(axis=-1) - t).astype(np.int64)
    hi = np.floor(vals.max(axis=-1) - t).astype(np.int64)
    # segments: key (canonical edge, level in canonical frame) -> (next key, step offset, points)
    succ = {}
    for i, j in np.argwhere(hi >= lo):
        i, j = int(i), int(j)
        v = vals[i, j]
        for k in range(int(lo[i, j]), int(hi[i, j]) + 1):
            lev = t + k
            for p, q, hi_left in _square_segments(v, lev):
                kp, offp = _canonical(p, i, j, n, m)
                kq, offq = _canonical(q, i, j, n, m)
                lev_p = k - (a[0] * offp[0] + a[1] * offp[1])
                lev_q = k - (a[0] * offq[0] + a[1] * offq[1])
                start, end = (p, q) if hi_left else (q, p)
                ks, offs, ls = (kp, offp, lev_p) if hi_left else (kq, offq, lev_q)
                ke, offe, le = (kq, offq, lev_q) if hi_left else (kp, offp, lev_p)
                pt = _crossing_point(v, start, lev, i, j)
                succ[(ks, ls)] = ((ke, le), (offe[0] - offs[0], offe[1] - offs[1]), pt, offs)
    curves, classes = [], []
    seen = set()
    for key in sorted(succ):
        if key in seen:
            continue
        pts = []
        shift = np.zeros(2, dtype=np.int64)
        cur = key
        while True:
            seen.add(cur)
            nxt, step, pt, offs = succ[cur]
            # pt is in the square frame; the square frame is the canonical frame of cur minus offs
            pts.append(np.array(pt) + (shift - np.array(offs)) * [n, m])
            shift = shift + step
            cur = nxt
            if cur == key:
                break
        pts.append(pts[0] + shift * [n, m])
        arr = np.array(pts, dtype=float) / [n, m]
        base = np.floor(arr[0])
        curves.append(arr - base)
        classes.append((-int(shift[1]), int(shift[0])))
    return curves, classes


def _square_segments(v, lev):
    """Segments of the level ``lev`` in a square: (edge_in, edge_out, high-side-left)."""
    above = v > lev
    cut = [k for k in range(4) if above[k] != above[(k + 1) % 4]]
    if not cut:
        return []
    if len(cut) == 2:
        pairs = [(cut[0], cut[1])]
    else:
        # saddle: decide by the mean of the corners
        centre_above = v.mean() > lev
        if centre_above == above[0]:
            # corners 1 and 3 are isolated
            pairs = [(0, 1), (2, 3)]
        else:
            pairs = [(3, 0), (1, 2)]
    out = []
    for p, q in pairs:
        # the corner shared by edges p and q is cut off by the segment
        corner = q if (p + 1) % 4 == q else p
        out.append((p, q, _left_is_corner(p, q, corner) == bool(above[corner])))
    return out


_MID = {0: (0.5, 0.0), 1: (1.0, 0.5), 2: (0.5, 1.0), 3: (0.0, 0.5)}


def _left_is_corner(p, q, corner):
    # orientation test at edge midpoints: is ``corner`` to the left of p -> q?
    x0, y0 = _MID[p]
    x1, y1 = _MID[q]
    cx, cy = _CORNERS[corner]
    return (x1 - x0) * (cy - y0) - (y1 - y0) * (cx - x0) > 0


def _crossing_point(v, edge_k, lev, i, j):
    c0 = _CORNERS[edge_k]
    c1 = _CORNERS[(edge_k + 1) % 4]
    v0, v1 = v[edge_k], v[(edge_k + 1) % 4]
    s = (lev - v0) / (v1 - v0)
    x = c0[0] + s * (c1[0] - c0[0])
    y = c0[1] + s * (c1[1] - c0[1])
    # cell centres sit at half-integer positions in cell units
    return (i + x + 0.5, j + y + 0.5)
