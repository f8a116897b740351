"""Independent oracles used across the test modules.

Everything here recomputes quantities by a route different from the
library's own: Monte Carlo hit counting instead of exact clipping, brute
enumeration instead of hierarchical descent, dense matrix powers instead
of spectral shortcuts. Slow and simple on purpose.
"""

import math

import numpy as np


def mc_points_in_domain(dom, pts):
    """Boolean mask of points inside a domain, by direct definition."""
    if dom.kind == "cube":
        lo = np.asarray(dom.center) - dom.size / 2.0
        hi = np.asarray(dom.center) + dom.size / 2.0
        return np.all((pts >= lo) & (pts <= hi), axis=1)
    if dom.kind == "ball":
        return np.sum((pts - np.asarray(dom.center)) ** 2, axis=1) <= dom.size**2
    if dom.kind == "polytope":
        return points_in_polygon(dom.placed_verts(), pts)
    if dom.kind == "region":
        mask = np.zeros(len(pts), dtype=bool)
        for p in dom.pieces:
            mask |= mc_points_in_piece(p, pts)
        return mask
    raise ValueError(dom.kind)


def points_in_polygon(verts, pts):
    verts = np.asarray(verts, dtype=float)
    mask = np.ones(len(pts), dtype=bool)
    for a, b in zip(verts, np.roll(verts, -1, axis=0)):
        edge = b - a
        rel = pts - a
        mask &= edge[0] * rel[:, 1] - edge[1] * rel[:, 0] >= -1e-12
    return mask


def mc_points_in_piece(piece, pts):
    if piece.d == 1:
        return (pts[:, 0] >= piece.lo[0]) & (pts[:, 0] <= piece.hi[0])
    if piece.is_box:
        return np.all((pts >= piece.lo) & (pts <= piece.hi), axis=1)
    return points_in_polygon(piece.verts, pts)


def mc_clip_volume(dom, pieces, n_points, rng):
    """Monte Carlo volume of domain-intersect-pieces with its 1-sigma error.

    Samples uniformly over the pieces' bounding box and counts hits in
    both; the binomial error scales with the box volume.
    """
    lo = np.min([p.lo for p in pieces], axis=0)
    hi = np.max([p.hi for p in pieces], axis=0)
    box_vol = float(np.prod(hi - lo))
    pts = rng.uniform(lo, hi, size=(n_points, len(lo)))
    in_pieces = np.zeros(n_points, dtype=bool)
    for p in pieces:
        in_pieces |= mc_points_in_piece(p, pts)
    hits = in_pieces & mc_points_in_domain(dom, pts)
    k = int(hits.sum())
    frac = k / n_points
    est = frac * box_vol
    sigma = box_vol * math.sqrt(max(frac * (1.0 - frac), 1.0 / n_points) / n_points)
    return est, sigma


def brute_tiles_in(system, view, dom, order=0):
    """All order-`order` tiles meeting the domain, by exhaustive walk.

    Descends the whole root without any pruning shortcuts and keeps tiles
    whose support has positive clipped volume or touches the domain.
    """
    from subtiling.geometry import TileClass, classify

    geps = system.metrics().geps
    out = []
    stack = [view.root]
    while stack:
        t = stack.pop()
        if t.order == order:
            cls = classify(t.support(system), dom, geps)
            if cls is not TileClass.OUTSIDE:
                out.append((t, cls))
        else:
            stack.extend(t.children(system))
    out.sort(key=lambda e: (e[0].offset, e[0].type))
    return out


def dense_matrix_power(M, k):
    out = np.eye(M.shape[0], dtype=object)
    M = np.asarray(M, dtype=object)
    for _ in range(k):
        out = out @ M
    return out


def empirical_cdf_distance(a, b):
    """Two-sample KS by direct double loop over the pooled grid."""
    grid = np.concatenate([a, b])
    worst = 0.0
    for x in grid:
        fa = np.mean(a <= x)
        fb = np.mean(b <= x)
        worst = max(worst, abs(fa - fb))
    return worst
