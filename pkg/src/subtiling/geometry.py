"""Exact geometry for tiles and query domains in dimension 1 and 2.

Tiles are unions of convex pieces (intervals / convex polygons; axis-aligned
rectangles get a fast path). Domains are cubes Q_r = [-r/2, r/2]^d + center,
balls, convex polytopes, or `region` unions of interior-disjoint convex
pieces (so a supertile support can itself serve as a domain).

Classification follows the closed trichotomy: Inside means support contained
in the closed domain, Outside means interior-disjoint, Crossing otherwise.
Contact within `geps` of the boundary snaps to the exact-contact answer, so
supertile-aligned domains classify Inside/Outside rather than Crossing;
genuine straddles always classify Crossing.
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import FormatError


class TileClass(Enum):
    INSIDE = "inside"
    OUTSIDE = "outside"
    CROSSING = "crossing"


def _shoelace(verts):
    x = verts[:, 0]
    y = verts[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


class Piece:
    """One convex piece of a tile support.

    d=1: an interval; d=2: a convex polygon stored CCW with no repeated
    closing vertex. `is_box` marks axis-aligned rectangles (and every
    interval), which unlocks exact product-form clipping.
    """

    __slots__ = ("d", "verts", "lo", "hi", "is_box", "volume")

    def __init__(self, verts, _skip_checks=False):
        verts = np.asarray(verts, dtype=float)
        if verts.ndim != 2 or verts.shape[1] not in (1, 2):
            raise FormatError("piece vertices must be an (n, d) array with d in {1, 2}")
        self.d = verts.shape[1]
        if self.d == 1:
            if verts.shape[0] != 2:
                raise FormatError("an interval piece needs exactly two endpoints")
            a, b = float(verts[0, 0]), float(verts[1, 0])
            if not b > a:
                raise FormatError(f"degenerate interval [{a}, {b}]")
            self.verts = np.array([[a], [b]])
            self.lo = np.array([a])
            self.hi = np.array([b])
            self.is_box = True
            self.volume = b - a
            return
        if verts.shape[0] < 3:
            raise FormatError("a polygon piece needs at least three vertices")
        if not _skip_checks:
            if _shoelace(verts) < 0:
                verts = verts[::-1].copy()
            _check_convex(verts)
        self.verts = verts
        self.lo = verts.min(axis=0)
        self.hi = verts.max(axis=0)
        self.is_box = bool(
            verts.shape[0] == 4
            and np.all((verts == self.lo) | (verts == self.hi))
            and np.all(self.hi > self.lo)
        )
        self.volume = _shoelace(verts)
        if self.volume <= 0.0:
            raise FormatError("degenerate polygon piece (zero area)")

    @classmethod
    def interval(cls, a, b):
        return cls([[a], [b]])

    @classmethod
    def box(cls, lo, hi):
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        hi = np.atleast_1d(np.asarray(hi, dtype=float))
        if lo.shape == (1,):
            return cls.interval(lo[0], hi[0])
        return cls(
            [[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]]
        )

    def placed(self, scale=1.0, offset=None):
        """The piece mapped by x -> scale*x + offset."""
        v = self.verts * scale
        if offset is not None:
            v = v + np.asarray(offset, dtype=float)
        out = Piece.__new__(Piece)
        out.d = self.d
        out.verts = v
        out.lo = v.min(axis=0)
        out.hi = v.max(axis=0)
        out.is_box = self.is_box
        out.volume = self.volume * scale**self.d
        return out

    @property
    def diameter(self):
        if self.d == 1:
            return self.volume
        dif = self.verts[:, None, :] - self.verts[None, :, :]
        return float(np.sqrt((dif**2).sum(-1)).max())

    def __repr__(self):
        if self.is_box:
            return f"Piece(box {self.lo.tolist()}..{self.hi.tolist()})"
        return f"Piece({self.verts.tolist()})"


def _check_convex(verts, tol=1e-12):
    n = len(verts)
    scale = max(1.0, float(np.abs(verts).max())) ** 2
    for i in range(n):
        a = verts[i]
        b = verts[(i + 1) % n]
        c = verts[(i + 2) % n]
        cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0])
        if cross < -tol * scale:
            raise FormatError("piece polygon is not convex")


def pieces_volume(pieces):
    return sum(p.volume for p in pieces)


def support_bbox(pieces):
    lo = np.min([p.lo for p in pieces], axis=0)
    hi = np.max([p.hi for p in pieces], axis=0)
    return lo, hi


def support_diameter(pieces):
    lo, hi = support_bbox(pieces)
    if len(pieces) == 1:
        return pieces[0].diameter
    # bbox
    return float(np.linalg.norm(hi - lo))


# ---------------------------------------------------------------------------
# convex primitives


def clip_convex(subject, clip):
    """Sutherland-Hodgman: clip polygon `subject` by convex CCW polygon
    `clip`. Both are (n, 2) arrays; returns a list of points (possibly [])."""
    out = [tuple(p) for p in np.asarray(subject, dtype=float)]
    cverts = np.asarray(clip, dtype=float)
    n = len(cverts)
    for i in range(n):
        if not out:
            return []
        cp1 = cverts[i]
        cp2 = cverts[(i + 1) % n]
        ex, ey = cp2[0] - cp1[0], cp2[1] - cp1[1]

        def side(p):
            return ex * (p[1] - cp1[1]) - ey * (p[0] - cp1[0])

        cur = out
        out = []
        s = cur[-1]
        s_side = side(s)
        for e in cur:
            e_side = side(e)
            if e_side >= 0.0:
                if s_side < 0.0:
                    out.append(_line_isect(s, e, s_side, e_side))
                out.append(e)
            elif s_side >= 0.0:
                out.append(_line_isect(s, e, s_side, e_side))
            s, s_side = e, e_side
    return out


def _line_isect(s, e, s_side, e_side):
    t = s_side / (s_side - e_side)
    return (s[0] + t * (e[0] - s[0]), s[1] + t * (e[1] - s[1]))


def poly_points_area(points):
    if len(points) < 3:
        return 0.0
    return abs(_shoelace(np.asarray(points, dtype=float)))


def clip_area(subject, clip):
    return poly_points_area(clip_convex(subject, clip))


def box_overlap_volume(alo, ahi, blo, bhi):
    v = 1.0
    for i in range(len(alo)):
        w = min(ahi[i], bhi[i]) - max(alo[i], blo[i])
        if w <= 0.0:
            return 0.0
        v *= w
    return v


def disk_poly_area(verts, center, radius):
    """Exact area of (convex or simple) polygon ∩ closed disk."""
    pts = np.asarray(verts, dtype=float) - np.asarray(center, dtype=float)
    r2 = radius * radius
    total = 0.0
    n = len(pts)
    for i in range(n):
        p = pts[i]
        q = pts[(i + 1) % n]
        total += _disk_edge_term(p, q, radius, r2)
    return abs(total)


def _disk_edge_term(p, q, radius, r2):
    dx, dy = q[0] - p[0], q[1] - p[1]
    a = dx * dx + dy * dy
    if a == 0.0:
        return 0.0
    # |p + t d|^2 = r^2
    b = p[0] * dx + p[1] * dy
    c = p[0] * p[0] + p[1] * p[1] - r2
    cuts = [0.0]
    disc = b * b - a * c
    if disc > 0.0:
        sq = math.sqrt(disc)
        for t in ((-b - sq) / a, (-b + sq) / a):
            if 0.0 < t < 1.0:
                cuts.append(t)
    cuts.append(1.0)
    cuts.sort()
    acc = 0.0
    for t0, t1 in zip(cuts[:-1], cuts[1:]):
        if t1 <= t0:
            continue
        tm = 0.5 * (t0 + t1)
        mx, my = p[0] + tm * dx, p[1] + tm * dy
        x0, y0 = p[0] + t0 * dx, p[1] + t0 * dy
        x1, y1 = p[0] + t1 * dx, p[1] + t1 * dy
        if mx * mx + my * my <= r2:
            acc += 0.5 * (x0 * y1 - y0 * x1)
        else:
            ang = math.atan2(y1, x1) - math.atan2(y0, x0)
            if ang > math.pi:
                ang -= 2.0 * math.pi
            elif ang < -math.pi:
                ang += 2.0 * math.pi
            acc += 0.5 * r2 * ang
    return acc


def point_in_convex(verts, pt, tol=0.0):
    """pt inside (or within tol of) the closed convex CCW polygon."""
    n = len(verts)
    for i in range(n):
        a = verts[i]
        b = verts[(i + 1) % n]
        ex, ey = b[0] - a[0], b[1] - a[1]
        norm = math.hypot(ex, ey)
        if norm == 0.0:
            continue
        if (ex * (pt[1] - a[1]) - ey * (pt[0] - a[0])) / norm < -tol:
            return False
    return True


def _point_seg_dist(pt, a, b):
    dx, dy = b[0] - a[0], b[1] - a[1]
    L2 = dx * dx + dy * dy
    if L2 == 0.0:
        return math.hypot(pt[0] - a[0], pt[1] - a[1])
    t = ((pt[0] - a[0]) * dx + (pt[1] - a[1]) * dy) / L2
    t = min(1.0, max(0.0, t))
    return math.hypot(pt[0] - a[0] - t * dx, pt[1] - a[1] - t * dy)


def point_poly_dist(verts, pt):
    """Distance from pt to the closed convex polygon (0 when inside)."""
    if point_in_convex(verts, pt):
        return 0.0
    n = len(verts)
    return min(_point_seg_dist(pt, verts[i], verts[(i + 1) % n]) for i in range(n))


def point_poly_boundary_dist(verts, pt):
    n = len(verts)
    return min(_point_seg_dist(pt, verts[i], verts[(i + 1) % n]) for i in range(n))


def convex_separated(averts, bverts, margin=0.0):
    """SAT over the edge normals of both convex polygons: True when the two
    are disjoint up to a penetration of at most `margin`."""
    for poly, other in ((averts, bverts), (bverts, averts)):
        n = len(poly)
        for i in range(n):
            a = poly[i]
            b = poly[(i + 1) % n]
            ex, ey = b[0] - a[0], b[1] - a[1]
            norm = math.hypot(ex, ey)
            if norm == 0.0:
                continue
            # outward normal of a CCW polygon; interior side is <= 0
            nx, ny = ey / norm, -ex / norm
            gap = min((nx * (w[0] - a[0]) + ny * (w[1] - a[1])) for w in other)
            if gap >= -margin:
                return True
    return False


# ---------------------------------------------------------------------------
# domains


def _domain_frame(d, center):
    """Dimension and center for a cube or ball, inferring one from the
    other (default: two-dimensional, centered at the origin)."""
    if center is not None:
        center = tuple(float(v) for v in np.atleast_1d(center))
        if d is None:
            d = len(center)
        elif int(d) != len(center):
            raise FormatError(
                f"center has {len(center)} coordinates but d={d} was requested"
            )
    else:
        d = 2 if d is None else int(d)
        center = tuple(0.0 for _ in range(d))
    return int(d), center


@dataclass(frozen=True)
class Domain:
    """A query region: `cube` (side `size`), `ball` (radius `size`), convex
    `polytope`, or `region` (union of interior-disjoint convex pieces)."""

    kind: str
    d: int
    size: float
    center: tuple
    verts: tuple = None
    pieces: tuple = None

    @classmethod
    def cube(cls, side, d=None, center=None):
        if side <= 0:
            raise FormatError("cube side must be positive")
        d, center = _domain_frame(d, center)
        return cls("cube", d, float(side), center)

    @classmethod
    def ball(cls, radius, d=None, center=None):
        if radius <= 0:
            raise FormatError("ball radius must be positive")
        d, center = _domain_frame(d, center)
        return cls("ball", d, float(radius), center)

    @classmethod
    def polytope(cls, verts, center=None):
        verts = np.asarray(verts, dtype=float)
        if verts.ndim != 2 or verts.shape[1] != 2:
            raise FormatError("polytope domains are two-dimensional vertex lists")
        if _shoelace(verts) < 0:
            verts = verts[::-1].copy()
        _check_convex(verts)
        center = (0.0, 0.0) if center is None else tuple(map(float, center))
        return cls("polytope", 2, 0.0, center, verts=tuple(map(tuple, verts)))

    @classmethod
    def region(cls, pieces):
        pieces = tuple(pieces)
        if not pieces:
            raise FormatError("region domain needs at least one piece")
        d = pieces[0].d
        return cls("region", d, 0.0, tuple(0.0 for _ in range(d)), pieces=pieces)

    @classmethod
    def from_tile(cls, system, tile):
        return cls.region(tile.support(system))

    # -- basic descriptors

    @property
    def volume(self):
        if self.kind == "cube":
            return self.size**self.d
        if self.kind == "ball":
            return 2.0 * self.size if self.d == 1 else math.pi * self.size**2
        if self.kind == "polytope":
            return abs(_shoelace(np.asarray(self.verts)))
        return pieces_volume(self.pieces)

    def bbox(self):
        if self.kind == "cube":
            c = np.asarray(self.center)
            h = 0.5 * self.size
            return c - h, c + h
        if self.kind == "ball":
            c = np.asarray(self.center)
            return c - self.size, c + self.size
        if self.kind == "polytope":
            v = np.asarray(self.verts) + np.asarray(self.center)
            return v.min(axis=0), v.max(axis=0)
        return support_bbox(self.pieces)

    def dilate(self, factor):
        """The domain scaled by `factor` about the origin (center included)."""
        if factor <= 0:
            raise FormatError("dilation factor must be positive")
        c = tuple(factor * x for x in self.center)
        if self.kind in ("cube", "ball"):
            return Domain(self.kind, self.d, self.size * factor, c)
        if self.kind == "polytope":
            return Domain("polytope", 2, 0.0, c, verts=tuple((factor * x, factor * y) for x, y in self.verts))
        return Domain.region(tuple(p.placed(factor) for p in self.pieces))

    def translate(self, y):
        y = tuple(map(float, np.atleast_1d(y)))
        c = tuple(a + b for a, b in zip(self.center, y))
        if self.kind == "region":
            return Domain.region(tuple(p.placed(1.0, y) for p in self.pieces))
        return Domain(self.kind, self.d, self.size, c, verts=self.verts, pieces=self.pieces)

    def placed_verts(self):
        return np.asarray(self.verts) + np.asarray(self.center)

    def contains_point(self, pt):
        pt = np.atleast_1d(np.asarray(pt, dtype=float))
        if self.kind == "cube":
            lo, hi = self.bbox()
            return bool(np.all(pt >= lo) and np.all(pt <= hi))
        if self.kind == "ball":
            return float(np.linalg.norm(pt - np.asarray(self.center))) <= self.size
        if self.kind == "polytope":
            return point_in_convex(self.placed_verts(), pt)
        for p in self.pieces:
            if p.d == 1:
                if p.lo[0] <= pt[0] <= p.hi[0]:
                    return True
            elif p.is_box:
                if p.lo[0] <= pt[0] <= p.hi[0] and p.lo[1] <= pt[1] <= p.hi[1]:
                    return True
            elif point_in_convex(p.verts, pt):
                return True
        return False


def dilate(dom, factor):
    return dom.dilate(factor)


# ---------------------------------------------------------------------------
# classification


def _piece_vs_cube(piece, lo, hi, geps):
    contained = bool(np.all(piece.lo >= lo - geps) and np.all(piece.hi <= hi + geps))
    if piece.is_box or piece.d == 1:
        separated = bool(np.any(piece.hi <= lo + geps) or np.any(piece.lo >= hi - geps))
    else:
        if np.any(piece.hi <= lo + geps) or np.any(piece.lo >= hi - geps):
            separated = True
        else:
            box = np.array([[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]])
            separated = convex_separated(piece.verts, box, margin=geps)
    return contained, separated


def _piece_vs_ball(piece, center, radius, geps):
    c = np.asarray(center)
    v = piece.verts if not (piece.is_box and piece.d == 2) else _box_corners(piece)
    if piece.d == 1:
        a, b = piece.lo[0], piece.hi[0]
        contained = (a >= c[0] - radius - geps) and (b <= c[0] + radius + geps)
        separated = (b <= c[0] - radius + geps) or (a >= c[0] + radius - geps)
        return contained, separated
    dist2 = ((v - c) ** 2).sum(axis=1)
    contained = bool(np.all(dist2 <= (radius + geps) ** 2))
    separated = point_poly_dist(v, c) >= radius - geps
    return contained, separated


def _box_corners(piece):
    lo, hi = piece.lo, piece.hi
    return np.array([[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]])


def _piece_poly_verts(piece):
    return _box_corners(piece) if (piece.is_box and piece.d == 2) else piece.verts


def _piece_vs_polytope(piece, dverts, geps):
    pv = _piece_poly_verts(piece)
    contained = all(point_in_convex(dverts, p, tol=geps) for p in pv)
    separated = convex_separated(pv, dverts, margin=geps)
    return contained, separated


def _piece_vs_region(piece, dom, geps):
    cv = _clip_piece(dom, piece)
    if piece.d == 1:
        tol = 2.0 * geps
    else:
        n = len(piece.verts)
        perim = sum(
            math.hypot(*(piece.verts[(i + 1) % n] - piece.verts[i])) for i in range(n)
        )
        tol = geps * max(perim, 1.0)
    contained = cv >= piece.volume - tol
    separated = cv <= tol
    return contained, separated


def classify(pieces, dom, geps):
    """Trichotomy of a tile support (union of convex pieces) against a domain."""
    all_in = True
    all_out = True
    if dom.kind == "cube":
        lo, hi = dom.bbox()
        for p in pieces:
            ci, co = _piece_vs_cube(p, lo, hi, geps)
            all_in &= ci
            all_out &= co
            if not (all_in or all_out):
                return TileClass.CROSSING
    elif dom.kind == "ball":
        for p in pieces:
            ci, co = _piece_vs_ball(p, dom.center, dom.size, geps)
            all_in &= ci
            all_out &= co
            if not (all_in or all_out):
                return TileClass.CROSSING
    elif dom.kind == "polytope":
        dv = dom.placed_verts()
        for p in pieces:
            ci, co = _piece_vs_polytope(p, dv, geps)
            all_in &= ci
            all_out &= co
            if not (all_in or all_out):
                return TileClass.CROSSING
    else:
        for p in pieces:
            ci, co = _piece_vs_region(p, dom, geps)
            all_in &= ci
            all_out &= co
            if not (all_in or all_out):
                return TileClass.CROSSING
    if all_in:
        return TileClass.INSIDE
    if all_out:
        return TileClass.OUTSIDE
    return TileClass.CROSSING


# ---------------------------------------------------------------------------
# clip volumes


def _clip_piece(dom, piece):
    if dom.kind == "cube":
        lo, hi = dom.bbox()
        if piece.is_box:
            return box_overlap_volume(piece.lo, piece.hi, lo, hi)
        box = np.array([[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]])
        return clip_area(piece.verts, box)
    if dom.kind == "ball":
        if piece.d == 1:
            return box_overlap_volume(
                piece.lo, piece.hi, [dom.center[0] - dom.size], [dom.center[0] + dom.size]
            )
        return disk_poly_area(_piece_poly_verts(piece), dom.center, dom.size)
    if dom.kind == "polytope":
        return clip_area(_piece_poly_verts(piece), dom.placed_verts())
    # region: pieces are interior-disjoint, so contributions add
    total = 0.0
    for dp in dom.pieces:
        if piece.d == 1 or (piece.is_box and dp.is_box):
            total += box_overlap_volume(piece.lo, piece.hi, dp.lo, dp.hi)
        else:
            total += clip_area(_piece_poly_verts(piece), _piece_poly_verts(dp))
    return total


def clip_volume(dom, pieces):
    """Exact volume of (tile support) ∩ domain."""
    if isinstance(pieces, Piece):
        pieces = (pieces,)
    return sum(_clip_piece(dom, p) for p in pieces)


# ---------------------------------------------------------------------------
# boundary tubes


def tube_volume(dom, t, samples=200_000, seed=0):
    """Volume of the closed t-neighborhood of the domain boundary.

    Cubes and balls get the exact Minkowski formulas; convex polytopes fall
    back to Monte-Carlo (see `tube_volume_mc` for the error estimate).
    """
    if t <= 0:
        return 0.0
    if dom.kind == "cube":
        r = dom.size
        if dom.d == 1:
            return (r + 2.0 * t) - max(r - 2.0 * t, 0.0)
        return (r * r + 4.0 * r * t + math.pi * t * t) - max(r - 2.0 * t, 0.0) ** 2
    if dom.kind == "ball":
        R = dom.size
        if dom.d == 1:
            return (2.0 * R + 2.0 * t) - 2.0 * max(R - t, 0.0)
        return math.pi * ((R + t) ** 2 - max(R - t, 0.0) ** 2)
    if dom.kind == "polytope":
        return tube_volume_mc(dom, t, samples=samples, seed=seed)[0]
    raise FormatError("tube_volume supports cube, ball and polytope domains")


def tube_volume_mc(dom, t, samples=200_000, seed=0):
    """Monte-Carlo (estimate, standard error) of the boundary tube volume."""
    verts = dom.placed_verts()
    lo = verts.min(axis=0) - t
    hi = verts.max(axis=0) + t
    rng = np.random.Generator(np.random.Philox(key=[np.uint64(seed), np.uint64(0)]))
    pts = lo + rng.random((samples, 2)) * (hi - lo)
    hits = 0
    for p in pts:
        if point_poly_boundary_dist(verts, p) <= t:
            hits += 1
    box = float(np.prod(hi - lo))
    frac = hits / samples
    est = box * frac
    err = box * math.sqrt(max(frac * (1.0 - frac), 1e-12) / samples)
    return est, err
