"""Substitution tiling systems with pure-dilation expansion.

A system is a list of prototiles (each a union of convex pieces) together
with digit sets: `digits[j]` lists the children of prototile `j` as pairs
`(i, x)` meaning a copy of prototile `i` translated by `x` sits inside the
blown-up tile `lam * A_j` (translations live in the inflated frame, which
keeps child placement free of repeated `1/lam` scalings). The induced count
matrix `S[i, j] = #{x : (i, x)}` drives everything combinatorial.

Placed tiles carry an order: `PlacedTile(t, k, y)` has support
`lam**k * A_t + y`, and its children are the order k-1 supertiles obtained
by applying the subdivision once.
"""

import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (
    BudgetError,
    CoverError,
    FormatError,
    OverlapError,
    PrimitivityError,
    SeedError,
)
from .geometry import (
    Domain,
    Piece,
    TileClass,
    box_overlap_volume,
    classify,
    clip_area,
    pieces_volume,
    point_in_convex,
    point_poly_boundary_dist,
    support_bbox,
    support_diameter,
    _piece_poly_verts,
)


@dataclass(frozen=True)
class Prototile:
    name: str
    pieces: tuple

    @property
    def volume(self):
        return pieces_volume(self.pieces)

    @property
    def d(self):
        return self.pieces[0].d


@dataclass(frozen=True)
class PlacedTile:
    """A supertile: type index, order k >= 0, translation of lam**k * A_type."""

    type: int
    order: int
    offset: tuple

    def support(self, system):
        scale = system.lam**self.order
        return tuple(p.placed(scale, self.offset) for p in system.prototiles[self.type].pieces)

    def volume(self, system):
        return system.prototiles[self.type].volume * system.lam ** (system.d * self.order)

    def children(self, system):
        if self.order < 1:
            raise FormatError("order-0 tiles have no children")
        step = system.lam ** (self.order - 1)
        out = []
        for i, x in system.digits[self.type]:
            out.append(
                PlacedTile(
                    i,
                    self.order - 1,
                    tuple(o + step * v for o, v in zip(self.offset, x)),
                )
            )
        return out


@dataclass(frozen=True)
class Patch:
    """A finite list of placed tiles of equal order."""

    tiles: tuple

    def __len__(self):
        return len(self.tiles)

    def counts(self, m):
        c = np.zeros(m, dtype=np.int64)
        for t in self.tiles:
            c[t.type] += 1
        return c

    def volume(self, system):
        return sum(t.volume(system) for t in self.tiles)

    def bbox(self, system):
        los, his = [], []
        for t in self.tiles:
            lo, hi = support_bbox(t.support(system))
            los.append(lo)
            his.append(hi)
        return np.min(los, axis=0), np.max(his, axis=0)


@dataclass(frozen=True)
class Seed:
    """Self-reproducing anchor: the tile `A_type + anchor` reappears inside
    its own `power`-fold inflation at the same spot, so blowing up about the
    anchor produces an increasing nest of supertiles."""

    type: int
    power: int
    anchor: tuple
    margin: float
    digit: tuple

    def root(self, system, depth):
        """Order `power*depth` supertile of the nest, translated so the
        anchor's fixed point sits at the origin."""
        k = self.power * depth
        scale = system.lam**k
        off = tuple(-scale * c for c in self.anchor)
        return PlacedTile(self.type, k, off)

    def covered_radius(self, system, depth):
        """The root's support contains this ball around the origin."""
        return system.lam ** (self.power * depth) * self.margin


@dataclass(frozen=True)
class SystemMetrics:
    """Geometric constants of the prototile set. `eta` is a lower bound on
    the largest radius such that every prototile contains a ball of that
    radius (per-piece inscribed balls only, seams not exploited)."""

    lam: float
    d: int
    m: int
    volumes: tuple
    d_min: float
    d_max: float
    a_min: float
    a_max: float
    eta: float
    geps: float


@dataclass(frozen=True)
class ValidationReport:
    volume_residuals: tuple
    max_overlap: float
    cover_exact: bool
    primitive: bool
    witness_power: int
    metrics: SystemMetrics

    def as_dict(self):
        return {
            "volume_residuals": list(self.volume_residuals),
            "max_overlap": self.max_overlap,
            "cover_exact": self.cover_exact,
            "primitive": self.primitive,
            "witness_power": self.witness_power,
        }


class SubstitutionSystem:
    """A named substitution system; geometry checks live in `validate_system`."""

    def __init__(self, name, lam, prototiles, digits):
        if not prototiles:
            raise FormatError("a system needs at least one prototile")
        if not lam > 1.0:
            raise FormatError(f"expansion factor must exceed 1, got {lam}")
        self.name = str(name)
        self.lam = float(lam)
        self.prototiles = tuple(prototiles)
        d = self.prototiles[0].d
        for pt in self.prototiles:
            if pt.d != d:
                raise FormatError("prototiles live in different dimensions")
            if not pt.pieces:
                raise FormatError(f"prototile {pt.name!r} has no pieces")
        self.d = d
        m = len(self.prototiles)
        if len(digits) != m:
            raise FormatError(f"expected digit sets for {m} prototiles, got {len(digits)}")
        norm = []
        for j, row_in in enumerate(digits):
            if not row_in:
                raise FormatError(f"digit set for prototile {j} is empty")
            row = []
            for entry in row_in:
                try:
                    i, x = entry
                    i = int(i)
                    x = tuple(float(v) for v in np.atleast_1d(x))
                except (TypeError, ValueError) as exc:
                    raise FormatError(
                        f"digit entry {entry!r} is not a (type, translate) pair"
                    ) from exc
                if not 0 <= i < m:
                    raise FormatError(f"digit set for prototile {j} names unknown type {i}")
                if len(x) != d:
                    raise FormatError(f"digit {x} has wrong dimension")
                row.append((i, x))
            norm.append(tuple(row))
        self.digits = tuple(norm)
        self._metrics = None
        self._spectral = None

    @property
    def m(self):
        return len(self.prototiles)

    def type_index(self, name):
        for i, pt in enumerate(self.prototiles):
            if pt.name == name:
                return i
        raise FormatError(f"unknown prototile name {name!r}")

    def substitution_matrix(self):
        """S[i, j] = number of type-i children in the image of prototile j."""
        m = self.m
        S = np.zeros((m, m), dtype=np.int64)
        for j, row in enumerate(self.digits):
            for i, _ in row:
                S[i, j] += 1
        return S

    def metrics(self):
        if self._metrics is None:
            diams = [support_diameter(pt.pieces) for pt in self.prototiles]
            vols = [pt.volume for pt in self.prototiles]
            d_min = min(diams)
            self._metrics = SystemMetrics(
                lam=self.lam,
                d=self.d,
                m=self.m,
                volumes=tuple(vols),
                d_min=d_min,
                d_max=max(diams),
                a_min=min(vols),
                a_max=max(vols),
                eta=min(_inradius_lower(pt.pieces) for pt in self.prototiles),
                geps=1e-9 * d_min,
            )
        return self._metrics

    # -- serialization

    def to_json(self):
        digits = {}
        for j, row in enumerate(self.digits):
            for i, x in row:
                digits.setdefault(f"{i + 1},{j + 1}", []).append(list(x))
        return json.dumps(
            {
                "name": self.name,
                "d": self.d,
                "lambda": self.lam,
                "prototiles": [
                    {"id": k + 1, "pieces": [p.verts.tolist() for p in pt.pieces]}
                    for k, pt in enumerate(self.prototiles)
                ],
                "digits": digits,
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text, name=None):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise FormatError(f"not valid JSON: {exc}") from exc
        for key in ("name", "lambda", "prototiles", "digits"):
            if key not in data:
                raise FormatError(f"missing required key {key!r}")
        if not isinstance(data["prototiles"], list) or not data["prototiles"]:
            raise FormatError("'prototiles' must be a nonempty list")
        ids = []
        prototiles = []
        for entry in data["prototiles"]:
            if "id" not in entry or "pieces" not in entry:
                raise FormatError("each prototile needs 'id' and 'pieces'")
            ids.append(entry["id"])
            prototiles.append(
                Prototile(str(entry["id"]), tuple(Piece(v) for v in entry["pieces"]))
            )
        if len(set(ids)) != len(ids):
            raise FormatError("prototile ids are not unique")
        index = {pid: k for k, pid in enumerate(ids)}
        m = len(ids)
        digits = [[] for _ in range(m)]
        if not isinstance(data["digits"], dict):
            raise FormatError("'digits' must be an object keyed by 'i,j'")
        for key, translates in data["digits"].items():
            try:
                si, sj = key.split(",")
                i = index[type(ids[0])(si) if not isinstance(ids[0], str) else si]
                j = index[type(ids[0])(sj) if not isinstance(ids[0], str) else sj]
            except (ValueError, KeyError) as exc:
                raise FormatError(f"bad digit-set key {key!r}") from exc
            if not isinstance(translates, list):
                raise FormatError(f"digit set {key!r} must be a list of translates")
            for x in translates:
                digits[j].append((i, x))
        return cls(name or data["name"], float(data["lambda"]), prototiles, digits)


def _inradius_lower(pieces):
    best = 0.0
    for p in pieces:
        if p.d == 1:
            r = 0.5 * float(p.hi[0] - p.lo[0])
        elif p.is_box:
            r = 0.5 * float((p.hi - p.lo).min())
        else:
            centroid = p.verts.mean(axis=0)
            r = point_poly_boundary_dist(p.verts, centroid)
        best = max(best, r)
    return best


# ---------------------------------------------------------------------------
# exact counting


def matrix_power_exact(S, k):
    """S**k over Python ints (no overflow at any depth)."""
    m = len(S)
    A = [[int(S[i][j]) for j in range(m)] for i in range(m)]
    R = [[1 if i == j else 0 for j in range(m)] for i in range(m)]
    for _ in range(int(k)):
        R = [
            [sum(R[i][t] * A[t][j] for t in range(m)) for j in range(m)]
            for i in range(m)
        ]
    return R


def supertile_type_counts(system, j, k):
    """Exact per-type counts of the order-0 tiles in an order-k supertile of
    type j: the j-th column of S**k, as Python ints."""
    Sk = matrix_power_exact(system.substitution_matrix(), k)
    return [Sk[i][j] for i in range(system.m)]


def generate_patch(system, j, n, max_tiles=1_000_000):
    """All order-0 tiles of the order-n supertile of type j at the origin."""
    if n < 0:
        raise FormatError("patch order must be nonnegative")
    total = sum(supertile_type_counts(system, j, n))
    if total > max_tiles:
        raise BudgetError(
            f"patch would contain {total} tiles, over the {max_tiles} budget",
            requested=total,
            budget=max_tiles,
        )
    root = PlacedTile(int(j), int(n), tuple(0.0 for _ in range(system.d)))
    out = []
    stack = [root]
    while stack:
        t = stack.pop()
        if t.order == 0:
            out.append(t)
        else:
            stack.extend(t.children(system))
    out.sort(key=lambda t: (t.offset, t.type))
    return Patch(tuple(out))


# ---------------------------------------------------------------------------
# validation


def _exact_volume(piece):
    """Piece volume as an exact Fraction (floats are dyadic rationals)."""
    if piece.d == 1:
        return Fraction(float(piece.hi[0])) - Fraction(float(piece.lo[0]))
    verts = [(Fraction(float(x)), Fraction(float(y))) for x, y in piece.verts]
    acc = Fraction(0)
    n = len(verts)
    for i in range(n):
        x0, y0 = verts[i]
        x1, y1 = verts[(i + 1) % n]
        acc += x0 * y1 - x1 * y0
    return acc / 2


def _pairwise_overlap(pa, pb):
    if np.any(pa.hi <= pb.lo) or np.any(pb.hi <= pa.lo):
        return 0.0
    if pa.is_box and pb.is_box:
        return box_overlap_volume(pa.lo, pa.hi, pb.lo, pb.hi)
    return clip_area(_piece_poly_verts(pa), _piece_poly_verts(pb))


def primitivity_witness(S, limit=None):
    """Smallest k <= limit (default 2*m**2) with S**k entrywise positive,
    or 0 when there is none."""
    m = S.shape[0]
    if limit is None:
        limit = 2 * m * m
    B = S > 0
    P = B.copy()
    for k in range(1, limit + 1):
        if P.all():
            return k
        P = (P @ B) > 0
    return 0


def validate_system(system, tol=1e-9):
    """Check the subdivision geometry and the combinatorics.

    Per prototile j: each child must sit inside `lam * A_j`, the children
    must be pairwise interior-disjoint, and their volumes must add up to
    `lam**d * vol(A_j)` (together these force an exact cover). The count
    matrix must be primitive. Raises on any defect; returns a report with
    the per-type volume residuals and the primitivity witness power.

    The volume identity is checked in exact rational arithmetic when the
    expansion is an integer, with relative tolerance `tol` otherwise.
    """
    met = system.metrics()
    lam, d = system.lam, system.d
    exact = lam == round(lam)

    residuals = []
    max_overlap = 0.0
    for j, row in enumerate(system.digits):
        parent = [p.placed(lam) for p in system.prototiles[j].pieces]
        dom = Domain.region(parent)
        placed = []
        for i, x in row:
            child = [p.placed(1.0, x) for p in system.prototiles[i].pieces]
            placed.append((i, x, child))
            if classify(child, dom, met.geps) is not TileClass.INSIDE:
                raise CoverError(
                    f"child ({system.prototiles[i].name}, {x}) of prototile "
                    f"{system.prototiles[j].name!r} leaks outside the inflated tile",
                    parent=j,
                    child=i,
                    offset=x,
                )
        if exact:
            want = Fraction(float(lam)) ** d * sum(
                _exact_volume(p) for p in system.prototiles[j].pieces
            )
            got = Fraction(0)
            for i, x, child in placed:
                got += sum(_exact_volume(p) for p in child)
            residual = float(got - want) / float(want)
            ok = got == want
        else:
            want = lam**d * system.prototiles[j].volume
            got = sum(system.prototiles[i].volume for i, _, _ in placed)
            residual = (got - want) / want
            ok = abs(residual) <= tol
        residuals.append(residual)
        if not ok:
            raise CoverError(
                f"children of prototile {system.prototiles[j].name!r} have total "
                f"volume {float(got)}, expected {float(want)}",
                parent=j,
                residual=residual,
            )
        vol_tol = tol * met.a_min
        for a in range(len(placed)):
            for b in range(a + 1, len(placed)):
                for pa in placed[a][2]:
                    for pb in placed[b][2]:
                        ov = _pairwise_overlap(pa, pb)
                        max_overlap = max(max_overlap, ov)
                        if ov > vol_tol:
                            raise OverlapError(
                                f"children {a} and {b} of prototile "
                                f"{system.prototiles[j].name!r} overlap with volume {ov}",
                                parent=j,
                                first=a,
                                second=b,
                                volume=ov,
                            )

    S = system.substitution_matrix()
    witness = primitivity_witness(S)
    if witness == 0:
        raise PrimitivityError(
            "substitution matrix is not primitive", matrix=S.tolist()
        )
    return ValidationReport(
        volume_residuals=tuple(residuals),
        max_overlap=max_overlap,
        cover_exact=exact,
        primitive=True,
        witness_power=witness,
        metrics=met,
    )


def is_primitive(S):
    return primitivity_witness(S) > 0


# ---------------------------------------------------------------------------
# seeds


def interior_margin(pieces, c):
    """Distance from c to the boundary of the piece containing it, maximized
    over pieces; -inf when c lies in none. A lower bound on the distance to
    the boundary of the union (points on interior seams report 0)."""
    c = np.atleast_1d(np.asarray(c, dtype=float))
    best = -math.inf
    for p in pieces:
        if p.d == 1:
            if p.lo[0] <= c[0] <= p.hi[0]:
                best = max(best, min(c[0] - p.lo[0], p.hi[0] - c[0]))
        elif p.is_box:
            if np.all(c >= p.lo) and np.all(c <= p.hi):
                best = max(best, float(np.minimum(c - p.lo, p.hi - c).min()))
        else:
            if point_in_convex(p.verts, c):
                best = max(best, point_poly_boundary_dist(p.verts, c))
    return best


def find_seed(system, max_power=6, min_margin=None):
    """Smallest power p <= max_power such that some prototile recurs at an
    interior position inside its own p-fold inflation; among those
    positions, the one with the largest interior margin (ties: smallest
    type, then digit). The recurring child at digit y has fixed point
    c = y / (lam**p - 1), and `A_type + c` reproduces itself."""
    lam = system.lam
    if min_margin is None:
        min_margin = system.metrics().geps
    for p in range(1, max_power + 1):
        candidates = []
        den = lam**p - 1.0
        for j in range(system.m):
            for t in generate_patch(system, j, p).tiles:
                if t.type != j:
                    continue
                c = tuple(float(v) / den for v in t.offset)
                margin = interior_margin(system.prototiles[j].pieces, c)
                if margin > min_margin:
                    candidates.append((margin, j, tuple(map(float, t.offset)), c))
        if candidates:
            # margins equal up to float dust count as ties, so the
            # lexicographic tie-break stays reproducible
            candidates.sort(key=lambda e: (-round(e[0], 9), e[1], e[2]))
            margin, j, y, c = candidates[0]
            return Seed(type=j, power=p, anchor=c, margin=float(margin), digit=y)
    raise SeedError(
        f"no interior self-reproducing point with power <= {max_power}",
        max_power=max_power,
    )
