import math

import numpy as np
import pytest

from subtiling.errors import FormatError
from subtiling.geometry import (
    Domain,
    Piece,
    TileClass,
    box_overlap_volume,
    classify,
    clip_area,
    clip_volume,
    disk_poly_area,
    tube_volume,
    tube_volume_mc,
)

from helpers import mc_clip_volume, mc_points_in_domain

GEPS = 1e-9


def test_piece_validation():
    with pytest.raises(FormatError):
        Piece.interval(2.0, 2.0)
    with pytest.raises(FormatError):
        Piece([[0, 0], [1, 0]])
    with pytest.raises(FormatError):
        Piece([[0, 0], [2, 0], [1, 1], [2, 2], [0, 2]])  # reflex at (1,1)
    sq = Piece.box((0, 0), (2, 3))
    assert sq.is_box and sq.volume == 6.0
    tri = Piece([[0, 0], [0, 1], [1, 0]])  # clockwise input gets reversed
    assert tri.volume == pytest.approx(0.5)


def test_piece_placed_scales_volume():
    tri = Piece([[0, 0], [2, 0], [0, 2]])
    moved = tri.placed(3.0, (1.0, -1.0))
    assert moved.volume == pytest.approx(tri.volume * 9.0)
    assert moved.lo[0] == pytest.approx(1.0)
    assert moved.hi[1] == pytest.approx(5.0)


def test_domain_frame_inference():
    q = Domain.cube(2.0, center=(1.0,))
    assert q.d == 1 and q.volume == pytest.approx(2.0)
    b = Domain.ball(1.5, d=2)
    assert b.volume == pytest.approx(math.pi * 1.5**2)
    with pytest.raises(FormatError):
        Domain.cube(1.0, d=2, center=(0.0,))
    line = Domain.ball(0.5, d=1)
    assert line.volume == pytest.approx(1.0)


def test_domain_dilate_translate_bbox():
    q = Domain.cube(2.0, center=(1.0, 1.0))
    big = q.dilate(3.0)
    # dilation is about the origin, so the center moves too
    assert big.size == pytest.approx(6.0)
    assert tuple(big.center) == pytest.approx((3.0, 3.0))
    shifted = q.translate((-1.0, 0.5))
    lo, hi = shifted.bbox()
    assert tuple(lo) == pytest.approx((-1.0, 0.5))
    assert tuple(hi) == pytest.approx((1.0, 2.5))


def test_contains_point_matches_direct_masks():
    rng = np.random.default_rng(3)
    doms = [
        Domain.cube(2.0, center=(0.3, -0.2)),
        Domain.ball(1.1, center=(0.5, 0.5)),
        Domain.polytope([[0, 0], [2, 0], [1, 2]]),
    ]
    pts = rng.uniform(-2, 3, size=(500, 2))
    for dom in doms:
        mask = mc_points_in_domain(dom, pts)
        got = np.array([dom.contains_point(p) for p in pts])
        assert (mask == got).all()


def test_box_clip_exact():
    rng = np.random.default_rng(11)
    for _ in range(200):
        alo = rng.uniform(-2, 1, size=2)
        ahi = alo + rng.uniform(0.1, 2, size=2)
        side = float(rng.uniform(0.5, 3))
        c = rng.uniform(-1, 1, size=2)
        dom = Domain.cube(side, center=tuple(c))
        got = clip_volume(dom, Piece.box(alo, ahi))
        want = box_overlap_volume(alo, ahi, c - side / 2, c + side / 2)
        assert got == pytest.approx(want, abs=1e-14)


def test_polygon_clip_against_monte_carlo():
    rng = np.random.default_rng(5)
    for _ in range(25):
        # random triangle vs random cube
        verts = rng.uniform(-1.5, 1.5, size=(3, 2))
        u, v = verts[1] - verts[0], verts[2] - verts[0]
        area2 = u[0] * v[1] - u[1] * v[0]
        if abs(area2) < 0.3:
            continue
        tri = Piece(verts if area2 > 0 else verts[::-1])
        dom = Domain.cube(float(rng.uniform(0.5, 2.5)), center=tuple(rng.uniform(-1, 1, 2)))
        est, sigma = mc_clip_volume(dom, (tri,), 200_000, rng)
        got = clip_volume(dom, tri)
        assert abs(got - est) < 4 * sigma + 1e-12


def test_disk_clip_against_monte_carlo():
    rng = np.random.default_rng(6)
    for _ in range(20):
        lo = rng.uniform(-1, 0.5, size=2)
        box = Piece.box(lo, lo + rng.uniform(0.3, 1.5, size=2))
        dom = Domain.ball(float(rng.uniform(0.4, 1.4)), center=tuple(rng.uniform(-0.5, 0.5, 2)))
        est, sigma = mc_clip_volume(dom, (box,), 200_000, rng)
        got = clip_volume(dom, box)
        assert abs(got - est) < 4 * sigma + 1e-12


def test_clip_region_domain_additive():
    # an L-shaped region: clip against it = sum of clips against its squares
    sq1 = Piece.box((0, 0), (1, 1))
    sq2 = Piece.box((1, 0), (2, 1))
    sq3 = Piece.box((0, 1), (1, 2))
    region = Domain.region((sq1, sq2, sq3))
    assert region.volume == pytest.approx(3.0)
    probe = Piece.box((0.5, 0.5), (1.5, 1.5))
    got = clip_volume(region, probe)
    want = sum(clip_volume(Domain.region((s,)), probe) for s in (sq1, sq2, sq3))
    assert got == pytest.approx(want)
    assert got == pytest.approx(0.75)


def test_classify_trichotomy_simple_cases():
    dom = Domain.cube(10.0, d=2)
    inside = (Piece.box((0, 0), (1, 1)),)
    outside = (Piece.box((8, 8), (9, 9)),)
    crossing = (Piece.box((4.5, 0), (5.5, 1)),)
    assert classify(inside, dom, GEPS) is TileClass.INSIDE
    assert classify(outside, dom, GEPS) is TileClass.OUTSIDE
    assert classify(crossing, dom, GEPS) is TileClass.CROSSING


def test_classify_boundary_contact_snaps():
    dom = Domain.cube(2.0, d=2)
    # flush against the boundary from either side: exact contact, no overlap
    assert classify((Piece.box((0, 0), (1, 1)),), dom, GEPS) is TileClass.INSIDE
    assert classify((Piece.box((1, 0), (2, 1)),), dom, GEPS) is TileClass.OUTSIDE
    # sub-geps protrusion still snaps
    assert (
        classify((Piece.box((0, 0), (1 + 1e-12, 1)),), dom, GEPS) is TileClass.INSIDE
    )


def test_classify_matches_clip_fractions():
    rng = np.random.default_rng(7)
    for _ in range(300):
        lo = rng.uniform(-3, 2, size=2)
        piece = Piece.box(lo, lo + rng.uniform(0.2, 1.5, size=2))
        if rng.random() < 0.5:
            dom = Domain.cube(float(rng.uniform(0.5, 4)), center=tuple(rng.uniform(-1, 1, 2)))
        else:
            dom = Domain.ball(float(rng.uniform(0.3, 2)), center=tuple(rng.uniform(-1, 1, 2)))
        cls = classify((piece,), dom, GEPS)
        frac = clip_volume(dom, piece) / piece.volume
        if cls is TileClass.INSIDE:
            assert frac > 1 - 1e-9
        elif cls is TileClass.OUTSIDE:
            assert frac < 1e-9
        else:
            assert 0.0 < frac < 1.0


def test_clip_area_convex_pair():
    # unit square against itself shifted by half: area 1/4
    sq = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
    assert clip_area(sq, sq + 0.5) == pytest.approx(0.25)


def test_disk_poly_area_full_containment():
    sq = np.array([[-2, -2], [2, -2], [2, 2], [-2, 2]], dtype=float)
    assert disk_poly_area(sq, (0.0, 0.0), 1.0) == pytest.approx(math.pi, rel=1e-12)
    tiny = np.array([[-0.1, -0.1], [0.1, -0.1], [0.1, 0.1], [-0.1, 0.1]])
    assert disk_poly_area(tiny, (0.0, 0.0), 5.0) == pytest.approx(0.04)


def test_tube_volume_exact_formulas():
    q = Domain.cube(4.0, d=2)
    s, t = 4.0, 0.25
    # Minkowski ball neighborhood: outer has rounded corners
    want = (s**2 + 4 * s * t + math.pi * t**2) - (s - 2 * t) ** 2
    assert tube_volume(q, t) == pytest.approx(want)
    b = Domain.ball(2.0, d=2)
    assert tube_volume(b, t) == pytest.approx(math.pi * ((2 + t) ** 2 - (2 - t) ** 2))
    line = Domain.cube(3.0, d=1)
    assert tube_volume(line, t) == pytest.approx(4 * t)


def test_tube_volume_polytope_mc_brackets_truth():
    tri = Domain.polytope([[0, 0], [4, 0], [0, 3]])
    t = 0.2
    est, err = tube_volume_mc(tri, t)
    # perimeter 12, exact tube area = 2*12*t + corner corrections O(t^2)
    assert abs(est - 2 * 12 * t) < max(5 * err, 0.5)
