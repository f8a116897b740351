import numpy as np
import pytest

from subtiling.errors import BudgetError, FormatError, RegionError
from subtiling.geometry import Domain, TileClass, clip_volume
from subtiling.systems import find_seed
from subtiling.view import TilingView, tiling_view

from helpers import brute_tiles_in


def test_create_and_covered_radius(any_system):
    view = TilingView.create(any_system, 2)
    seed = find_seed(any_system)
    assert view.root.order == seed.power * 2
    assert view.covered_radius > 0
    with pytest.raises(FormatError):
        TilingView.create(any_system, 0)


def test_for_extent_covers(any_system):
    view = TilingView.for_extent(any_system, 100.0)
    assert view.covered_radius >= 100.0
    view.ensure_contains(Domain.cube(50.0, d=any_system.d))


def test_ensure_contains_raises_outside(any_system):
    view = TilingView.create(any_system, 1)
    big = view.covered_radius * 10.0
    with pytest.raises(RegionError):
        view.ensure_contains(Domain.cube(big, d=any_system.d))


def test_deepened_extends_root(any_system):
    view = TilingView.create(any_system, 2)
    deeper = view.deepened()
    assert deeper.depth == view.depth + 1
    assert deeper.covered_radius > view.covered_radius


def test_root_volume_tiles_the_coverage(any_system):
    view = TilingView.create(any_system, 2)
    root = view.root
    # the root support must contain the ball of the covered radius
    r = view.covered_radius
    corners = np.array(
        [[r, r], [r, -r], [-r, r], [-r, -r]] if any_system.d == 2 else [[r], [-r]]
    )
    dom = Domain.cube(2 * r, d=any_system.d)
    assert clip_volume(dom, root.support(any_system)) > 0


def test_tiles_intersecting_matches_brute(any_system):
    view = TilingView.for_extent(any_system, 40.0)
    rng = np.random.default_rng(17)
    for _ in range(5):
        side = float(rng.uniform(3.0, 12.0))
        c = tuple(rng.uniform(-10, 10, size=any_system.d))
        dom = Domain.cube(side, center=c)
        got = view.tiles_intersecting(dom)
        want = [t for t, _ in brute_tiles_in(any_system, view, dom)]
        assert [(t.type, t.offset) for t in got] == [(t.type, t.offset) for t in want]


def test_tiles_with_classes_consistent(bicolor):
    view = TilingView.for_extent(bicolor, 30.0)
    dom = Domain.cube(7.3, center=(0.4, -1.2))
    pairs = view.tiles_with_classes(dom)
    assert pairs
    vol = 0.0
    for t, cls in pairs:
        assert cls in (TileClass.INSIDE, TileClass.CROSSING)
        if cls is TileClass.INSIDE:
            vol += t.volume(bicolor)
        else:
            vol += clip_volume(dom, t.support(bicolor))
    assert vol == pytest.approx(dom.volume, rel=1e-9)


def test_tiles_intersecting_budget(bicolor):
    view = TilingView.for_extent(bicolor, 200.0)
    with pytest.raises(BudgetError):
        view.tiles_intersecting(Domain.cube(300.0, d=2), max_tiles=100)


def test_supertile_order_query(table2d):
    view = TilingView.for_extent(table2d, 30.0)
    dom = Domain.cube(9.0, d=2)
    level1 = view.tiles_intersecting(dom, order=1)
    level0 = view.tiles_intersecting(dom, order=0)
    assert level1
    assert len(level0) > len(level1)
    # every order-0 tile lies inside some returned order-1 supertile
    kids = {(k.type, k.offset) for t in level1 for k in t.children(table2d)}
    covered = sum(1 for t in level0 if (t.type, t.offset) in kids)
    assert covered == len(level0)


def test_tiling_view_helper(fibonacci):
    seed = find_seed(fibonacci)
    view = tiling_view(fibonacci, seed, 3)
    assert view.depth == 3
    assert view.seed == seed


def test_view_is_stateless_value(any_system):
    a = TilingView.create(any_system, 2)
    b = TilingView.create(any_system, 2)
    assert a.root == b.root
    assert a.covered_radius == b.covered_radius
