import numpy as np
import pytest

from helpers import dense_matrix_power

from subtiling.ergodic import CylFunction, mean
from subtiling.errors import FormatError, NotInEppError
from subtiling.geometry import Domain, clip_volume
from subtiling.measures import (
    CylinderSet,
    decompose,
    m_phi_minus,
    phi_minus_cylinder,
    phi_plus_domain,
    phi_plus_tile,
    verify_cocycles,
)
from subtiling.spectral import spectral_data
from subtiling.systems import PlacedTile
from subtiling.view import TilingView


def _random_cubes(view, count, seed):
    system = view.system
    rng = np.random.default_rng(seed)
    d = system.d
    met = system.metrics()
    cov = view.covered_radius
    out = []
    for _ in range(count):
        side = float(rng.uniform(met.d_max, cov / (4.0 * np.sqrt(d))))
        center = tuple(float(c) for c in rng.uniform(-cov / 4, cov / 4, size=d))
        out.append(Domain.cube(side, center=center))
    return out


def test_tile_value_matches_dense_powers(any_system):
    spec = spectral_data(any_system)
    M = any_system.substitution_matrix().T
    rng = np.random.default_rng(3)
    v = spec.v(1) + (spec.v(2) if spec.ell >= 2 else 0.0)
    for k in (0, 1, 3, 5):
        Mk = np.array(dense_matrix_power(M, k), dtype=float)
        want = Mk @ v
        for j in range(any_system.m):
            tile = PlacedTile(j, k, (0.0,) * any_system.d)
            assert phi_plus_tile(spec, v, tile) == pytest.approx(
                want[j], rel=1e-10
            )


def test_tile_values_add_over_children(any_system):
    # the defining self-similarity: a supertile's value is the sum over
    # its children, exactly
    spec = spectral_data(any_system)
    v = spec.v(1) if spec.ell < 2 else spec.v(2)
    for j in range(any_system.m):
        parent = PlacedTile(j, 3, (0.0,) * any_system.d)
        kids = parent.children(any_system)
        total = sum(phi_plus_tile(spec, v, t) for t in kids)
        assert total == pytest.approx(phi_plus_tile(spec, v, parent), rel=1e-9)


def test_volume_weight_recovers_volume(any_system):
    met = any_system.metrics()
    view = TilingView.for_extent(any_system, 8.0 * met.d_max, slack=1.2)
    spec = spectral_data(any_system)
    v1 = spec.v(1)
    for dom in _random_cubes(view, 8, seed=11):
        res = phi_plus_domain(view, spec, v1, dom)
        assert res.value + res.frontier_volume == pytest.approx(
            dom.volume, rel=1e-9
        )
        assert res.frontier_bound >= 0.0
        assert res.captured_tiles >= 0 and res.frontier_tiles > 0


def test_supertile_domain_is_exact(bicolor):
    # a cube matching a whole supertile has an empty frontier and the
    # measure value of that single tile
    view = TilingView.create(bicolor, 4)
    spec = spectral_data(bicolor)
    v2 = spec.v(2)
    tile = view.tiles_intersecting(Domain.cube(0.5, d=2, center=(0.25, 0.25)), order=2)[0]
    side = bicolor.lam**tile.order
    lo = np.asarray(tile.offset, dtype=float)
    dom = Domain.cube(side, center=tuple(lo + side / 2))
    res = phi_plus_domain(view, spec, v2, dom)
    assert res.frontier_tiles == 0
    assert res.frontier_volume == 0.0
    assert res.value == pytest.approx(phi_plus_tile(spec, v2, tile), rel=1e-12)


def test_engine_and_generic_paths_agree(table2d):
    view = TilingView.for_extent(table2d, 12.0, slack=1.2)
    spec = spectral_data(table2d)
    v1 = spec.v(1)
    for dom in _random_cubes(view, 6, seed=23):
        fast = phi_plus_domain(view, spec, v1, dom)
        deco = decompose(view, dom)
        value = sum(phi_plus_tile(spec, v1, t) for t in deco.captured)
        fvol = sum(clip_volume(dom, t.support(table2d)) for t in deco.frontier)
        assert fast.value == pytest.approx(value, rel=1e-9, abs=1e-12)
        assert fast.frontier_volume == pytest.approx(fvol, rel=1e-9, abs=1e-12)
        assert fast.captured_tiles == len(deco.captured)
        assert fast.frontier_tiles == len(deco.frontier)


def test_decompose_partitions_the_domain(bicolor):
    view = TilingView.create(bicolor, 4)
    dom = Domain.ball(6.5, d=2, center=(0.3, -0.7))
    deco = decompose(view, dom)
    captured_vol = sum(t.volume(bicolor) for t in deco.captured)
    frontier_vol = sum(clip_volume(dom, t.support(bicolor)) for t in deco.frontier)
    assert captured_vol + frontier_vol == pytest.approx(dom.volume, rel=1e-9)
    orders = {t.order for t in deco.captured}
    assert max(orders) >= 1  # maximal supertiles, not an order-0 sweep
    with pytest.raises(FormatError):
        decompose(view, dom, min_order=-1)


def test_weight_outside_fast_space_rejected(fibonacci):
    view = TilingView.for_extent(fibonacci, 20.0)
    spec = spectral_data(fibonacci)
    dom = Domain.cube(5.0, d=1, center=(0.4,))
    with pytest.raises(NotInEppError):
        phi_plus_domain(view, spec, spec.v(2), dom)
    # the volume direction alone is fine
    res = phi_plus_domain(view, spec, spec.v(1), dom)
    assert res.value + res.frontier_volume == pytest.approx(dom.volume, rel=1e-9)


def test_cylinder_roundtrip():
    tile = PlacedTile(1, 3, (2.0, -1.0))
    cyl = CylinderSet.from_tile(tile)
    assert cyl.tile() == tile


def test_pullback_on_dual_eigenvector(bicolor):
    spec = spectral_data(bicolor)
    u2 = spec.u(2)
    theta2 = 5.0
    for k in (0, 1, 4):
        for j in range(2):
            got = phi_minus_cylinder(spec, u2, CylinderSet(k, j, (0.0, 0.0)))
            assert got == pytest.approx(theta2**-k * u2[j], rel=1e-12)
    with pytest.raises(FormatError):
        phi_minus_cylinder(spec, u2, CylinderSet(-1, 0, (0.0, 0.0)))


def test_pullback_scaling_chain(bicolor):
    spec = spectral_data(bicolor)
    u2 = spec.u(2)
    a = phi_minus_cylinder(spec, u2, CylinderSet(2, 1, (0.0, 0.0)))
    b = phi_minus_cylinder(spec, u2, CylinderSet(3, 1, (0.0, 0.0)))
    assert b == pytest.approx(a / 5.0, rel=1e-12)


def test_pairing_with_leading_dual_is_the_mean(any_system):
    spec = spectral_data(any_system)
    rng = np.random.default_rng(31)
    f = CylFunction(tuple(rng.normal(size=any_system.m)))
    u1 = spec.u(1)
    vals = [m_phi_minus(spec, u1, f, order=k) for k in range(4)]
    assert all(v == pytest.approx(vals[0], rel=1e-9) for v in vals)
    assert vals[0] == pytest.approx(mean(spec, f), rel=1e-12)


def test_pairing_scales_along_second_direction(bicolor):
    spec = spectral_data(bicolor)
    f = CylFunction((1.0, -1.0))
    u2 = spec.u(2)
    base = m_phi_minus(spec, u2, f, order=0)
    ratio = bicolor.lam**bicolor.d / 5.0
    for k in (1, 2, 3):
        got = m_phi_minus(spec, u2, f, order=k)
        assert got == pytest.approx(base * ratio**k, rel=1e-10)


def test_cocycles_hold_within_budget(bicolor):
    view = TilingView.create(bicolor, 5)
    spec = spectral_data(bicolor)
    report = verify_cocycles(view, spec, trials=40, rng_seed=5)
    assert report.direction == 2
    assert report.coc1_within_budget
    assert report.coc3_within_budget
    assert report.trials == 40
    d = report.as_dict()
    assert set(d) == {
        "trials",
        "direction",
        "coc1_max_rel",
        "coc1_max_abs",
        "coc1_within_budget",
        "coc3_max_rel",
        "coc3_max_abs",
        "coc3_within_budget",
    }


def test_cocycles_volume_direction(fibonacci):
    view = TilingView.for_extent(fibonacci, 60.0)
    spec = spectral_data(fibonacci)
    report = verify_cocycles(view, spec, trials=30, rng_seed=9)
    assert report.direction == 1
    assert report.coc1_within_budget
    assert report.coc3_within_budget
