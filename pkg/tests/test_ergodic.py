import numpy as np
import pytest

from helpers import dense_matrix_power

from subtiling.ergodic import (
    CylFunction,
    deviation,
    ergodic_integral,
    expansion_terms,
    mean,
    profile_direction_value,
    pullback_integral,
    residual,
    tile_count,
)
from subtiling.descent import engine_for
from subtiling.errors import FormatError
from subtiling.geometry import Domain, TileClass, clip_volume
from subtiling.measures import decompose
from subtiling.spectral import spectral_data
from subtiling.systems import matrix_power_exact
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


def _origin_supertile(view, order):
    system = view.system
    probe = Domain.cube(0.25, d=system.d, center=(0.1,) * system.d)
    return view.tiles_intersecting(probe, order=order)[0]


def test_cyl_function_basics():
    f = CylFunction.indicator(3, 1)
    assert f.c == (0.0, 1.0, 0.0)
    assert f.m == 3
    assert f.sup_norm == 1.0
    g = CylFunction.constant(2, 2.5)
    assert g.c == (2.5, 2.5)
    assert np.allclose(g.weights((1.0, 3.0)), [2.5, 7.5])


def test_density_length_checked(bicolor):
    view = TilingView.create(bicolor, 2)
    with pytest.raises(FormatError):
        ergodic_integral(view, CylFunction((1.0, 2.0, 3.0)), Domain.cube(1.0, d=2))


def test_mean_of_constant_is_the_constant(any_system):
    spec = spectral_data(any_system)
    f = CylFunction.constant(any_system.m, 3.25)
    assert mean(spec, f) == pytest.approx(3.25, rel=1e-12)
    assert f.l1_norm(spec) == pytest.approx(3.25, rel=1e-12)
    g = CylFunction(tuple(np.linspace(-1, 1, any_system.m)))
    assert abs(mean(spec, g)) <= g.l1_norm(spec) + 1e-12


def test_integral_over_whole_supertile_is_matrix_mass(bicolor):
    view = TilingView.create(bicolor, 4)
    spec = spectral_data(bicolor)
    f = CylFunction((0.7, -0.2))
    w = f.weights(spec.volumes)
    tile = _origin_supertile(view, order=2)
    side = bicolor.lam**tile.order
    lo = np.asarray(tile.offset, dtype=float)
    dom = Domain.cube(side, center=tuple(lo + side / 2))
    Mk = np.array(dense_matrix_power(spec.M, tile.order), dtype=float)
    want = float((Mk @ w)[tile.type])
    assert ergodic_integral(view, f, dom) == pytest.approx(want, rel=1e-12)


def test_integral_of_constant_is_volume(any_system):
    met = any_system.metrics()
    view = TilingView.for_extent(any_system, 8.0 * met.d_max, slack=1.2)
    f = CylFunction.constant(any_system.m, 1.0)
    for dom in _random_cubes(view, 6, seed=41):
        got = ergodic_integral(view, f, dom)
        assert got == pytest.approx(dom.volume, rel=1e-12)


def test_integral_splits_across_a_plane(table2d):
    view = TilingView.for_extent(table2d, 14.0, slack=1.2)
    f = CylFunction((1.0, -2.0))
    rng = np.random.default_rng(47)

    def rect(x0, y0, x1, y1):
        return Domain.polytope([(x0, y0), (x1, y0), (x1, y1), (x0, y1)])

    for _ in range(5):
        side = float(rng.uniform(2.0, 6.0))
        cx, cy = rng.uniform(-2.0, 2.0, size=2)
        x0, y0 = cx - side / 2, cy - side / 2
        x1, y1 = cx + side / 2, cy + side / 2
        cut = float(rng.uniform(cx - side / 4, cx + side / 4))
        a = ergodic_integral(view, f, rect(x0, y0, cut, y1)) + ergodic_integral(
            view, f, rect(cut, y0, x1, y1)
        )
        b = ergodic_integral(view, f, rect(x0, y0, x1, y1))
        assert a == pytest.approx(b, rel=1e-9, abs=1e-9)


def test_tile_count_matches_brute_enumeration(any_system):
    met = any_system.metrics()
    view = TilingView.for_extent(any_system, 8.0 * met.d_max, slack=1.2)
    for dom in _random_cubes(view, 4, seed=53):
        by_type = [0] * any_system.m
        for tile, cls_ in view.tiles_with_classes(dom, order=0):
            if cls_ is TileClass.INSIDE:
                by_type[tile.type] += 1
        for i in range(any_system.m):
            assert tile_count(view, i, dom) == by_type[i]


def test_tile_count_type_range(bicolor):
    view = TilingView.create(bicolor, 3)
    with pytest.raises(FormatError):
        tile_count(view, 2, Domain.cube(1.0, d=2))


def test_deviation_of_constant_vanishes(any_system):
    met = any_system.metrics()
    view = TilingView.for_extent(any_system, 8.0 * met.d_max, slack=1.2)
    spec = spectral_data(any_system)
    f = CylFunction.constant(any_system.m, -1.5)
    for dom in _random_cubes(view, 4, seed=59):
        dev = deviation(view, spec, f, dom)
        assert abs(dev) < 1e-10 * dom.volume


def test_residual_equals_deviation_without_fast_directions(table2d):
    view = TilingView.for_extent(table2d, 14.0, slack=1.2)
    spec = spectral_data(table2d)
    assert spec.ell == 1
    f = CylFunction((1.0, -1.0))
    for dom in _random_cubes(view, 4, seed=61):
        dev = deviation(view, spec, f, dom)
        assert residual(view, spec, f, dom) == pytest.approx(abs(dev), rel=1e-12)


def test_residual_subtracts_second_direction(bicolor):
    view = TilingView.create(bicolor, 5)
    spec = spectral_data(bicolor)
    f = CylFunction((1.0, -1.0))
    engine = engine_for(bicolor)
    for dom in _random_cubes(view, 5, seed=67):
        prof = engine.cube_profile(view.root, dom)
        terms = expansion_terms(spec, f, prof)
        assert set(terms) == {2}
        assert abs(terms[2].imag) < 1e-10 * max(1.0, abs(terms[2].real))
        dev = deviation(view, spec, f, dom)
        want = abs(dev - terms[2].real)
        assert residual(view, spec, f, dom) == pytest.approx(want, abs=1e-10)
        # subtracting the dominant term helps on nontrivial windows
        assert want <= abs(dev) + 1e-12


def test_residual_needs_a_cube(bicolor):
    view = TilingView.create(bicolor, 3)
    spec = spectral_data(bicolor)
    with pytest.raises(FormatError):
        residual(view, spec, CylFunction((1.0, -1.0)), Domain.ball(2.0, d=2))


def test_direction_value_on_whole_supertile(bicolor):
    view = TilingView.create(bicolor, 4)
    spec = spectral_data(bicolor)
    engine = engine_for(bicolor)
    tile = _origin_supertile(view, order=2)
    side = bicolor.lam**tile.order
    lo = np.asarray(tile.offset, dtype=float)
    dom = Domain.cube(side, center=tuple(lo + side / 2))
    prof = engine.cube_profile(view.root, dom)
    got = profile_direction_value(spec, prof, 2)
    want = 5.0**tile.order * spec.v(2)[tile.type]
    assert got.real == pytest.approx(want, rel=1e-12)
    assert abs(got.imag) < 1e-14


def test_pullback_order_zero_is_plain_integral(bicolor):
    view = TilingView.create(bicolor, 4)
    spec = spectral_data(bicolor)
    f = CylFunction((0.4, 1.1))
    for dom in _random_cubes(view, 3, seed=71):
        assert pullback_integral(view, spec, f, 0, dom) == pytest.approx(
            ergodic_integral(view, f, dom), rel=1e-12
        )


def test_pullback_matches_decomposition_arithmetic(bicolor):
    view = TilingView.create(bicolor, 4)
    spec = spectral_data(bicolor)
    f = CylFunction((1.0, -1.0))
    w = f.weights(spec.volumes)
    k = 1
    scale = bicolor.lam ** (bicolor.d * k)
    for dom in _random_cubes(view, 3, seed=73):
        deco = decompose(view, dom, min_order=k)
        total = 0.0
        for t in deco.captured:
            Mk = matrix_power_exact(spec.M, t.order - k)
            total += scale * float(
                sum(Mk[t.type][j] * w[j] for j in range(bicolor.m))
            )
        for t in deco.frontier:
            total += f.c[t.type] * clip_volume(dom, t.support(bicolor))
        got = pullback_integral(view, spec, f, k, dom)
        assert got == pytest.approx(total, rel=1e-9, abs=1e-9)


def test_pullback_of_supertile_scales_weights(bicolor):
    view = TilingView.create(bicolor, 4)
    spec = spectral_data(bicolor)
    f = CylFunction((0.3, -0.9))
    w = f.weights(spec.volumes)
    k = 2
    tile = _origin_supertile(view, order=k)
    side = bicolor.lam**tile.order
    lo = np.asarray(tile.offset, dtype=float)
    dom = Domain.cube(side, center=tuple(lo + side / 2))
    want = bicolor.lam ** (bicolor.d * k) * float(w[tile.type])
    assert pullback_integral(view, spec, f, k, dom) == pytest.approx(
        want, rel=1e-12
    )
    with pytest.raises(FormatError):
        pullback_integral(view, spec, f, -1, dom)
