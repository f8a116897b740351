"""Ergodic integrals of cylindrical functions over dilated domains.

A cylindrical function assigns the constant density c_i to every type-i
tile, so its integral over any region decomposes tile by tile and every
theorem-level quantity depends on the densities only through the per-type
masses w_i = c_i vol(A_i). Integrals over captured supertiles are exact
matrix-power sums, the frontier contributes exact clip volumes, and the
asymptotic expansion subtracts, per fast direction, the measure value
times the dual pairing of f.
"""

from dataclasses import dataclass

import numpy as np

from .descent import engine_for
from .errors import DefectiveError, FormatError
from .geometry import clip_volume
from .measures import decompose, m_phi_minus
from .spectral import spectral_data
from .systems import matrix_power_exact


@dataclass(frozen=True)
class CylFunction:
    """Per-type constant densities."""

    c: tuple

    def __post_init__(self):
        object.__setattr__(self, "c", tuple(float(x) for x in self.c))

    @classmethod
    def indicator(cls, m, i):
        return cls(tuple(1.0 if t == i else 0.0 for t in range(m)))

    @classmethod
    def constant(cls, m, value=1.0):
        return cls((float(value),) * m)

    @property
    def m(self):
        return len(self.c)

    @property
    def sup_norm(self):
        return max(abs(x) for x in self.c)

    def weights(self, volumes):
        """Per-type total mass w_i = c_i vol(A_i)."""
        return np.asarray(self.c) * np.asarray(volumes, dtype=float)

    def l1_norm(self, spec):
        """Mean of |f|: sum_i u1_i |c_i| vol_i."""
        return float(np.sum(spec.frequencies * np.abs(self.c) * spec.volumes))


def mean(spec, f):
    """Invariant mean: sum_i u1_i c_i vol_i."""
    c = np.asarray(getattr(f, "c", f), dtype=float)
    return float(np.sum(spec.frequencies * c * spec.volumes))


def _as_cyl(system, f):
    if isinstance(f, CylFunction):
        if f.m != system.m:
            raise FormatError(
                f"density vector has {f.m} entries for {system.m} types"
            )
        return f
    return CylFunction(tuple(np.atleast_1d(np.asarray(f, dtype=float))))


def _cube_profile_for(view, dom, min_order=0, backend="auto"):
    system = view.system
    if dom.kind != "cube" or system.d not in (1, 2):
        return None
    try:
        engine = engine_for(system, backend)
    except FormatError:
        return None
    view.ensure_contains(dom)
    return engine.cube_profile(view.root, dom, min_order=min_order)


def profile_integral(spec, w, c, prof):
    """Exact integral from a descent profile: captured supertiles carry the
    matrix-power mass of w, frontier tiles the clipped volume at density c.
    Matrix powers are exact integers, so quadrature error is zero and only
    final float products round."""
    total = float(np.dot(c, prof.front_vol))
    k0 = prof.min_order
    m = len(w)
    A = [[int(x) for x in row] for row in spec.M]
    R = [[1 if i == j else 0 for j in range(m)] for i in range(m)]
    for k in range(k0, prof.root_order + 1):
        row = prof.counts[k]
        if row.any():
            mw = [sum(R[i][j] * w[j] for j in range(m)) for i in range(m)]
            total += float(sum(mw[t] * int(row[t]) for t in range(m)))
        if k < prof.root_order:
            R = [
                [sum(R[i][t] * A[t][j] for t in range(m)) for j in range(m)]
                for i in range(m)
            ]
    return total


def profile_direction_value(spec, prof, n):
    """Measure value of eigen direction n accumulated over the captured
    supertiles of a profile (complex for complex eigenvalues)."""
    cell = spec.cells[n - 1]
    if cell.size != 1:
        raise DefectiveError(
            f"direction {n} sits in a Jordan cell of size {cell.size}",
            size=cell.size,
        )
    v = spec.P[:, cell.start]
    theta = cell.theta
    value = 0.0 + 0.0j
    power = theta**prof.min_order
    for k in range(prof.min_order, prof.root_order + 1):
        row = prof.counts[k]
        if row.any():
            value += power * complex(np.dot(v, row))
        power *= theta
    return value


def ergodic_integral(view, f, dom, backend="auto"):
    """Exact integral of f over the domain (zero quadrature error)."""
    system = view.system
    f = _as_cyl(system, f)
    spec = spectral_data(system)
    c = np.asarray(f.c)
    w = f.weights(spec.volumes)
    prof = _cube_profile_for(view, dom, backend=backend)
    if prof is not None:
        return profile_integral(spec, w, c, prof)
    deco = decompose(view, dom)
    total = 0.0
    for t in deco.captured:
        Mk = matrix_power_exact(spec.M, t.order)
        total += float(sum(Mk[t.type][j] * w[j] for j in range(system.m)))
    for t in deco.frontier:
        total += float(c[t.type]) * clip_volume(dom, t.support(system))
    return total


def tile_count(view, i, dom, backend="auto"):
    """Exact number of type-i tiles with support inside the domain."""
    system = view.system
    if not 0 <= int(i) < system.m:
        raise FormatError(f"type index {i} out of range")
    i = int(i)
    prof = _cube_profile_for(view, dom, backend=backend)
    S = system.substitution_matrix()
    if prof is not None:
        total = 0
        for k in range(prof.root_order + 1):
            row = prof.counts[k]
            if row.any():
                Sk = matrix_power_exact(S, k)
                total += sum(Sk[i][t] * int(row[t]) for t in range(system.m))
        return total
    deco = decompose(view, dom)
    total = 0
    for t in deco.captured:
        Sk = matrix_power_exact(S, t.order)
        total += Sk[i][t.type]
    return total


def deviation(view, spec, f, dom, backend="auto"):
    """Ergodic integral minus volume times the invariant mean."""
    f = _as_cyl(view.system, f)
    return ergodic_integral(view, f, dom, backend=backend) - dom.volume * mean(
        spec, f
    )


def _fast_directions(spec):
    """1-based indices of the fast eigen directions beyond the leading one."""
    out = []
    strict = spec.boundary * (1.0 + 1e-9)
    for n, cell in enumerate(spec.cells[1:], start=2):
        if abs(cell.theta) > strict:
            if cell.size != 1:
                raise DefectiveError(
                    "asymptotic expansion needs simple fast directions",
                    size=cell.size,
                )
            out.append(n)
    return out


def expansion_terms(spec, f, prof):
    """Per fast direction n >= 2: the measure value on the captured tiles
    times the dual pairing with f. Conjugate directions appear as conjugate
    terms, so the total over all of them is real."""
    f_c = np.asarray(getattr(f, "c", f), dtype=float)
    terms = {}
    for n in _fast_directions(spec):
        cell = spec.cells[n - 1]
        value = profile_direction_value(spec, prof, n)
        mminus = complex(np.sum(f_c * spec.volumes * spec.Q[cell.start]))
        terms[n] = value * mminus
    return terms


def residual(view, spec, f, dom, backend="auto"):
    """Deviation left after subtracting every fast-direction term."""
    system = view.system
    f = _as_cyl(system, f)
    prof = _cube_profile_for(view, dom, backend=backend)
    if prof is None:
        raise FormatError("the asymptotic expansion is evaluated on cubes")
    c = np.asarray(f.c)
    w = f.weights(spec.volumes)
    integral = profile_integral(spec, w, c, prof)
    dev = integral - dom.volume * mean(spec, f)
    total = complex(sum(expansion_terms(spec, f, prof).values()))
    scale = max(abs(dev), abs(total.real), 1.0)
    if abs(total.imag) > 1e-8 * scale:
        raise FormatError(
            f"expansion terms did not pair to a real value (imag {total.imag})"
        )
    return abs(dev - total.real)


def pullback_integral(view, spec, f, k, dom, backend="auto"):
    """Integral of f pulled back k subdivision steps: the view is
    re-addressed k orders down, so order-k supertiles act as tiles with
    mass lam**(d k) w, and the frontier clips at order k."""
    k = int(k)
    if k < 0:
        raise FormatError("pullback order must be nonnegative")
    system = view.system
    f = _as_cyl(system, f)
    c = np.asarray(f.c)
    w = f.weights(spec.volumes) * system.lam ** (system.d * k)
    prof = _cube_profile_for(view, dom, min_order=k, backend=backend)
    if prof is not None:
        return profile_integral(spec, w, c, prof)
    deco = decompose(view, dom, min_order=k)
    total = 0.0
    for t in deco.captured:
        if t.order < k:
            raise FormatError("captured tile below the pullback order")
        Mk = matrix_power_exact(spec.M, t.order - k)
        total += float(sum(Mk[t.type][j] * w[j] for j in range(system.m)))
    for t in deco.frontier:
        total += float(c[t.type]) * clip_volume(dom, t.support(system))
    return total
