"""Experiment drivers: deviation-exponent sweeps, the asymptotic-residual
check, the Hölder-modulus scan, and the limit-law sampler with its
convergence diagnostics.

Everything here is deterministic given its seed: random draws use a
counter-based generator keyed by (seed, sample index), so a run can be
parallelized across processes, re-chunked, or re-run with a different
worker count and still produce the same numbers in the same order.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .descent import engine_for
from .ergodic import (
    CylFunction,
    _as_cyl,
    expansion_terms,
    mean,
    profile_direction_value,
    profile_integral,
)
from .errors import (
    BetaZeroError,
    DegenerateFitError,
    FormatError,
    HypothesesError,
    MeanNonzeroError,
    NotInEppError,
)
from .geometry import Domain
from .spectral import spectral_data
from .view import TilingView


# ---------------------------------------------------------------------------
# deviation sweeps


@dataclass(frozen=True)
class DeviationTable:
    R: np.ndarray
    deviation: np.ndarray
    residual: np.ndarray
    phi2_abs: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        R = np.asarray(self.R, dtype=float)
        if len(R) >= 2 and not (np.diff(R) > 0).all():
            raise FormatError("R grid must be strictly increasing")

    def __len__(self):
        return len(self.R)

    def column(self, name):
        if name not in ("R", "deviation", "residual", "phi2_abs"):
            raise FormatError(f"unknown column {name!r}")
        return np.asarray(getattr(self, name), dtype=float)


def deviation_curve(view, spec, f, R_grid, dom=None, backend="auto"):
    """Deviation, residual, and second-direction measure value over a grid
    of dilations of a base domain (default: the unit cube), one descent per
    R."""
    system = view.system
    f = _as_cyl(system, f)
    if dom is None:
        dom = Domain.cube(1.0, d=system.d)
    R_grid = [float(R) for R in R_grid]
    if any(b <= a for a, b in zip(R_grid, R_grid[1:])):
        raise FormatError("R grid must be strictly increasing")
    engine = engine_for(system, backend)
    mu = mean(spec, f)
    c = np.asarray(f.c)
    w = f.weights(spec.volumes)
    devs, resids, phi2s = [], [], []
    for R in R_grid:
        dom_R = dom.dilate(R)
        view.ensure_contains(dom_R)
        prof = engine.cube_profile(view.root, dom_R)
        integral = profile_integral(spec, w, c, prof)
        dev = integral - dom_R.volume * mu
        terms = expansion_terms(spec, f, prof)
        total = complex(sum(terms.values()))
        scale = max(abs(dev), abs(total.real), 1.0)
        if abs(total.imag) > 1e-8 * scale:
            raise FormatError("expansion terms did not pair to a real value")
        devs.append(dev)
        resids.append(abs(dev - total.real))
        if spec.ell >= 2:
            phi2s.append(abs(profile_direction_value(spec, prof, 2)))
        else:
            phi2s.append(0.0)
    return DeviationTable(
        R=np.asarray(R_grid),
        deviation=np.asarray(devs),
        residual=np.asarray(resids),
        phi2_abs=np.asarray(phi2s),
        meta={
            "system": system.name,
            "f": list(f.c),
            "domain": dom.kind,
            "regime": spec.regime,
        },
    )


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    r2: float
    n_used: int
    n_dropped: int

    def __iter__(self):
        return iter((self.slope, self.intercept, self.r2))


def exponent_fit(table, column="deviation"):
    """Least-squares slope of log|value| against log R; zero or non-finite
    rows are dropped (their count is reported)."""
    R = table.column("R")
    vals = np.abs(table.column(column))
    if len(R) < 8:
        raise DegenerateFitError(f"need at least 8 rows to fit, got {len(R)}")
    keep = (vals > 0) & np.isfinite(vals)
    n_dropped = int((~keep).sum())
    if keep.sum() < 5:
        raise DegenerateFitError(
            f"only {int(keep.sum())} usable rows after dropping zeros",
            usable=int(keep.sum()),
            dropped=n_dropped,
        )
    x = np.log(R[keep])
    y = np.log(vals[keep])
    slope, intercept = np.polyfit(x, y, 1)
    pred = slope * x + intercept
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return FitResult(
        slope=float(slope),
        intercept=float(intercept),
        r2=r2,
        n_used=int(keep.sum()),
        n_dropped=n_dropped,
    )


# ---------------------------------------------------------------------------
# Hölder modulus


def holder_modulus(view, spec, pairs=1000, rng_seed=0, r_lo=1.0, r_hi=None,
                   direction=2, backend="auto"):
    """Empirical constant C in |Phi(Q_r2) - Phi(Q_r1)| <=
    C r2^(d-1) (r2-r1)^(alpha-(d-1)) over random concentric cube pairs,
    for the given fast direction."""
    system = view.system
    if spec.ell < 2:
        raise NotInEppError("the modulus needs a second fast direction")
    if r_hi is None:
        r_hi = view.covered_radius / 4.0
    if not 0 < r_lo < r_hi:
        raise FormatError("need 0 < r_lo < r_hi")
    expo = spec.alpha - (system.d - 1)
    engine = engine_for(system, backend)
    root = view.root
    rng = np.random.default_rng(rng_seed)
    worst = 0.0
    for _ in range(int(pairs)):
        r1, r2 = np.sort(rng.uniform(r_lo, r_hi, size=2))
        if r2 - r1 < 1e-9:
            continue
        p1 = engine.cube_profile(root, Domain.cube(float(r1), d=system.d))
        p2 = engine.cube_profile(root, Domain.cube(float(r2), d=system.d))
        v1 = profile_direction_value(spec, p1, direction)
        v2 = profile_direction_value(spec, p2, direction)
        denom = r2 ** (system.d - 1) * (r2 - r1) ** expo
        worst = max(worst, abs(v2 - v1) / denom)
    return worst


# ---------------------------------------------------------------------------
# limit law


@dataclass(frozen=True)
class EmpiricalDistribution:
    """Normalized ergodic-integral samples S_n(r) / (beta theta2^n) on an
    r-grid in (0, 1]."""

    r_grid: tuple
    samples: np.ndarray
    n: int
    beta: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "r_grid", tuple(float(x) for x in self.r_grid))
        object.__setattr__(self, "samples", np.asarray(self.samples, dtype=float))
        r = np.asarray(self.r_grid, dtype=float)
        if (r <= 0).any() or (r > 1).any():
            raise FormatError("r grid must lie in (0, 1]")
        if len(r) >= 2 and not (np.diff(r) > 0).all():
            raise FormatError("r grid must be strictly increasing")
        if self.samples.ndim != 2 or self.samples.shape[1] != len(r):
            raise FormatError("sample matrix shape does not match the r grid")
        if self.samples.shape[0] < 100:
            raise FormatError(
                f"need at least 100 samples, got {self.samples.shape[0]}"
            )
        if self.beta == 0.0:
            raise BetaZeroError("normalization requires beta != 0")

    def column(self, r):
        r_arr = np.asarray(self.r_grid, dtype=float)
        idx = int(np.argmin(np.abs(r_arr - r)))
        if abs(r_arr[idx] - r) > 1e-12 * max(1.0, abs(r)):
            raise FormatError(f"r={r} is not on the grid")
        return self.samples[:, idx]


def check_limitlaw_hypotheses(spec):
    """Second eigenvalue simple, real, positive, above the boundary scale,
    and strictly dominating the third."""
    if len(spec.cells) < 2:
        raise HypothesesError("no second eigenvalue")
    c2 = spec.cells[1]
    if c2.size != 1:
        raise HypothesesError("second eigenvalue is not simple", size=c2.size)
    if abs(c2.theta) <= spec.boundary * (1.0 + 1e-9):
        raise HypothesesError(
            "second eigenvalue does not exceed the boundary scale",
            theta2=abs(c2.theta),
            boundary=spec.boundary,
        )
    if abs(c2.theta.imag) > 1e-12 or c2.theta.real <= 0:
        raise HypothesesError(
            "second eigenvalue is not a positive real", theta=str(c2.theta)
        )
    theta2 = c2.theta.real
    if len(spec.cells) >= 3 and abs(spec.cells[2].theta) >= theta2 * (1 - 1e-12):
        raise HypothesesError(
            "third eigenvalue is not strictly smaller",
            theta3=str(spec.cells[2].theta),
        )
    return theta2


def beta_value(spec, f):
    """beta(f): pairing of f with the second dual vector, asserted real."""
    c2 = spec.cells[1]
    c = np.asarray(getattr(f, "c", f), dtype=float)
    val = complex(np.sum(c * spec.volumes * spec.Q[c2.start]))
    if abs(val.imag) > 1e-10 * max(1.0, abs(val.real)):
        raise HypothesesError("beta(f) is not real", beta=str(val))
    return val.real


def _window_passes_preflight(system, spec, side, freq_tol):
    from .ergodic import ergodic_integral

    extent = (side / 2.0 + side / 20.0) * math.sqrt(system.d) * 1.05
    view = TilingView.for_extent(system, extent)
    dom = Domain.cube(side, d=system.d)
    target = spec.frequencies * spec.volumes
    for i in range(system.m):
        got = ergodic_integral(view, CylFunction.indicator(system.m, i), dom)
        if abs(got / dom.volume - target[i]) > freq_tol * target[i]:
            return False, view
    return True, view


def _sampling_window(system, spec, n, freq_tol=0.01, max_grow=6, side=None):
    """Window side for the uniform-translate sampler: at least 10 lam^n,
    grown by factors of 3 until the empirical frequency of each type over
    the window matches u1 within `freq_tol` (unique-ergodicity preflight).

    An explicit `side` skips the growth but not the preflight: small
    windows over-represent one type (the imbalance decays like a power of
    the side), and sampling from such a window is not a draw from mu.
    """
    lam_n = system.lam**n
    if side is not None:
        side = float(side)
        if side < 10.0 * lam_n:
            raise FormatError(
                f"window side {side} is below the minimum {10.0 * lam_n}"
            )
        ok, view = _window_passes_preflight(system, spec, side, freq_tol)
        if not ok:
            raise HypothesesError(
                "sampling window failed the frequency preflight",
                side=side,
                tolerance=freq_tol,
            )
        return side, view
    side = 10.0 * lam_n
    for _ in range(max_grow + 1):
        ok, view = _window_passes_preflight(system, spec, side, freq_tol)
        if ok:
            return side, view
        side *= 3.0
    raise HypothesesError(
        "sampling window failed the frequency preflight",
        side=side,
        tolerance=freq_tol,
    )


def _sample_rows(view, spec, f_c, n, r_grid, rng_seed, w_side, indices):
    """Normalized S_n and renormalized second-direction values for a batch
    of sample indices (each index draws through its own keyed generator)."""
    system = view.system
    engine = engine_for(system)
    root = view.root
    theta2 = spec.cells[1].theta.real
    f = CylFunction(tuple(f_c))
    c = np.asarray(f.c)
    w = f.weights(spec.volumes)
    beta = beta_value(spec, f)
    lam_n = system.lam**n
    norm = beta * theta2**n
    out = []
    for idx in indices:
        rng = np.random.default_rng(np.random.Philox(key=[rng_seed, idx]))
        y = (rng.random(system.d) - 0.5) * w_side
        s_row = []
        p_row = []
        for r in r_grid:
            dom = Domain.cube(r * lam_n, center=tuple(y))
            view.ensure_contains(dom)
            prof = engine.cube_profile(root, dom)
            s_row.append(profile_integral(spec, w, c, prof) / norm)
            p_row.append(
                (profile_direction_value(spec, prof, 2) / theta2**n).real
            )
        out.append((idx, s_row, p_row))
    return out


def _run_samples(view, spec, f_c, n, r_grid, rng_seed, w_side, samples, workers):
    indices = list(range(samples))
    if workers is None or workers <= 1:
        rows = _sample_rows(view, spec, f_c, n, r_grid, rng_seed, w_side, indices)
    else:
        chunk = max(1, math.ceil(samples / (workers * 4)))
        batches = [indices[i : i + chunk] for i in range(0, samples, chunk)]
        rows = []
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futs = [
                pool.submit(
                    _sample_rows, view, spec, f_c, n, r_grid, rng_seed, w_side, b
                )
                for b in batches
            ]
            for fut in futs:
                rows.extend(fut.result())
    rows.sort(key=lambda e: e[0])
    S = np.array([r[1] for r in rows], dtype=float)
    P = np.array([r[2] for r in rows], dtype=float)
    return S, P


def limitlaw_sample(
    system,
    f,
    n,
    samples,
    r_grid,
    rng_seed=0,
    workers=None,
    check_hypotheses=True,
    window_side=None,
):
    """Empirical distribution of the normalized deviation process.

    Each sample translates the observation cube by a uniform draw from a
    window that passed the frequency preflight, integrates f over
    Q_{r lam^n} + y for every r, and divides by beta(f) theta2^n.
    """
    spec = spectral_data(system)
    f = _as_cyl(system, f)
    if check_hypotheses:
        check_limitlaw_hypotheses(spec)
    else:
        import warnings

        warnings.warn(
            "limit-law hypotheses not checked; no convergence guarantee",
            stacklevel=2,
        )
    mu = mean(spec, f)
    if abs(mu) > 1e-10 * max(1.0, f.sup_norm):
        raise MeanNonzeroError(f"f must have zero mean, got {mu}", mean=mu)
    beta = beta_value(spec, f)
    if abs(beta) < 1e-12:
        raise BetaZeroError("beta(f) vanishes; the normalization is empty")
    r_grid = tuple(float(r) for r in r_grid)
    w_side, view = _sampling_window(system, spec, n, side=window_side)
    S, _ = _run_samples(
        view, spec, f.c, n, r_grid, rng_seed, w_side, int(samples), workers
    )
    return EmpiricalDistribution(
        r_grid=r_grid,
        samples=S,
        n=int(n),
        beta=beta,
        meta={
            "system": system.name,
            "f": list(f.c),
            "rng_seed": int(rng_seed),
            "window_side": w_side,
            "view_depth": view.depth,
            "tightness_exponent": (spec.alpha or 0.0) - (system.d - 1),
        },
    )


def limitlaw_matrix(
    system, f, n_range, samples, r_grid, rng_seed=0, workers=None
):
    """Distributions for a range of n plus pairwise KS distances.

    Comparing empirical laws across n only makes sense when the sampling
    windows are geometrically similar, so every n here uses one common
    window-to-cube ratio, fixed by whichever n needs the largest one.
    """
    spec = spectral_data(system)
    n_list = sorted(int(n) for n in n_range)
    if len(n_list) < 2:
        raise FormatError("need at least two values of n")
    ratio = 10.0
    for n in n_list:
        side, _ = _sampling_window(system, spec, n)
        ratio = max(ratio, side / system.lam**n)
    dists = {}
    for n in n_list:
        dists[n] = limitlaw_sample(
            system,
            f,
            n,
            samples,
            r_grid,
            rng_seed=rng_seed,
            workers=workers,
            window_side=ratio * system.lam**n,
        )
    r_grid = dists[n_list[0]].r_grid
    ks = {
        r: {
            (na, nb): ks_distance(dists[na], dists[nb], r)
            for i, na in enumerate(n_list)
            for nb in n_list[i + 1 :]
        }
        for r in r_grid
    }
    return dists, ks


def renormalized_phi(view, spec, n, r_grid, y):
    """The comparison process: theta2^{-n} Phi_2(Q_{r lam^n} + y) per r."""
    if spec.ell < 2:
        raise NotInEppError("no second fast direction")
    system = view.system
    engine = engine_for(system)
    theta2 = spec.cells[1].theta
    lam_n = system.lam**n
    out = []
    for r in r_grid:
        if r == 0:
            out.append(0.0)
            continue
        dom = Domain.cube(float(r) * lam_n, center=y)
        view.ensure_contains(dom)
        prof = engine.cube_profile(view.root, dom)
        val = profile_direction_value(spec, prof, 2) / theta2**n
        out.append(val.real if abs(val.imag) < 1e-9 * max(1.0, abs(val)) else val)
    return np.asarray(out)


def decay_probe(system, f, n_range, samples, r_grid, rng_seed=0, workers=None):
    """Mean sup-over-r distance between the normalized integral process and
    the renormalized measure process, per n, with the same translation
    draws across all n (the window is sized for the largest n)."""
    spec = spectral_data(system)
    f = _as_cyl(system, f)
    check_limitlaw_hypotheses(spec)
    n_list = sorted(int(n) for n in n_range)
    r_grid = tuple(float(r) for r in r_grid)
    w_side, view = _sampling_window(system, spec, n_list[-1])
    out = {}
    for n in n_list:
        S, P = _run_samples(
            view, spec, f.c, n, r_grid, rng_seed, w_side, int(samples), workers
        )
        out[n] = float(np.abs(S - P).max(axis=1).mean())
    return out


def ks_distance(emp_a, emp_b, r):
    """Two-sample Kolmogorov–Smirnov statistic between the columns at r."""
    a = np.sort(emp_a.column(r))
    b = np.sort(emp_b.column(r))
    both = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, both, side="right") / len(a)
    cdf_b = np.searchsorted(b, both, side="right") / len(b)
    return float(np.abs(cdf_a - cdf_b).max())


def tightness_check(emp, pairs=None, exponent=None, rng_seed=0):
    """Empirical modulus constant: max over samples and grid pairs of
    |v(r2) - v(r1)| / |r2 - r1|^exponent."""
    r = np.asarray(emp.r_grid, dtype=float)
    if len(r) < 2:
        raise FormatError("need at least two grid points")
    if exponent is None:
        exponent = emp.meta.get("tightness_exponent")
        if exponent is None:
            raise FormatError("no exponent given and none recorded in meta")
    exponent = float(exponent)
    all_pairs = [(i, j) for i in range(len(r)) for j in range(i + 1, len(r))]
    if pairs is not None and pairs < len(all_pairs):
        rng = np.random.default_rng(rng_seed)
        sel = rng.choice(len(all_pairs), size=int(pairs), replace=False)
        all_pairs = [all_pairs[k] for k in sel]
    worst = 0.0
    for i, j in all_pairs:
        gap = abs(r[j] - r[i]) ** exponent
        diff = np.abs(emp.samples[:, j] - emp.samples[:, i]).max()
        worst = max(worst, diff / gap)
    return worst
