"""Spectral data of the transfer matrix acting on per-type weight vectors.

An order-(k+1) supertile of type j contains S[i, j] order-k children of type
i, so per-type value vectors propagate through M = S^T. Everything here
derives from the exact Jordan form of M (computed symbolically, the matrix
is a small integer matrix): eigenvalue cells sorted by decreasing modulus,
a canonical generalized-eigenvector basis with the leading column pinned to
the prototile volumes when those are supplied, and the dual basis obtained
by inversion.

The fast space collects the Jordan cells with |theta| strictly above the
boundary scale lam**(d-1); those are the directions that carry
finitely-additive measures and dominate the boundary effects.
"""

import math

import numpy as np
import sympy as sp

from .errors import (
    DefectiveError,
    FormatError,
    NegativePowerError,
    SpectralGapError,
)

_REL_TOL = 1e-9
_GAP_ABS = 1e-6


class SpectralCell:
    """One Jordan cell: eigenvalue, chain length, column range in the basis."""

    __slots__ = ("theta", "size", "start")

    def __init__(self, theta, size, start):
        self.theta = theta
        self.size = size
        self.start = start

    def __repr__(self):
        return f"SpectralCell(theta={self.theta}, size={self.size})"


def _binom_general(k, t):
    acc = 1.0
    for r in range(t):
        acc *= (k - r) / (r + 1)
    return acc


def jordan_cell_power(theta, size, k):
    """The k-th power of a single Jordan block, valid for negative k when
    theta is nonzero."""
    J = np.zeros((size, size), dtype=complex)
    for t in range(size):
        if theta == 0:
            val = 1.0 if k - t == 0 else 0.0
            if k < 0:
                raise NegativePowerError("nilpotent cell has no negative powers")
        else:
            val = _binom_general(k, t) * theta ** (k - t)
        for a in range(size - t):
            J[a, a + t] = val
    return J


class SpectralData:
    """Jordan data of M = S^T with a canonical basis.

    Cells are sorted by (-|theta|, arg theta); the leading cell is the
    Perron eigenvalue lam**d. With `volumes` supplied its column is pinned
    to the exact prototile volumes, which makes the dual leading row the
    vector of per-unit-volume tile frequencies. Directions are addressed
    1-based (`v(1)` is the volume direction).
    """

    def __init__(self, S, lam, d, volumes=None):
        S = np.asarray(S, dtype=np.int64)
        if S.ndim != 2 or S.shape[0] != S.shape[1]:
            raise FormatError("count matrix must be square")
        if (S < 0).any():
            raise FormatError("count matrix must be nonnegative")
        self.S = S
        self.M = S.T.copy()
        self.lam = float(lam)
        self.d = int(d)
        self.m = S.shape[0]
        self.boundary = self.lam ** (self.d - 1)
        self._build(volumes)

    def _build(self, volumes):
        m = self.m
        Ms = sp.Matrix([[int(self.M[i, j]) for j in range(m)] for i in range(m)])
        P, J = Ms.jordan_form()
        cells = []
        col = 0
        while col < m:
            size = 1
            while col + size < m and J[col + size - 1, col + size] != 0:
                size += 1
            theta = complex(sp.N(J[col, col], 30))
            cells.append((theta, col, size))
            col += size

        def cell_key(entry):
            theta, col, _ = entry
            return (-abs(theta), round(math.atan2(theta.imag, theta.real), 12), col)

        cells.sort(key=cell_key)
        Pnum = np.array(
            [[complex(sp.N(P[i, j], 30)) for j in range(m)] for i in range(m)]
        )

        basis = np.zeros((m, m), dtype=complex)
        out_cells = []
        pos = 0
        for theta, col, size in cells:
            block = Pnum[:, col : col + size].copy()
            eig = block[:, 0]
            peak = float(np.abs(eig).max())
            idx = int(np.nonzero(np.abs(eig) > 1e-12 * peak)[0][0])
            block = block / eig[idx]
            basis[:, pos : pos + size] = block
            out_cells.append(SpectralCell(theta, size, pos))
            pos += size

        top = out_cells[0]
        if top.size != 1 or abs(top.theta.imag) > _REL_TOL or top.theta.real <= 0:
            raise SpectralGapError(
                "leading eigenvalue is not a simple positive real",
                theta=str(top.theta),
            )
        if len(out_cells) > 1:
            gap = top.theta.real - abs(out_cells[1].theta)
            if gap < _GAP_ABS:
                raise SpectralGapError(
                    "no gap between the leading eigenvalue and the rest",
                    gap=gap,
                )
        want = top.theta.real
        if abs(want - self.lam**self.d) > _REL_TOL * want:
            raise SpectralGapError(
                "leading eigenvalue does not match lam**d",
                theta=want,
                expected=self.lam**self.d,
            )

        lead = basis[:, 0]
        if np.abs(lead.imag).max() > _REL_TOL:
            raise SpectralGapError("leading eigenvector is not real")
        self.volume_pinned = volumes is not None
        if volumes is not None:
            volumes = np.asarray(volumes, dtype=float)
            ratios = volumes / lead.real
            if (
                ratios.max() - ratios.min() > _REL_TOL * ratios.max()
                or ratios.min() <= 0
            ):
                raise SpectralGapError(
                    "leading eigenvector is not proportional to the volumes",
                    ratios=ratios.tolist(),
                )
            basis[:, 0] = volumes

        self.cells = tuple(out_cells)
        self.P = basis
        self.Q = np.linalg.inv(basis)
        resid = float(np.abs(self.Q @ basis - np.eye(m)).max())
        if resid > 1e-9:
            raise SpectralGapError("basis inversion is ill-conditioned", resid=resid)

        self.theta = np.array([c.theta for c in self.cells])
        self.diagonalizable = all(c.size == 1 for c in self.cells)
        strict = self.boundary * (1.0 + _REL_TOL)
        self.ell = int(sum(c.size for c in self.cells if abs(c.theta) > strict))
        at_boundary = [
            c.size
            for c in self.cells
            if abs(abs(c.theta) - self.boundary) <= _REL_TOL * max(self.boundary, 1.0)
        ]
        self.s = max(at_boundary, default=0)
        self.s_plus = max(
            (c.size for c in self.cells if abs(c.theta) > strict), default=0
        )
        fast_min = min(abs(c.theta) for c in self.cells if abs(c.theta) > strict)
        self.gamma = 0.5 * (self.boundary + fast_min)
        if self.ell >= 2:
            self.alpha = math.log(abs(self.cells[1].theta)) / math.log(self.lam)
        else:
            self.alpha = None

    # -- descriptors

    @property
    def volumes(self):
        if not self.volume_pinned:
            raise FormatError("spectral data was built without prototile volumes")
        return self.P[:, 0].real.copy()

    @property
    def frequencies(self):
        """Asymptotic number of type-i tiles per unit volume (dual to the
        volume vector, so frequencies . volumes = 1)."""
        if not self.volume_pinned:
            raise FormatError("spectral data was built without prototile volumes")
        row = self.Q[0]
        if np.abs(row.imag).max() > _REL_TOL:
            raise SpectralGapError("leading dual vector is not real")
        return row.real.copy()

    @property
    def regime(self):
        if self.ell >= 2:
            return "power"
        if self.s >= 1:
            return "log-corrected"
        return "bounded" if self.d == 1 else "boundary"

    def fast_cells(self):
        strict = self.boundary * (1.0 + _REL_TOL)
        return tuple(c for c in self.cells if abs(c.theta) > strict)

    def summary(self):
        """Plain-data description, embedded into every tool output."""
        return {
            "theta": [[c.theta.real, c.theta.imag] for c in self.cells],
            "cell_sizes": [c.size for c in self.cells],
            "ell": self.ell,
            "s": self.s,
            "s_plus": self.s_plus,
            "gamma": self.gamma,
            "alpha": self.alpha,
            "regime": self.regime,
            "boundary": self.boundary,
            "diagonalizable": self.diagonalizable,
        }

    def _direction(self, n):
        if not 1 <= n <= len(self.cells):
            raise FormatError(f"direction index {n} out of range")
        cell = self.cells[n - 1]
        if cell.size != 1:
            raise DefectiveError(
                f"direction {n} sits in a Jordan cell of size {cell.size}",
                size=cell.size,
            )
        return cell

    def v(self, n):
        """Generalized eigenvector of direction n (1-based, volume first)."""
        cell = self._direction(n)
        col = self.P[:, cell.start]
        return col.real.copy() if np.abs(col.imag).max() < 1e-14 else col.copy()

    def u(self, n):
        """Dual vector of direction n: <v(i), u(j)> = delta_ij with the
        bilinear (unconjugated) pairing."""
        cell = self._direction(n)
        row = self.Q[cell.start]
        return row.real.copy() if np.abs(row.imag).max() < 1e-14 else row.copy()

    def component(self, x, n):
        """Coefficient of x along direction n."""
        cell = self._direction(n)
        c = complex(np.dot(self.Q[cell.start], np.asarray(x, dtype=complex)))
        return c.real if abs(c.imag) < 1e-14 * max(1.0, abs(c)) else c

    def coords(self, x):
        return self.Q @ np.asarray(x, dtype=complex)

    def in_fast_space(self, x, rel_tol=1e-9):
        """Whether x lies in the fast space up to a relative tolerance."""
        x = np.asarray(x, dtype=float)
        scale = float(np.abs(x).max())
        if scale == 0.0:
            return True
        co = self.coords(x)
        strict = self.boundary * (1.0 + _REL_TOL)
        for c in self.cells:
            if abs(c.theta) > strict:
                continue
            if np.abs(co[c.start : c.start + c.size]).max() > rel_tol * scale:
                return False
        return True

    # -- powers

    def apply_power(self, x, k, mode="eigen", side="St"):
        """M**k applied to x (side "St", the default) or S**k (side "S").

        mode "eigen" scales coordinates by theta**k and refuses vectors
        with weight on a nontrivial Jordan cell; mode "power" uses the full
        Jordan block powers; mode "matrix" multiplies exact integer powers
        and needs k >= 0. Negative k additionally requires the vector to
        lie in the fast space (the slow cells are not safely invertible
        through the truncation).
        """
        k = int(k)
        x = np.asarray(x, dtype=float)
        if side not in ("St", "S"):
            raise FormatError(f"unknown side {side!r}")
        if mode == "matrix":
            if k < 0:
                raise NegativePowerError(
                    "matrix mode cannot apply a negative power", k=k
                )
            from .systems import matrix_power_exact

            A = self.M if side == "St" else self.S
            R = np.array(matrix_power_exact(A, k), dtype=float)
            return R @ x
        if mode not in ("eigen", "power"):
            raise FormatError(f"unknown mode {mode!r}")

        if side == "St":
            B, Binv = self.P, self.Q
            transpose_block = False
        else:
            B, Binv = self.Q.T, self.P.T
            transpose_block = True
        co = Binv @ x.astype(complex)
        scale = max(float(np.abs(x).max()), 1e-300)
        strict = self.boundary * (1.0 + _REL_TOL)
        if k < 0:
            for c in self.cells:
                if abs(c.theta) > strict:
                    continue
                if np.abs(co[c.start : c.start + c.size]).max() > 1e-9 * scale:
                    raise NegativePowerError(
                        "negative powers need a vector in the fast space",
                        k=k,
                        theta=str(c.theta),
                    )
        y = np.zeros(self.m, dtype=complex)
        for c in self.cells:
            if k < 0 and not abs(c.theta) > strict:
                continue
            sl = slice(c.start, c.start + c.size)
            if c.size == 1:
                y += (c.theta**k * co[c.start]) * B[:, c.start]
                continue
            if mode == "eigen":
                if np.abs(co[sl]).max() > 1e-12 * scale:
                    raise DefectiveError(
                        "eigen mode cannot act on a nontrivial Jordan cell; "
                        "use mode='power'",
                        theta=str(c.theta),
                        size=c.size,
                    )
                continue
            Jk = jordan_cell_power(c.theta, c.size, k)
            if transpose_block:
                Jk = Jk.T
            y += B[:, sl] @ (Jk @ co[sl])
        imag = float(np.abs(y.imag).max())
        if imag > 1e-9 * max(1.0, float(np.abs(y.real).max())):
            raise SpectralGapError("power application produced a complex result")
        return y.real


def eigendata(S, lam, d, volumes=None):
    """SpectralData straight from a count matrix."""
    return SpectralData(S, lam, d, volumes=volumes)


def frequencies(spec):
    return spec.frequencies


def apply_power(spec, x, k, mode="eigen", side="St"):
    return spec.apply_power(x, k, mode=mode, side=side)


def spectral_data(system):
    """SpectralData for a system, volume-pinned (cached per system object)."""
    cached = getattr(system, "_spectral", None)
    if cached is None:
        cached = SpectralData(
            system.substitution_matrix(),
            system.lam,
            system.d,
            volumes=[pt.volume for pt in system.prototiles],
        )
        system._spectral = cached
    return cached
