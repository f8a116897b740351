"""Backend selection and array packing for the cube descent kernels.

The kernels walk the subdivision tree of one root supertile against an
axis-aligned cube and tally, per order and type, the supertiles falling
entirely inside the cube, plus the exact clip volume of the crossing tiles
at the lowest order reached. Two interchangeable backends exist: the pure
reference in `_descent_py` and the compiled twin in `_descent_cy`; both
follow the same operation order, so switching backends never changes a
single bit of the output.
"""

from dataclasses import dataclass

import numpy as np

from .errors import BudgetError, FormatError

try:
    from . import _descent_cy
except ImportError:
    _descent_cy = None

from . import _descent_py


def compiled_available():
    return _descent_cy is not None


@dataclass(frozen=True)
class CubeProfile:
    """Per-order tallies of one descent.

    `counts[k, t]` is the number of order-k type-t supertiles captured whole
    inside the cube; `front_vol[t]` and `front_cnt[t]` are the clipped
    volume and the count of the type-t crossing tiles at order `min_order`.
    """

    counts: np.ndarray
    front_vol: np.ndarray
    front_cnt: np.ndarray
    root_order: int
    min_order: int

    @property
    def captured_tiles(self):
        return int(self.counts.sum())

    @property
    def frontier_tiles(self):
        return int(self.front_cnt.sum())


class DescentEngine:
    """Packs a box-piece system into flat arrays and dispatches to a kernel.

    backend "auto" prefers the compiled kernel when the extension imported,
    "pure" and "compiled" force one side (the latter raises when the
    extension is missing). Only systems whose pieces are axis-aligned boxes
    are supported; other shapes go through the generic view traversal.
    """

    def __init__(self, system, backend="auto"):
        if backend not in ("auto", "pure", "compiled"):
            raise FormatError(f"unknown backend {backend!r}")
        if backend == "compiled" and _descent_cy is None:
            raise FormatError("compiled kernel is not available in this build")
        d = system.d
        if d not in (1, 2):
            raise FormatError("descent kernels support dimensions 1 and 2 only")
        for pt in system.prototiles:
            for p in pt.pieces:
                if d == 2 and not p.is_box:
                    raise FormatError(
                        f"prototile {pt.name!r} has a non-box piece; "
                        "use the generic traversal instead"
                    )
        self.system = system
        self.backend = backend
        if backend == "auto":
            self.backend = "compiled" if _descent_cy is not None else "pure"
        self._kernel = (
            _descent_cy.cube_profile
            if self.backend == "compiled"
            else _descent_py.cube_profile
        )

        piece_start = [0]
        plo0, phi0, plo1, phi1 = [], [], [], []
        for pt in system.prototiles:
            for p in pt.pieces:
                plo0.append(float(p.lo[0]))
                phi0.append(float(p.hi[0]))
                plo1.append(float(p.lo[1]) if d == 2 else 0.0)
                phi1.append(float(p.hi[1]) if d == 2 else 0.0)
            piece_start.append(len(plo0))
        child_start = [0]
        ctype, coff0, coff1 = [], [], []
        for row in system.digits:
            for i, x in row:
                ctype.append(i)
                coff0.append(float(x[0]))
                coff1.append(float(x[1]) if d == 2 else 0.0)
            child_start.append(len(ctype))

        if self.backend == "compiled":
            self._args = (
                np.asarray(piece_start, dtype=np.int64),
                np.asarray(plo0, dtype=np.float64),
                np.asarray(phi0, dtype=np.float64),
                np.asarray(plo1, dtype=np.float64),
                np.asarray(phi1, dtype=np.float64),
                np.asarray(child_start, dtype=np.int64),
                np.asarray(ctype, dtype=np.int64),
                np.asarray(coff0, dtype=np.float64),
                np.asarray(coff1, dtype=np.float64),
            )
        else:
            self._args = (
                piece_start,
                plo0,
                phi0,
                plo1,
                phi1,
                child_start,
                ctype,
                coff0,
                coff1,
            )

    def cube_profile(self, root, dom, min_order=0, max_nodes=50_000_000):
        """Descend from `root` against the cube domain `dom`."""
        if dom.kind != "cube":
            raise FormatError("descent kernels take cube domains only")
        if min_order < 0 or min_order > root.order:
            raise FormatError(
                f"min_order {min_order} outside [0, {root.order}]"
            )
        d = self.system.d
        lo, hi = dom.bbox()
        lo = np.atleast_1d(lo)
        hi = np.atleast_1d(hi)
        met = self.system.metrics()
        try:
            counts, front_vol, front_cnt = self._kernel(
                d,
                self.system.m,
                self.system.lam,
                *self._args,
                int(root.type),
                int(root.order),
                float(root.offset[0]),
                float(root.offset[1]) if d == 2 else 0.0,
                float(lo[0]),
                float(hi[0]),
                float(lo[1]) if d == 2 else 0.0,
                float(hi[1]) if d == 2 else 1.0,
                int(min_order),
                met.geps,
                int(max_nodes),
            )
        except RuntimeError as exc:
            raise BudgetError(str(exc), budget=max_nodes) from exc
        return CubeProfile(
            counts=np.asarray(counts, dtype=np.int64),
            front_vol=np.asarray(front_vol, dtype=np.float64),
            front_cnt=np.asarray(front_cnt, dtype=np.int64),
            root_order=int(root.order),
            min_order=int(min_order),
        )


def engine_for(system, backend="auto"):
    """DescentEngine cached per (system, backend)."""
    cache = getattr(system, "_engines", None)
    if cache is None:
        cache = {}
        system._engines = cache
    if backend not in cache:
        cache[backend] = DescentEngine(system, backend)
    return cache[backend]
