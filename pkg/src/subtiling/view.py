"""A window into the self-similar tiling of the plane (or line).

Blowing up the seed tile about its fixed point `depth` times gives a single
supertile whose order-0 tiles agree with the infinite tiling on a ball
around the origin; every query must stay inside that ball. Views are
immutable and all traversals are stateless, so one view can serve many
threads or processes at once.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import BudgetError, FormatError, RegionError
from .geometry import TileClass, classify, support_bbox
from .systems import find_seed


@dataclass(frozen=True)
class TilingView:
    system: object
    seed: object
    depth: int

    @classmethod
    def create(cls, system, depth, seed=None):
        if depth < 1:
            raise FormatError("view depth must be at least 1")
        if seed is None:
            seed = find_seed(system)
        return cls(system, seed, int(depth))

    @classmethod
    def for_extent(cls, system, extent, seed=None, slack=1.0):
        """The shallowest view whose covered ball has radius >= extent*slack."""
        if extent <= 0:
            raise FormatError("extent must be positive")
        if seed is None:
            seed = find_seed(system)
        need = extent * slack / seed.margin
        step = system.lam**seed.power
        depth = max(1, math.ceil(math.log(need) / math.log(step) + 1e-12))
        while system.lam ** (seed.power * depth) * seed.margin < extent * slack:
            depth += 1
        return cls(system, seed, depth)

    @property
    def root(self):
        return self.seed.root(self.system, self.depth)

    @property
    def covered_radius(self):
        return self.seed.covered_radius(self.system, self.depth)

    def ensure_contains(self, dom):
        """Raise unless the domain sits inside the covered ball."""
        lo, hi = dom.bbox()
        corners = _bbox_corners(lo, hi)
        r = self.covered_radius
        worst = max(float(np.linalg.norm(c)) for c in corners)
        if worst > r:
            raise RegionError(
                f"domain reaches {worst:.6g} from the origin but the view only "
                f"covers radius {r:.6g}; deepen the view",
                required=worst,
                covered=r,
                depth=self.depth,
            )

    def deepened(self, extra=1):
        return TilingView(self.system, self.seed, self.depth + int(extra))

    def tiles_with_classes(self, dom, order=0, max_tiles=2_000_000):
        """Order-`order` tiles meeting the domain, as (tile, class) pairs
        with class INSIDE or CROSSING.

        Generic traversal over any domain kind; the hot numeric paths use
        the descent engine instead.
        """
        self.ensure_contains(dom)
        met = self.system.metrics()
        out = []
        stack = [self.root]
        while stack:
            t = stack.pop()
            cls_ = classify(t.support(self.system), dom, met.geps)
            if cls_ is TileClass.OUTSIDE:
                continue
            if t.order == order:
                out.append((t, cls_))
            else:
                stack.extend(t.children(self.system))
            if len(out) > max_tiles:
                raise BudgetError(
                    "tile traversal exceeded its budget", budget=max_tiles
                )
        out.sort(key=lambda e: (e[0].offset, e[0].type))
        return out

    def tiles_intersecting(self, dom, order=0, max_tiles=2_000_000):
        """Order-`order` tiles whose support meets the domain."""
        return [t for t, _ in self.tiles_with_classes(dom, order, max_tiles)]

    def bbox(self):
        return support_bbox(self.root.support(self.system))


def tiling_view(system, seed, depth):
    return TilingView.create(system, depth, seed=seed)


def _bbox_corners(lo, hi):
    lo = np.atleast_1d(lo)
    hi = np.atleast_1d(hi)
    if lo.size == 1:
        return [lo, hi]
    return [
        np.array([lo[0], lo[1]]),
        np.array([hi[0], lo[1]]),
        np.array([lo[0], hi[1]]),
        np.array([hi[0], hi[1]]),
    ]
