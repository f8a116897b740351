"""Built-in substitution systems.

Five systems spanning the deviation regimes: two interval substitutions (one
with bounded deviations, one with a genuine power exponent), the table and
chair tilings of the plane, and a two-color 3x3 block system whose second
eigenvalue dominates the boundary scale by a wide gap.
"""

import math
from dataclasses import dataclass

from .errors import UnknownNameError
from .geometry import Piece
from .spectral import spectral_data
from .systems import Prototile, SubstitutionSystem

_PHI = (1.0 + math.sqrt(5.0)) / 2.0
_LAM13 = (1.0 + math.sqrt(13.0)) / 2.0


def _fibonacci():
    a = Prototile("a", (Piece.interval(0.0, _PHI),))
    b = Prototile("b", (Piece.interval(0.0, 1.0),))
    rules = [
        [(0, (0.0,)), (1, (_PHI,))],
        [(0, (0.0,))],
    ]
    return SubstitutionSystem("fibonacci", _PHI, (a, b), rules)


def _nonpisot13():
    lam = _LAM13
    a = Prototile("a", (Piece.interval(0.0, lam),))
    b = Prototile("b", (Piece.interval(0.0, 1.0),))
    rules = [
        [(0, (0.0,)), (1, (lam,)), (1, (lam + 1.0,)), (1, (lam + 2.0,))],
        [(0, (0.0,))],
    ]
    return SubstitutionSystem("nonpisot13", lam, (a, b), rules)


def _table2d():
    h = Prototile("H", (Piece.box((0.0, 0.0), (2.0, 1.0)),))
    v = Prototile("V", (Piece.box((0.0, 0.0), (1.0, 2.0)),))
    rules = [
        [(1, (0.0, 0.0)), (1, (1.0, 0.0)), (0, (2.0, 0.0)), (0, (2.0, 1.0))],
        [(0, (0.0, 0.0)), (0, (0.0, 1.0)), (1, (0.0, 2.0)), (1, (1.0, 2.0))],
    ]
    return SubstitutionSystem("table2d", 2.0, (h, v), rules)


def _unit_squares(squares):
    return tuple(
        Piece.box((float(a), float(b)), (float(a + 1), float(b + 1)))
        for a, b in squares
    )


def _chair():
    """Four rotations of an L-tromino (three unit-square pieces each); every
    inflation splits into four trominoes. Species r+1 and its rule are
    species r turned a quarter-turn, so only the base shape and base rule
    are written out."""
    base_squares = ((0, 0), (1, 0), (0, 1))
    base_rule = ((0, (0, 0)), (0, (1, 1)), (1, (2, 0)), (3, (0, 2)))

    def rot_square(sq):
        a, b = sq
        return (1 - b, a)

    def rot_child(child):
        s, (t0, t1) = child
        return ((s + 1) % 4, (2 - t1, t0))

    squares = [tuple(sorted(base_squares))]
    rules = [tuple(sorted(base_rule))]
    for _ in range(3):
        squares.append(tuple(sorted(rot_square(s) for s in squares[-1])))
        rules.append(tuple(sorted(rot_child(c) for c in rules[-1])))

    prototiles = tuple(
        Prototile(f"L{r}", _unit_squares(sq)) for r, sq in enumerate(squares)
    )
    rules = [
        [(i, (float(t0), float(t1))) for i, (t0, t1) in rule] for rule in rules
    ]
    return SubstitutionSystem("chair", 2.0, prototiles, rules)


def _bicolor3x3():
    square = (Piece.box((0.0, 0.0), (1.0, 1.0)),)
    prototiles = (Prototile("c1", square), Prototile("c2", square))
    swap_at = {(0, 0), (2, 2)}
    rules = []
    for j in range(2):
        rule = []
        for y in range(3):
            for x in range(3):
                i = 1 - j if (x, y) in swap_at else j
                rule.append((i, (float(x), float(y))))
        rules.append(rule)
    return SubstitutionSystem("bicolor3x3", 3.0, prototiles, rules)


_BUILDERS = {
    "fibonacci": _fibonacci,
    "nonpisot13": _nonpisot13,
    "table2d": _table2d,
    "chair": _chair,
    "bicolor3x3": _bicolor3x3,
}

# Reference data the tests pin the spectral pipeline against. `alpha` is the
# exponent log|theta_2| / log(lam) when the fast space has dimension >= 2.
CATALOG_INFO = {
    "fibonacci": {
        "dimension": 1,
        "expansion": _PHI,
        "description": "golden-ratio interval substitution a -> ab, b -> a",
        "aperiodicity": "proven",
        "spectral": {
            "theta_abs": (_PHI, _PHI - 1.0),
            "ell": 1,
            "s": 0,
            "alpha": None,
            "regime": "bounded",
        },
    },
    "nonpisot13": {
        "dimension": 1,
        "expansion": _LAM13,
        "description": "interval substitution a -> abbb, b -> a with a second "
        "eigenvalue outside the unit disk",
        "aperiodicity": "proven",
        "spectral": {
            "theta_abs": (_LAM13, (math.sqrt(13.0) - 1.0) / 2.0),
            "ell": 2,
            "s": 0,
            "alpha": math.log((math.sqrt(13.0) - 1.0) / 2.0) / math.log(_LAM13),
            "regime": "power",
        },
    },
    "table2d": {
        "dimension": 2,
        "expansion": 2.0,
        "description": "table tiling: two 2x1 rectangles, each quartered into "
        "two of each orientation",
        "aperiodicity": "proven",
        "spectral": {
            "theta_abs": (4.0, 0.0),
            "ell": 1,
            "s": 0,
            "alpha": None,
            "regime": "boundary",
        },
    },
    "chair": {
        "dimension": 2,
        "expansion": 2.0,
        "description": "chair tiling: four rotations of an L-tromino",
        "aperiodicity": "proven",
        "spectral": {
            "theta_abs": (4.0, 2.0, 2.0, 0.0),
            "ell": 1,
            "s": 1,
            "alpha": None,
            "regime": "log-corrected",
        },
    },
    "bicolor3x3": {
        "dimension": 2,
        "expansion": 3.0,
        "description": "two-color unit square, 3x3 subdivision with the "
        "opposite color at two diagonal cells",
        "aperiodicity": "unverified",
        "spectral": {
            "theta_abs": (9.0, 5.0),
            "ell": 2,
            "s": 0,
            "alpha": math.log(5.0) / math.log(3.0),
            "regime": "power",
        },
    },
}


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    system: SubstitutionSystem
    regime: str
    aperiodicity: str
    description: str
    spectral: object

    def as_dict(self):
        return {
            "name": self.name,
            "d": self.system.d,
            "lambda": self.system.lam,
            "prototiles": [pt.name for pt in self.system.prototiles],
            "regime": self.regime,
            "aperiodicity": self.aperiodicity,
            "description": self.description,
            "spectral": self.spectral.summary(),
        }


def names():
    return sorted(_BUILDERS)


def load(name):
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise UnknownNameError(
            f"unknown system {name!r}; available: {', '.join(names())}",
            name=name,
            available=names(),
        ) from None
    return builder()


def builtin(name):
    """Catalog entry with spectral data attached."""
    system = load(name)
    info = CATALOG_INFO[name]
    spec = spectral_data(system)
    return CatalogEntry(
        name=name,
        system=system,
        regime=spec.regime,
        aperiodicity=info["aperiodicity"],
        description=info["description"],
        spectral=spec,
    )
