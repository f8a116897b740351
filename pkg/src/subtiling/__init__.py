"""Self-similar substitution tilings: hierarchical tile measures, ergodic
deviation experiments, and limit-law sampling."""

__version__ = "0.1.0"

from .catalog import builtin, load, names
from .errors import TilingError
from .geometry import Domain
from .measures import phi_minus_cylinder, phi_plus_domain, verify_cocycles
from .spectral import spectral_data
from .systems import SubstitutionSystem, find_seed, validate_system
from .view import TilingView, tiling_view

__all__ = [
    "Domain",
    "SubstitutionSystem",
    "TilingError",
    "TilingView",
    "builtin",
    "find_seed",
    "load",
    "names",
    "phi_minus_cylinder",
    "phi_plus_domain",
    "spectral_data",
    "tiling_view",
    "validate_system",
    "verify_cocycles",
    "__version__",
]
