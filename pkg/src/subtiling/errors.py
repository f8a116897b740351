"""Error taxonomy.

Every failure the library can signal carries a stable machine-readable code
(`.code`) and the process exit status the CLI maps it to (`.exit_code`).
Validation rejections exit 2, runtime/math failures exit 3, name/usage
problems exit 64.
"""


class TilingError(Exception):
    code = "ERROR"
    exit_code = 3

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = dict(details)

    def as_dict(self):
        return {"code": self.code, "message": str(self), **self.details}


class FormatError(TilingError):
    """System data is malformed (bad vertices, non-convex piece, lambda <= 1...)."""

    code = "INVALID_FORMAT"
    exit_code = 2


class CoverError(TilingError):
    """Inflated prototile is not exactly covered by its children."""

    code = "REJECT_COVER"
    exit_code = 2


class OverlapError(TilingError):
    """Two children of an inflated prototile overlap with positive volume."""

    code = "REJECT_OVERLAP"
    exit_code = 2


class PrimitivityError(TilingError):
    """No power of the substitution matrix is entrywise positive."""

    code = "REJECT_PRIMITIVITY"
    exit_code = 2


class BudgetError(TilingError):
    code = "BUDGET_EXCEEDED"


class SeedError(TilingError):
    """No inflation power has a child with an interior fixed point."""

    code = "NO_SEED"


class RegionError(TilingError):
    """Requested domain is not covered by the materialized view."""

    code = "OUT_OF_REGION"


class SpectralGapError(TilingError):
    """Perron eigenvalue is not simple or does not match lambda^d."""

    code = "SPECTRAL_GAP_FAIL"


class DefectiveError(TilingError):
    """Eigen-mode requested for an eigenvalue with a nontrivial Jordan block."""

    code = "DEFECTIVE_EPP"


class NegativePowerError(TilingError):
    """Negative matrix power applied to a vector with components outside the
    rapidly expanding subspace."""

    code = "NEGATIVE_POWER_OUTSIDE_EPP"


class NotInEppError(TilingError):
    """Vector is not in the span required by the requested measure."""

    code = "NOT_IN_EPP"


class DegenerateFitError(TilingError):
    code = "DEGENERATE_FIT"


class HypothesesError(TilingError):
    """Second eigenvalue fails the limit-theorem hypotheses."""

    code = "HYPOTHESES_FAIL"


class BetaZeroError(TilingError):
    code = "BETA_ZERO"


class MeanNonzeroError(TilingError):
    code = "MEAN_NONZERO"


class UnknownNameError(TilingError):
    code = "UNKNOWN_NAME"
    exit_code = 64
