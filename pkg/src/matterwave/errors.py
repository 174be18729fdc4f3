"""Exception types shared across the package."""


class MatterwaveError(Exception):
    """Base class for all package-specific errors."""


class NotClosed(MatterwaveError):
    """Interferometer arms do not meet in position and velocity."""


class InsideSource(MatterwaveError):
    """Field point lies inside a source mass and interior evaluation was not requested."""


class PerturbationInvalid(MatterwaveError):
    """Perturbative expansion parameters are outside the validity range."""


class GridTooNarrow(MatterwaveError):
    """Wave packet support reaches the edge of the spatial grid."""


class NotPositiveDefinite(MatterwaveError):
    """Spatial metric block is not positive definite."""


class TruncationLeak(MatterwaveError):
    """Momentum-ladder population is leaking into the truncation boundary."""


class CoverageGap(MatterwaveError):
    """Requested frequency range is not fully covered by the noise model."""


class InsufficientData(MatterwaveError):
    """Too few samples for the requested statistic."""


class UnitMismatch(MatterwaveError):
    """Error-budget entries use units that cannot be combined."""


class SymmetryViolation(MatterwaveError):
    """Coefficient tensor violates its required symmetries."""


class RankDeficient(MatterwaveError):
    """Fit design matrix is rank deficient; unconstrained directions exist.

    The ``null_space`` attribute, when set, holds an orthonormal basis
    (columns) of the unconstrained parameter combinations.
    """

    def __init__(self, message, null_space=None):
        super().__init__(message)
        self.null_space = null_space


class EmptySeries(MatterwaveError):
    """Plot emission was requested for an empty data series."""
