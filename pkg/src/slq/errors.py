"""Exception types raised across the package."""


class SLQError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(SLQError):
    """Problem data failed structural validation."""


class NonProjector(ValidationError):
    """A boundary matrix is not an orthogonal projector."""


class NonHermitian(ValidationError):
    """A matrix required to be Hermitian is not."""


class H2StructureViolation(ValidationError):
    """H2 does not satisfy H2 = T2 H2 T2."""


class InvalidGauge(ValidationError):
    """Gauge constant is not a Hermitian matrix supported on ran(T1perp)."""


class NegativeShiftedEigenvalue(SLQError):
    """A shifted eigenvalue lambda + c is negative."""


class RootCountMismatch(SLQError):
    """Zeros of the boundary determinant on [0,1) do not total m."""


class SingularContour(SLQError):
    """A residue contour passes through a singular point."""


class IntegratorFailure(SLQError):
    """The adaptive ODE integrator did not reach the right endpoint."""


class SlotMismatch(SLQError):
    """Eigenvalue count near some index level disagrees with the index set."""


class AtEigenvalue(SLQError):
    """Requested spectral parameter sits on (or too near) an eigenvalue."""


class ContourThroughEigenvalue(SLQError):
    """A weight contour node is too close to an eigenvalue."""


class NoConvergence(SLQError):
    """Iterative refinement (e.g. contour node doubling) failed to settle."""


class IndexSetMismatch(SLQError):
    """Two spectral datasets carry incompatible index sets."""


class NoValidN0(SLQError):
    """No admissible grouping threshold n0 exists at this truncation."""


class IllConditioned(SLQError):
    """Linear system condition estimate exceeds the trust bound."""


class GridMismatch(SLQError):
    """Two sampled functions live on different grids."""
