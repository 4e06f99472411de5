"""Exception hierarchy shared by all gphase modules."""


class GphaseError(Exception):
    """Base class for all errors raised by this package."""


class NonHermitianInput(GphaseError):
    """A matrix that must be Hermitian fails the Hermiticity tolerance."""


class DimensionMismatch(GphaseError):
    """Operands have incompatible or unsupported dimensions."""


class InvalidDensityMatrix(GphaseError):
    """Input is not a valid density matrix (trace, Hermiticity or positivity)."""


class InvalidInitialValue(GphaseError):
    """A decoherence-factor sampler does not start at r(0) = 1."""


class UnwrapFailure(GphaseError):
    """Phase unwrapping cannot be validated even at maximum grid refinement."""


class DegenerateEigenvector(GphaseError):
    """The reduced density matrix eigenvector direction is undefined."""


class EigenbranchCrossing(GphaseError):
    """Eigenvalue branches of the trajectory (nearly) cross; gauge smoothing unreliable."""


class DimensionTooLarge(GphaseError):
    """Dense many-body oracle requested beyond its size ceiling."""


class StencilConditioning(GphaseError):
    """Finite-difference coefficient extraction produced unphysical values."""


class QuadratureNonconvergence(GphaseError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class DomainError(GphaseError):
    """Function argument outside its mathematical domain."""


class ValidationError(GphaseError):
    """A parameter record violates its invariants."""


class ConfigParseError(GphaseError):
    """Command-line / run configuration could not be parsed."""


class MagnitudeUnderflow(RuntimeWarning):
    """Mode-product magnitude underflowed below exp(-700); value flushed to zero."""
