"""Exception types raised across the library."""


class QBoundError(Exception):
    """Base class for all library errors."""


class NonHermitianError(QBoundError):
    """Input matrix is not Hermitian within tolerance."""


class NumericalFailureError(QBoundError):
    """An eigensolver or other numerical routine did not converge."""


class NegativeEigenvalueError(QBoundError):
    """A matrix required to be positive semi-definite has a negative eigenvalue."""


class DimensionMismatchError(QBoundError):
    """Operands act on Hilbert spaces of different dimensions."""


class DimensionCapError(QBoundError):
    """A tensor power would exceed the configured dimension cap."""


class NonUnitAxisError(QBoundError):
    """Rotation axis is not normalized."""


class OutOfDomainError(QBoundError):
    """A phase value (or a finite-difference stencil point) leaves the domain."""


class OrderUnavailableError(QBoundError):
    """Requested derivative order is not available for this state family."""


class OutOfRangeError(QBoundError):
    """A scalar argument lies outside its admissible range."""


class DuplicateOffsetError(QBoundError):
    """Barankin offsets must be pairwise distinct."""


class ZeroOffsetError(QBoundError):
    """Barankin offsets must be nonzero."""


class SupportViolationError(QBoundError):
    """A test observable has weight on the kernel of the reference state."""


class RangeViolationError(QBoundError):
    """Constraint vector has a component outside the range of the information matrix."""


class NonRealEntryError(QBoundError):
    """An information-matrix entry has a non-negligible imaginary part."""


class SingularStateError(QBoundError):
    """Closed-form qubit expression is undefined for a pure state."""


class DegenerateLikelihoodError(QBoundError):
    """All grid points have identical likelihood; no maximizer exists."""


class OptimizerBudgetExceededError(QBoundError):
    """The test-point grid would exceed the configured evaluation budget."""
