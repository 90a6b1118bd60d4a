"""Exception types shared across the package."""


class IITError(Exception):
    """Base class for all package errors."""


class InvalidBounds(IITError):
    pass


class LatticeMisaligned(IITError):
    pass


class NonPositiveVariance(IITError):
    pass


class GridTooNarrow(IITError):
    pass


class SupportOutsideGrid(IITError):
    pass


class GridMismatch(IITError):
    pass


class ZeroNorm(IITError):
    pass


class NonOrthogonalPsi(IITError):
    pass


class BadCoefficients(IITError):
    pass


class BadAxis(IITError):
    pass


class IncommensurateShear(IITError):
    pass


class IncommensurateShift(IncommensurateShear):
    """Weight/carrier variant of the commensurability failure."""


class GridOverflow(IITError):
    pass


class NonHermitian(IITError):
    pass


class NonOrthonormalBasis(IITError):
    pass


class UnnormalizedWeight(IITError):
    pass


class DegenerateChannel(IITError):
    pass


class OutOfRange(IITError):
    pass


class NoConvergence(IITError):
    pass


class ConsistencyAbort(IITError):
    """Raised when a run's cross-check disagrees beyond the abort threshold."""


class ConfigError(IITError):
    """Malformed input: unreadable config, unknown profile or parameter."""


class ValidationError(IITError):
    """Well-formed config rejected by the physics checks; carries the
    diagnostics."""
