"""Exception hierarchy.

Everything numerical derives from :class:`NumericalError` and every bad
input file or configuration from :class:`ConfigError`, so the CLI can map
failures to exit codes without knowing the individual types.
"""


class NumericalError(RuntimeError):
    pass


class ConfigError(ValueError):
    pass


# linalg
class NotPositiveDefinite(NumericalError):
    pass


class MassNotSpd(NumericalError):
    pass


class RankDeficientConstraints(NumericalError):
    pass


class EmptyBasis(NumericalError):
    pass


class MaxIterations(NumericalError):
    pass


# fields
class UnknownKind(ConfigError):
    pass


class MalformedRaster(ConfigError):
    pass


class DimensionMismatch(ConfigError):
    pass


# assembly / local basis
class EmptySubdomain(NumericalError):
    pass


class DegenerateInit(NumericalError):
    pass


class InsufficientVectors(NumericalError):
    pass


class TooLarge(NumericalError):
    pass


class KrylovBreakdown(RuntimeWarning):
    """Krylov recurrence reached an invariant subspace; the basis was truncated."""


# coarse space
class BadSplitCount(ConfigError):
    pass


class EmptyExplicitSpace(NumericalError):
    pass


class EmptySplit(NumericalError):
    pass


# time stepping
class StabilityViolation(UserWarning):
    """Time step above the splitting stability limit (run continued on request)."""


class StabilityLimitExceeded(ConfigError):
    pass


class BlowUp(NumericalError):
    pass


# metrics
class ZeroReference(NumericalError):
    pass


class TimeGridMismatch(NumericalError):
    pass
