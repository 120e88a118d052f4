"""Exception types shared across the package."""


class UltrajumpError(Exception):
    """Base class for all errors raised by this package."""


class EmptyWindow(UltrajumpError):
    """Level window has no room for at least one refinement step."""


class NonPositiveMass(UltrajumpError):
    """A ball would receive zero or negative mass."""


class InconsistentWeights(UltrajumpError):
    """Child mass fractions of some node do not sum to one."""


class MixedSpaces(UltrajumpError):
    """Addresses from two different tree spaces were combined."""


class LevelOutOfWindow(UltrajumpError):
    """Requested level lies outside the space's level window."""


class LevelOrderViolation(UltrajumpError):
    """Coarse/fine level arguments given in the wrong order."""


class LevelMismatch(UltrajumpError):
    """Function level does not match the kernel or generator level."""


class DiagonalQuery(UltrajumpError):
    """Jump density queried on the diagonal x == y."""


class ComponentCountMismatch(UltrajumpError):
    """Mixture assignment refers to a component index that does not exist."""


class InconsistentGamma(UltrajumpError):
    """Mixture assignment is not constant on products of distinct balls."""


class NegativeRate(UltrajumpError):
    """An off-diagonal generator rate came out negative (upstream corruption)."""


class NegativeTime(UltrajumpError):
    """Semigroup evaluation requested at negative time."""


class NonPositiveLambda(UltrajumpError):
    """Resolvent parameter must be strictly positive."""


class SingularSystem(UltrajumpError):
    """Resolvent linear system could not be solved to tolerance."""


class K0BelowM(UltrajumpError):
    """Base level for the jump-moment bound is coarser than the function allows."""


class NonPositiveHorizon(UltrajumpError):
    """Path simulation requested with a non-positive time horizon."""


class ZeroDensity(UltrajumpError):
    """Initial density integrates to zero."""


class InsufficientSamples(UltrajumpError):
    """Monte Carlo comparison requested with too few paths."""


class ConfigParseError(UltrajumpError):
    """Experiment configuration failed to parse or validate."""
