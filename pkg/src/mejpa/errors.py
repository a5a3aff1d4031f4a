"""Exception hierarchy shared by all mejpa modules."""


class MejpaError(Exception):
    """Base class for every error raised deliberately by this package."""


class InvariantError(MejpaError, ValueError):
    """A domain type was constructed with values violating its invariants.

    The message always starts with the name of the offending type.
    """

    def __init__(self, type_name, message):
        self.type_name = type_name
        super().__init__(f"{type_name}: {message}")


class DomainError(MejpaError, ValueError):
    """An operation was called outside its domain of validity."""


class DivergenceError(DomainError):
    """Josephson inductance diverges (flux bias too close to half a flux quantum)."""


class ConsistencyError(MejpaError, ValueError):
    """Two redundant inputs disagree beyond the allowed tolerance."""


class ThresholdError(MejpaError, ArithmeticError):
    """The pump drives the amplifier at or above parametric oscillation threshold."""

    def __init__(self, message, critical_depth=None):
        self.critical_depth = critical_depth
        super().__init__(message)


class UnreachableTargetError(MejpaError, ArithmeticError):
    """Requested gain cannot be reached below threshold."""

    def __init__(self, message, max_gain_db=None):
        self.max_gain_db = max_gain_db
        super().__init__(message)


class FitQualityError(MejpaError, ArithmeticError):
    """A local fit or root search could not be performed reliably."""


class DetectionError(MejpaError, ValueError):
    """No tone found above the noise floor in a spectrum trace."""


class InfeasibleError(MejpaError, ValueError):
    """An optimization start point violates a constraint."""


class ConfigError(MejpaError):
    """Configuration file could not be parsed, validated or instantiated."""
