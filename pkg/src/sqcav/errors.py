"""Exception types raised by the library."""


class SqcavError(Exception):
    """Base class for all library errors."""


class InvariantError(SqcavError):
    """A value violates one of its declared invariants."""


class DimensionError(SqcavError):
    """Operator or state dimensions are incompatible."""


class IntegrationError(SqcavError):
    """The adaptive integrator could not meet its tolerances."""


class PositivityError(SqcavError):
    """An evolved state lost positivity beyond the allowed floor."""


class SteadyStateError(SqcavError):
    """Steady-state solve failed (degenerate null space or no convergence)."""


class TruncationError(SqcavError):
    """Fock-space tail occupation exceeds the allowed bound."""


class FitError(SqcavError):
    """Exponential fit did not converge or the data are unusable."""


class RegimeError(SqcavError):
    """A hard parameter-regime precondition is violated."""


class ConfigError(SqcavError):
    """Run configuration file is malformed or inconsistent."""
