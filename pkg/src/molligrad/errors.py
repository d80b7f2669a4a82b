"""Exception types shared across the package.

Everything derives from MolligradError so callers can catch broadly.
Subclassing the closest stdlib exception keeps duck-typed callers working
(DomainError is a ValueError, CapabilityMissing is a TypeError, ...).
"""


class MolligradError(Exception):
    pass


class DomainError(MolligradError, ValueError):
    """Argument outside the mathematical domain of a function."""


class ConfigInvalid(MolligradError, ValueError):
    """Invalid configuration: bad enum value, nonpositive count, missing kernel."""


class DataError(MolligradError, ValueError):
    """Bad runtime data: unreadable file, malformed JSON, wrong payload."""


class DimensionMismatch(DataError):
    """Shapes of model, input, or batch do not line up."""


class CapabilityMissing(MolligradError, TypeError):
    """Operation needs a capability the function does not expose (e.g. parameters)."""


class NonFiniteGradient(MolligradError, ArithmeticError):
    """A sample gradient was NaN/inf and the nan policy forbids dropping it."""


class DegenerateInput(MolligradError, ValueError):
    """Statistic undefined on this input (constant vector, zero spread)."""


class AllZeroInput(DegenerateInput):
    """Vector of all zeros where a nonzero entry is required."""


class ConvergenceFailure(MolligradError, RuntimeError):
    """Numerical routine did not reach the requested tolerance."""
