"""Exception hierarchy shared by all hybridqed modules."""


class HybridQEDError(Exception):
    """Base class for every error raised by this package."""


class NonHermitianInput(HybridQEDError, ValueError):
    pass


class NotPositiveSemidefinite(HybridQEDError, ValueError):
    pass


class DimensionMismatch(HybridQEDError, ValueError):
    pass


class UnknownFactor(HybridQEDError, KeyError):
    pass


class DivisionByZeroDetuning(HybridQEDError, ZeroDivisionError):
    """A closed-form expression has a vanishing detuning in a denominator."""

    def __init__(self, names):
        self.names = tuple(names)
        super().__init__("zero detuning in denominator: " + ", ".join(self.names))


class StateInvariantViolated(HybridQEDError, ArithmeticError):
    """Propagated state drifted outside the set of valid density matrices."""


class NotADensityMatrix(HybridQEDError, ValueError):
    pass


class NotXState(HybridQEDError, ValueError):
    pass


class FitDidNotConverge(HybridQEDError, RuntimeError):
    pass


class ConfigError(HybridQEDError, ValueError):
    """Base for configuration problems; carries the offending line or flag."""

    def __init__(self, message, where=None):
        self.where = where
        if where is not None:
            message = f"{where}: {message}"
        super().__init__(message)


class UnknownKey(ConfigError):
    pass


class MalformedValue(ConfigError):
    pass
