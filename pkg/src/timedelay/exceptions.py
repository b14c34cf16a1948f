"""Exception types raised by the library."""


class ContractError(ValueError):
    """A precondition on an argument was violated."""


class SingularSymbolError(ArithmeticError):
    """A momentum symbol is singular on the momentum support of a state."""


class BoxOverflowError(RuntimeError):
    """Wavepacket mass reached the edge region of the periodic box."""


class ConvergenceError(RuntimeError):
    """A quadrature, tail fit or time integral failed to converge.

    Attributes
    ----------
    stage : str
        Short name of the computation that failed.
    """

    def __init__(self, message, stage="numerics"):
        super().__init__(message)
        self.stage = stage


class NearEigenvalueError(ArithmeticError):
    """The finite-rank system ``I + B(x+i0) Lambda`` is numerically singular."""

    def __init__(self, message, x):
        super().__init__(message)
        self.x = x


class ConfigError(ContractError):
    """An experiment configuration is malformed.

    Attributes
    ----------
    path : str
        Dotted location of the offending field, e.g. ``sojourn.r_schedule``.
    """

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
