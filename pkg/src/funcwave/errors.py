"""Exception hierarchy for funcwave."""


class FuncWaveError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParams(FuncWaveError, ValueError):
    pass


class UnknownKind(FuncWaveError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "unknown kind"


class OutOfDomain(FuncWaveError, ValueError):
    pass


class NonDifferentiable(FuncWaveError, ValueError):
    """Raised when asking for the slope class at a registered kink."""


class NotInvertible(FuncWaveError, ValueError):
    pass


class IterationCapExceeded(FuncWaveError, RuntimeError):
    pass


class SeedJumpMismatch(FuncWaveError, ValueError):
    pass


class InvolutionObstruction(FuncWaveError, ValueError):
    """An Abel equation with nonzero flux over a map of finite order has no solution."""


class NotPositive(FuncWaveError, ValueError):
    pass


class ScaleIsOne(FuncWaveError, ValueError):
    pass


class NotSchroderSolution(FuncWaveError, ValueError):
    pass


class PeriodMismatch(FuncWaveError, ValueError):
    pass


class InvalidModeNumbers(FuncWaveError, ValueError):
    pass


class NotInvolution(FuncWaveError, ValueError):
    pass


class NotCyclicInvariant(FuncWaveError, ValueError):
    pass


class OutOfExtensionDomain(FuncWaveError, ValueError):
    pass
