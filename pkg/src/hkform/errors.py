"""Exception hierarchy shared by all modules."""


class HeatKernelError(Exception):
    """Base class for every error raised by hkform."""


class DomainError(HeatKernelError, ValueError):
    pass


class ConvergenceError(HeatKernelError, ArithmeticError):
    pass


class UnsupportedOrder(HeatKernelError, ValueError):
    pass


class SingularGram(HeatKernelError, ArithmeticError):
    pass


class UnsupportedArity(HeatKernelError, ValueError):
    pass


class UnsupportedKinematics(HeatKernelError, ValueError):
    pass


class UnsupportedRank(HeatKernelError, ValueError):
    pass


class SingularSystem(HeatKernelError, ArithmeticError):
    pass


class DivergentIntegral(HeatKernelError, ArithmeticError):
    pass


class DimensionMismatch(HeatKernelError, ValueError):
    pass


class EigensolveFailure(HeatKernelError, ArithmeticError):
    pass


class PoleOutsideContour(HeatKernelError, ValueError):
    pass


class ContourOverflow(HeatKernelError, OverflowError):
    pass


class FieldDataError(HeatKernelError, ValueError):
    """Malformed or non-real field configuration."""
