from typing import Optional


class IrsQrError(Exception):
    """Base class for every failure raised by the simulator packages."""


class DimensionError(IrsQrError, ValueError):
    pass


class SingularMatrixError(IrsQrError, ValueError):
    def __init__(self, message: str, condition: Optional[float] = None):
        super().__init__(message)
        self.condition = condition


class NonHermitianError(IrsQrError, ValueError):
    pass


class ConvergenceError(IrsQrError, RuntimeError):
    def __init__(self, message: str, iterations: int = 0, residual: float = float("nan")):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


class CapacityError(IrsQrError, ValueError):
    pass


class ConfigError(IrsQrError, ValueError):
    pass


class DecodeError(IrsQrError):
    """QR symbol or Reed-Solomon block could not be recovered."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason
