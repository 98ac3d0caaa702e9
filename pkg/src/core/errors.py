from src.core.constants import Constants


class RecycleGANError(Exception):
    """Base class for every error the package raises on purpose."""

    exit_code: int = Constants.EXIT_VALIDATION


class ConfigError(RecycleGANError, ValueError):
    pass


class ShapeError(RecycleGANError, ValueError):
    pass


class DataError(RecycleGANError, ValueError):
    pass


class CheckpointError(RecycleGANError):
    pass


class NumericalError(RecycleGANError, ArithmeticError):
    """Non-finite values or divergence."""

    exit_code = Constants.EXIT_NUMERICAL


class DivergenceError(NumericalError):
    """Training produced a non-finite loss; carries the last finite report."""

    def __init__(self, message: str, step: int = -1, last_report=None):
        super().__init__(message)
        self.step = step
        self.last_report = last_report


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, RecycleGANError):
        return exc.exit_code
    return Constants.EXIT_VALIDATION
