"""Exception hierarchy and error-to-exit-status mapping for the toolkit"""
from typing import Optional

from config import ConfigurationError
from utils.logger import get_logger

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_VIOLATION = 2


class CoherenceError(Exception):
    """Base exception for every error raised by the toolkit"""
    pass


class ValidationError(CoherenceError):
    """Raised when an input violates a shape, dimension or type invariant"""
    pass


class NotPSDError(ValidationError):
    """Raised when a matrix expected to be positive semidefinite is not"""
    def __init__(self, eigenvalue: float, context: str = "matrix"):
        self.eigenvalue = eigenvalue
        super().__init__(
            f"{context} is not positive semidefinite: eigenvalue {eigenvalue:.3e} "
            f"is below the clamping window"
        )


class ConvergenceError(CoherenceError):
    """Raised when the Jacobi eigensolver exhausts its sweep budget"""
    def __init__(self, off_diagonal_norm: float, sweeps: int):
        self.off_diagonal_norm = off_diagonal_norm
        self.sweeps = sweeps
        super().__init__(
            f"Jacobi eigensolver did not converge after {sweeps} sweeps "
            f"(off-diagonal norm {off_diagonal_norm:.3e})"
        )


class IncommensurateSpectrumError(ValidationError):
    """Raised when the spectral gaps of A_S admit no common lattice spacing"""
    def __init__(self, gap: float, reference_gap: float, ratio: float):
        self.gap = gap
        self.reference_gap = reference_gap
        self.ratio = ratio
        super().__init__(
            f"Spectral gap {gap:.12g} is incommensurate with gap {reference_gap:.12g} "
            f"(ratio {ratio:.12g} has no admissible rational reconstruction)"
        )


class OutOfDomainError(ValidationError):
    """Raised when a bound is evaluated outside the range its lemma covers"""
    pass


class ModelFileError(ValidationError):
    """Raised when a model-definition file is malformed"""
    pass


class UnknownSuiteError(ValidationError):
    """Raised when a verification suite name is not registered"""
    def __init__(self, name: str, known):
        self.name = name
        super().__init__(f"Unknown suite '{name}'. Known suites: {', '.join(sorted(known))}")


def handle_cli_error(error: BaseException) -> Optional[int]:
    """
    Convert an exception raised while running a command into an exit status.

    Args:
        error: The exception raised by a command

    Returns:
        Exit status for known errors, or None if the error is not ours
    """
    if isinstance(error, (ValidationError, ConfigurationError)):
        return EXIT_VALIDATION
    elif isinstance(error, CoherenceError):
        logger.debug(f"Treating {type(error).__name__} as a validation failure")
        return EXIT_VALIDATION
    elif isinstance(error, OSError):
        return EXIT_VALIDATION
    else:
        return None
