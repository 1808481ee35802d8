"""Configuration loader and validator for the coherence-cost toolkit"""
import os
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()


class ConfigurationError(Exception):
    """Raised when configuration is invalid or missing"""
    pass


def _int(name: str, default: int):
    raw = os.getenv(name)
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError:
        return raw


def _float(name: str, default: float):
    raw = os.getenv(name)
    if raw is None or raw == "":
        return default
    try:
        return float(raw)
    except ValueError:
        return raw


class Config:
    """Configuration class for numerical and CLI settings"""

    LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
    LOG_JSON = bool(os.getenv("CC_LOG_JSON"))

    # Default seed for randomized suites and optimizer starts
    SEED = _int("CC_SEED", 42)

    # Eigensolver selection: jacobi | lapack | auto
    EIGEN_METHOD = os.getenv("CC_EIGEN_METHOD", "auto")
    JACOBI_MAX_DIM = _int("CC_JACOBI_MAX_DIM", 64)

    # Pointer lattice and worst-case search
    TAIL_BOUND = _float("CC_TAIL_BOUND", 1e-12)
    OPTIMIZER_STARTS = _int("CC_OPTIMIZER_STARTS", 8)
    OPTIMIZER_MAX_ITER = _int("CC_OPTIMIZER_MAX_ITER", 500)
    RANDOM_PROBES = _int("CC_RANDOM_PROBES", 32)

    # Verification slack
    SLACK = _float("CC_SLACK", 1e-8)

    @classmethod
    def validate(cls):
        """
        Validate that all configuration values are well-formed.
        Raises ConfigurationError if any value is invalid.
        """
        errors = []

        if cls.LOG_LEVEL.upper() not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            errors.append(f"LOG_LEVEL must be a standard level name, got '{cls.LOG_LEVEL}'")

        if not isinstance(cls.SEED, int) or cls.SEED < 0:
            errors.append(f"CC_SEED must be a non-negative integer, got '{cls.SEED}'")

        if cls.EIGEN_METHOD not in ("auto", "jacobi", "lapack"):
            errors.append(f"CC_EIGEN_METHOD must be auto, jacobi or lapack, got '{cls.EIGEN_METHOD}'")

        for name in ("JACOBI_MAX_DIM", "OPTIMIZER_STARTS", "OPTIMIZER_MAX_ITER"):
            value = getattr(cls, name)
            if not isinstance(value, int) or value < 1:
                errors.append(f"CC_{name} must be a positive integer, got '{value}'")

        if not isinstance(cls.RANDOM_PROBES, int) or cls.RANDOM_PROBES < 0:
            errors.append(f"CC_RANDOM_PROBES must be a non-negative integer, got '{cls.RANDOM_PROBES}'")

        for name in ("TAIL_BOUND", "SLACK"):
            value = getattr(cls, name)
            if not isinstance(value, float) or not value > 0:
                errors.append(f"CC_{name} must be a positive number, got '{value}'")

        if errors:
            error_message = "Configuration validation failed:\n" + "\n".join(f"  - {err}" for err in errors)
            raise ConfigurationError(error_message)

    @classmethod
    def get_all(cls):
        """Return all configuration values as a dictionary"""
        return {
            "LOG_LEVEL": cls.LOG_LEVEL,
            "CC_LOG_JSON": cls.LOG_JSON,
            "CC_SEED": cls.SEED,
            "CC_EIGEN_METHOD": cls.EIGEN_METHOD,
            "CC_JACOBI_MAX_DIM": cls.JACOBI_MAX_DIM,
            "CC_TAIL_BOUND": cls.TAIL_BOUND,
            "CC_OPTIMIZER_STARTS": cls.OPTIMIZER_STARTS,
            "CC_OPTIMIZER_MAX_ITER": cls.OPTIMIZER_MAX_ITER,
            "CC_RANDOM_PROBES": cls.RANDOM_PROBES,
            "CC_SLACK": cls.SLACK,
        }
