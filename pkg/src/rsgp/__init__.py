"""Robust satisficing Gaussian-process bandits under adversarial input perturbations."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigError,
    DegenerateGeometryError,
    InfeasibleConeError,
    InvalidArgumentError,
    NumericDegeneracyError,
    ResourceLimitError,
    RsgpError,
    VerificationError,
)

__all__ = [
    "__version__",
    "ConfigError",
    "DegenerateGeometryError",
    "InfeasibleConeError",
    "InvalidArgumentError",
    "NumericDegeneracyError",
    "ResourceLimitError",
    "RsgpError",
    "VerificationError",
]
