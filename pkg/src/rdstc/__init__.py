"""Randomized distributed space-time coding for two-hop AF cooperative MIMO links.

Link-level Monte Carlo simulation, joint MMSE reception, adaptive randomized
matrix optimization (ARMO) and pairwise-error-probability bounds.
"""

from rdstc.errors import (
    ConfigError,
    DivergenceError,
    InvalidInputError,
    RdstcError,
    SingularMatrixError,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DivergenceError",
    "InvalidInputError",
    "RdstcError",
    "SingularMatrixError",
    "__version__",
]
