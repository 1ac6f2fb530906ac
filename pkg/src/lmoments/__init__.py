"""Evaluators and numerical checks for moments of Dirichlet L-functions."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    BudgetExceeded,
    InvalidInput,
    LMomentsError,
    NoPrimitiveCharacters,
    NumericalInstability,
    PoleError,
    ShiftDegeneracy,
)
from .arith import Factorization, factorize  # noqa: E402
from .special import PrecisionConfig, ShiftTuple  # noqa: E402

__all__ = [
    "BudgetExceeded",
    "Factorization",
    "InvalidInput",
    "LMomentsError",
    "NoPrimitiveCharacters",
    "NumericalInstability",
    "PoleError",
    "PrecisionConfig",
    "ShiftDegeneracy",
    "ShiftTuple",
    "factorize",
]
