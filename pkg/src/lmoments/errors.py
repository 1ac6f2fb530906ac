"""Exception hierarchy shared by every module."""


class LMomentsError(Exception):
    """Base class for all errors raised by the package."""


class InvalidInput(LMomentsError, ValueError):
    """A documented precondition was violated."""


class NoPrimitiveCharacters(InvalidInput):
    """Raised for moduli q = 2 (mod 4), which carry no primitive characters."""


class PoleError(LMomentsError, ArithmeticError):
    """Evaluation requested at a pole."""


class ShiftDegeneracy(PoleError):
    """Shift combination collides with a zeta pole in the main term."""


class NumericalInstability(LMomentsError, ArithmeticError):
    """An internal error estimate exceeded its acceptance threshold."""


class BudgetExceeded(InvalidInput):
    """Requested work exceeds the configured budget; raised before any work starts."""
