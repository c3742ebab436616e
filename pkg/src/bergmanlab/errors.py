"""Exception types shared by every module."""


class BergmanLabError(Exception):
    """Base class for all errors raised by the package."""


class InvalidInput(BergmanLabError, ValueError):
    """An argument lies outside the documented domain of an operation."""


class NonConvergence(BergmanLabError, ArithmeticError):
    """A refinement or truncation budget ran out before the tolerance was met."""


class DivergentIntegral(BergmanLabError, ArithmeticError):
    """An integral was judged to be infinite (a mathematical verdict, not a numeric failure)."""


class NotFound(BergmanLabError, LookupError):
    """A searched-for quantity (e.g. a sign onset) does not exist on the sampled grid."""


class IllConditioned(BergmanLabError, ArithmeticError):
    """A Gram matrix is too ill-conditioned, or not positive definite in floating point."""
