"""
Typed failures for every arithmetic operation.

Each error carries the name used on the command line and in JSON error
objects, so a failure deep in a constructive search surfaces unchanged:

    {"error": "BudgetExceeded", "message": "...", "details": {...}}
"""

from typing import Any, Dict, Optional


class ArithError(Exception):
    """Root of all domain errors raised by arith_cusps."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    @property
    def name(self) -> str:
        return type(self).__name__

    def to_dict(self) -> Dict[str, Any]:
        return {"error": self.name, "message": self.message, "details": self.details}


# --- Input validation ---

class ZeroInput(ArithError):
    """A zero rational was passed where a unit of Q is required."""


class ParseError(ArithError):
    """Malformed rational, form or matrix text."""


class ZeroEntry(ArithError):
    """A diagonal form has a zero entry."""


class NonPositiveScalar(ArithError):
    """Scaling factor must be a positive rational."""


class WrongDimension(ArithError):
    """Matrix or vector dimensions are inconsistent."""


class EmptyList(ArithError):
    """A nonempty list was required."""


# --- Matrices and forms ---

class Degenerate(ArithError):
    """The Gram matrix has zero determinant."""


class NotSymmetric(ArithError):
    """The Gram matrix is not symmetric."""


class Singular(ArithError):
    """Matrix is not invertible."""


class RankMismatch(ArithError):
    """Forms of different rank were compared."""


class WrongSignature(ArithError):
    """The form does not have the required signature."""


class NotIsotropic(ArithError):
    """Supplied vectors do not span a totally isotropic subspace."""


class NotIsometry(ArithError):
    """Matrix does not preserve the given form."""


# --- Constructive searches ---

class BudgetExceeded(ArithError):
    """A bounded search or factorization ran out of budget."""


class InvalidTarget(ArithError):
    """Prescribed invariants admit no solution."""


# --- Representations ---

class ClosureBudgetExceeded(ArithError):
    """Group closure exceeded the element cap."""


class NotOddPrime(ArithError):
    """An odd prime was required."""


class GeneratorCountMismatch(ArithError):
    """Representations are presented by different numbers of generators."""


# --- Classifier ---

class UnknownRecord(ArithError):
    """No flat manifold record with this id / dimension."""


class BadParameters(ArithError):
    """Family parameters outside the proven range."""


class UnsupportedFamily(ArithError):
    """Family descriptor not implemented at this dimension."""
