"""
Quadratic forms over Q: invariants, deciders and constructive solvers.
"""

from .qform import DiagonalForm, FormInvariants, GramMatrix, invariants, is_equivalent, is_proj_equivalent
from .builder import SearchBudget, HilbertTarget, find_positive_scalar, realize_form

__all__ = [
    "DiagonalForm", "FormInvariants", "GramMatrix", "invariants", "is_equivalent", "is_proj_equivalent",
    "SearchBudget", "HilbertTarget", "find_positive_scalar", "realize_form",
]
