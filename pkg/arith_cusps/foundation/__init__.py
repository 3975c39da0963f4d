# arith_cusps foundation layer
"""
Exact rationals, local symbols and matrix helpers shared by every other layer.
"""

from .rational import Factorization, SquareClass, factor, parse_rational, square_class, valuation
from .symbols import INFINITY, Place, hilbert_symbol, is_square_local

__all__ = [
    "Factorization", "SquareClass", "factor", "parse_rational", "square_class", "valuation",
    "INFINITY", "Place", "hilbert_symbol", "is_square_local",
]
