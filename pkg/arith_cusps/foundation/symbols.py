"""
Places of Q and local symbols.

A Place is a prime p or the real place (printed "inf"). The Hilbert symbol
(a, b)_v is evaluated in closed form:

    odd p:  (-1)^(alpha*beta*(p-1)/2) * (u|p)^beta * (w|p)^alpha
    p = 2:  (-1)^(eps(u)eps(w) + alpha*omega(w) + beta*omega(u))
    inf:    -1 exactly when a < 0 and b < 0

where a = p^alpha * u, b = p^beta * w with u, w units,
eps(x) = (x - 1)/2 and omega(x) = (x^2 - 1)/8 taken mod 2 on units reduced mod 8.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from typing import FrozenSet, Iterable, Optional, Union

from sympy import isprime
from sympy.ntheory import legendre_symbol

from arith_cusps.errors import ParseError, ZeroInput
from arith_cusps.foundation.rational import (
    RationalLike,
    SquareClass,
    as_rational,
    factor,
    unit_part,
    valuation,
)


@total_ordering
@dataclass(frozen=True)
class Place:
    """A place of Q. `prime` is None for the real place."""

    prime: Optional[int] = None

    def __post_init__(self):
        if self.prime is not None and not isprime(self.prime):
            raise ParseError(f"Place must be a prime or infinity, got {self.prime}")

    @property
    def is_infinite(self) -> bool:
        return self.prime is None

    @classmethod
    def parse(cls, text: str) -> "Place":
        text = text.strip().lower()
        if text in ("inf", "infinity", "oo"):
            return INFINITY
        try:
            return cls(int(text))
        except ValueError:
            raise ParseError(f"Malformed place: {text!r}", {"text": text})

    def _key(self):
        return (1, 0) if self.prime is None else (0, self.prime)

    def __lt__(self, other: "Place") -> bool:
        return self._key() < other._key()

    def __str__(self) -> str:
        return "inf" if self.prime is None else str(self.prime)


INFINITY = Place()
PlaceLike = Union[Place, int]


def as_place(v: PlaceLike) -> Place:
    return v if isinstance(v, Place) else Place(v)


def _as_value(a) -> Fraction:
    if isinstance(a, SquareClass):
        return a.as_rational()
    return as_rational(a)


def _legendre_unit(u: Fraction, p: int) -> int:
    # (n/d | p) = (n | p)(d | p) for a p-adic unit n/d.
    return legendre_symbol(u.numerator % p, p) * legendre_symbol(u.denominator % p, p)


def _mod8(u: Fraction) -> int:
    # Odd squares are 1 mod 8, so d^-1 = d mod 8.
    return (u.numerator * u.denominator) % 8


def hilbert_symbol(a, b, v: PlaceLike) -> int:
    """(a, b)_v in {+1, -1} for nonzero rationals a, b."""
    a, b, v = _as_value(a), _as_value(b), as_place(v)
    if a == 0 or b == 0:
        raise ZeroInput("Hilbert symbol of zero")
    if v.is_infinite:
        return -1 if a < 0 and b < 0 else 1
    p = v.prime
    alpha, beta = valuation(a, p), valuation(b, p)
    u, w = unit_part(a, p), unit_part(b, p)
    if p != 2:
        sign = -1 if (alpha * beta * (p - 1) // 2) % 2 else 1
        if beta % 2:
            sign *= _legendre_unit(u, p)
        if alpha % 2:
            sign *= _legendre_unit(w, p)
        return sign
    u8, w8 = _mod8(u), _mod8(w)
    eps_u, eps_w = (u8 - 1) // 2 % 2, (w8 - 1) // 2 % 2
    omega_u, omega_w = (u8 * u8 - 1) // 8 % 2, (w8 * w8 - 1) // 8 % 2
    exponent = eps_u * eps_w + alpha * omega_w + beta * omega_u
    return -1 if exponent % 2 else 1


def is_square_local(a, v: PlaceLike) -> bool:
    """Is the nonzero rational a a square in Q_v."""
    a, v = _as_value(a), as_place(v)
    if a == 0:
        raise ZeroInput("Zero is not a local unit")
    if v.is_infinite:
        return a > 0
    p = v.prime
    if valuation(a, p) % 2:
        return False
    u = unit_part(a, p)
    if p == 2:
        return _mod8(u) == 1
    return _legendre_unit(u, p) == 1


def support_places(values: Iterable) -> FrozenSet[Place]:
    """{inf, 2} together with every prime dividing a numerator or denominator."""
    places = {INFINITY, Place(2)}
    for value in values:
        places.update(Place(p) for p in factor(_as_value(value)).primes)
    return frozenset(places)


def symbol_support(a, b) -> FrozenSet[Place]:
    """Places outside this set have (a, b)_v = 1."""
    return support_places((a, b))


def hasse_profile(a, b) -> FrozenSet[Place]:
    """Places where (a, b)_v = -1; always of even size."""
    return frozenset(v for v in symbol_support(a, b) if hilbert_symbol(a, b, v) == -1)


def format_places(places: Iterable[Place]) -> list:
    return [str(v) for v in sorted(places)]


def parse_places(text: str) -> FrozenSet[Place]:
    """Comma separated places; empty text is the empty set."""
    items = [item for item in text.split(",") if item.strip()]
    return frozenset(Place.parse(item) for item in items)
