"""
Exact rationals, budgeted factorization and square classes.

Every other module works on `fractions.Fraction` values; this module owns
the prime-level view of them:

    factor(Fraction(-12))        -> Factorization(sign=-1, exponents=((2, 2), (3, 1)))
    square_class(Fraction(18))   -> SquareClass(2)
    valuation(Fraction(5, 8), 2) -> -3

Integer factorization is trial division up to the configured bound followed
by Pollard rho with a step cap. Inputs that survive both stages raise
BudgetExceeded instead of hanging.
"""

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import prod
from typing import Dict, Iterator, Tuple, Union

from loguru import logger
from sympy import isprime
from sympy.ntheory import pollard_rho

from arith_cusps.config import settings
from arith_cusps.errors import BudgetExceeded, ParseError, ZeroInput

Rational = Fraction
RationalLike = Union[Fraction, int, str]

_RATIONAL_RE = re.compile(r"^\s*[+-]?\d+\s*(/\s*\d+\s*)?$")


def as_rational(value: RationalLike) -> Fraction:
    """Coerce ints, Fractions and "n/d" strings to a reduced Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rational(value)
    raise ParseError(f"Cannot interpret {value!r} as a rational", {"value": repr(value)})


def parse_rational(text: str) -> Fraction:
    """Parse "n" or "n/d" (denominator nonzero)."""
    if not _RATIONAL_RE.match(text):
        raise ParseError(f"Malformed rational: {text!r}", {"text": text})
    try:
        return Fraction(text.replace(" ", ""))
    except ZeroDivisionError:
        raise ParseError(f"Zero denominator in {text!r}", {"text": text})


def format_rational(r: Fraction) -> str:
    """Inverse of parse_rational: "n/d", or "n" when the denominator is 1."""
    return str(Fraction(r))


def _require_nonzero(r: Fraction) -> Fraction:
    r = as_rational(r)
    if r == 0:
        raise ZeroInput("Zero has no factorization, valuation or square class")
    return r


# ---------------------------------------------------------------------------
# Integer factorization
# ---------------------------------------------------------------------------

def _small_primes(bound: int) -> Iterator[int]:
    yield 2
    candidate = 3
    while candidate <= bound:
        yield candidate
        candidate += 2  # odd composites never divide once their factors are removed


def _split_composite(n: int, exponents: Dict[int, int]) -> None:
    """Pollard rho on a cofactor with no prime below the trial bound."""
    if isprime(n):
        exponents[n] = exponents.get(n, 0) + 1
        return
    divisor = pollard_rho(n, retries=settings.RHO_RETRIES, max_steps=settings.RHO_MAX_STEPS)
    if divisor is None or divisor in (1, n):
        logger.warning(f"Pollard rho gave up on a {n.bit_length()}-bit cofactor")
        raise BudgetExceeded(
            "Factorization budget exhausted",
            {"cofactor": str(n), "rho_max_steps": settings.RHO_MAX_STEPS},
        )
    _split_composite(divisor, exponents)
    _split_composite(n // divisor, exponents)


@lru_cache(maxsize=4096)
def factor_integer(n: int) -> Tuple[Tuple[int, int], ...]:
    """Prime factorization of a positive integer as sorted (prime, exponent) pairs."""
    if n <= 0:
        raise ZeroInput(f"factor_integer needs a positive integer, got {n}")
    exponents: Dict[int, int] = {}
    remaining = n
    for p in _small_primes(settings.TRIAL_DIVISION_BOUND):
        if p * p > remaining:
            break
        while remaining % p == 0:
            exponents[p] = exponents.get(p, 0) + 1
            remaining //= p
    if remaining > 1:
        if remaining <= settings.TRIAL_DIVISION_BOUND ** 2:
            # Survived trial division past its square root: prime.
            exponents[remaining] = exponents.get(remaining, 0) + 1
        else:
            _split_composite(remaining, exponents)
    return tuple(sorted(exponents.items()))


# ---------------------------------------------------------------------------
# Factorization / SquareClass
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Factorization:
    """sign * prod(p ** e), primes strictly increasing, exponents nonzero."""

    sign: int
    exponents: Tuple[Tuple[int, int], ...]

    @property
    def primes(self) -> Tuple[int, ...]:
        return tuple(p for p, _ in self.exponents)

    def as_dict(self) -> Dict[int, int]:
        return dict(self.exponents)

    def value(self) -> Fraction:
        result = Fraction(self.sign)
        for p, e in self.exponents:
            result *= Fraction(p) ** e
        return result


def factor(r: RationalLike) -> Factorization:
    r = _require_nonzero(r)
    exponents: Dict[int, int] = {}
    if abs(r.numerator) > 1:
        exponents.update(factor_integer(abs(r.numerator)))
    if r.denominator > 1:
        for p, e in factor_integer(r.denominator):
            exponents[p] = -e
    return Factorization(sign=1 if r > 0 else -1, exponents=tuple(sorted(exponents.items())))


@dataclass(frozen=True, order=True)
class SquareClass:
    """An element of Q^x / (Q^x)^2 held as its signed squarefree representative."""

    representative: int

    def __post_init__(self):
        if self.representative == 0:
            raise ZeroInput("The zero rational has no square class")

    @classmethod
    def of(cls, r: RationalLike) -> "SquareClass":
        return square_class(r)

    @property
    def sign(self) -> int:
        return 1 if self.representative > 0 else -1

    @property
    def primes(self) -> Tuple[int, ...]:
        if abs(self.representative) == 1:
            return ()
        return tuple(p for p, _ in factor_integer(abs(self.representative)))

    def is_square(self) -> bool:
        return self.representative == 1

    def __mul__(self, other: "SquareClass") -> "SquareClass":
        # Representatives are squarefree, so the product only needs the gcd squared out.
        return square_class(Fraction(self.representative * other.representative))

    def __neg__(self) -> "SquareClass":
        return SquareClass(-self.representative)

    def as_rational(self) -> Fraction:
        return Fraction(self.representative)

    def __str__(self) -> str:
        return str(self.representative)


def square_class(r: RationalLike) -> SquareClass:
    f = factor(r)
    odd = [p for p, e in f.exponents if e % 2]
    return SquareClass(f.sign * prod(odd))


# ---------------------------------------------------------------------------
# p-adic valuation
# ---------------------------------------------------------------------------

def _int_valuation(n: int, p: int) -> int:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def valuation(r: RationalLike, p: int) -> int:
    r = _require_nonzero(r)
    return _int_valuation(abs(r.numerator), p) - _int_valuation(r.denominator, p)


def unit_part(r: RationalLike, p: int) -> Fraction:
    """r / p**valuation(r, p); a p-adic unit."""
    r = _require_nonzero(r)
    return r / Fraction(p) ** valuation(r, p)
