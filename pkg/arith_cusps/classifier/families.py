"""
Parametric families of flat manifolds and the discriminants they force.

A family is described by the holonomy of its members and the dimensions they
live in. For (C_p)^k with b1 = 0 the discriminant of any admitting class is
pinned down by n mod 2(p-1); a product B1 x B2 of manifolds forcing d1 and d2
forces -d1*d2. Two families whose admissible sets are disjoint can never be
cusp cross-sections of the same arithmetic manifold.

Usage:
    b = CyclicPowerFamily(5, 28, fixed_dim=28)
    d = CyclicPowerFamily(3, 8)
    admissible_discriminants(ProductFamily((b, d)))        # {-5, -15}
    incompatible_pair(CyclicPowerFamily(3, 4), ProductFamily((b, d)), 36)   # True
"""

from dataclasses import dataclass
from typing import FrozenSet, Iterable, Iterator, Optional, Tuple, Union

from loguru import logger
from sympy import isprime

from arith_cusps.errors import BadParameters, ParseError, UnsupportedFamily
from arith_cusps.foundation.rational import SquareClass
from arith_cusps.forms.qform import FormInvariants
from arith_cusps.classifier.cusps import (
    Outcome,
    Verdict,
    c3k_b1zero_classify,
    cpk_b1zero_disc_obstruction,
    cyclic_family_discriminant,
)


def cyclic_family_discriminants(p: int, n: Optional[int] = None) -> FrozenSet[SquareClass]:
    """Discriminants forced by (C_p)^k, b1 = 0, in dimension n (all dimensions when n is None)."""
    if n is not None:
        return frozenset({cyclic_family_discriminant(p, n)})
    if p < 3 or not isprime(p):
        raise BadParameters(f"{p} is not an odd prime", {"p": p})
    return frozenset({SquareClass(-1), SquareClass(-p)})


def product_discriminants(first: Iterable[SquareClass], second: Iterable[SquareClass]) -> FrozenSet[SquareClass]:
    """-d1*d2 over all pairs: the discriminants forced by a product B1 x B2."""
    second = tuple(second)
    return frozenset(-(d1 * d2) for d1 in first for d2 in second)


@dataclass(frozen=True)
class CyclicPowerFamily:
    """Flat manifolds with holonomy (C_p)^k and b1 = 0 in dimensions n >= min_dim, (p-1) | n."""

    p: int
    min_dim: int
    fixed_dim: Optional[int] = None

    def __post_init__(self):
        if self.p < 3 or not isprime(self.p):
            raise UnsupportedFamily(f"{self.p} is not an odd prime", {"p": self.p})
        if self.min_dim < 1 or self.min_dim % (self.p - 1):
            raise UnsupportedFamily(
                "Minimal dimension must be a positive multiple of p - 1",
                {"p": self.p, "min_dim": self.min_dim},
            )
        if self.fixed_dim is not None and (self.fixed_dim < self.min_dim or self.fixed_dim % (self.p - 1)):
            raise UnsupportedFamily("Fixed dimension is not admissible", {"fixed_dim": self.fixed_dim})

    @property
    def label(self) -> str:
        parts = ["cyclic", str(self.p), str(self.min_dim)]
        if self.fixed_dim is not None:
            parts.append(str(self.fixed_dim))
        return ":".join(parts)

    def admits(self, n: int) -> bool:
        if self.fixed_dim is not None:
            return n == self.fixed_dim
        return n >= self.min_dim and n % (self.p - 1) == 0

    def dimensions(self, bound: int) -> Iterator[int]:
        """Admissible dimensions up to bound, increasing."""
        if self.fixed_dim is not None:
            if self.fixed_dim <= bound:
                yield self.fixed_dim
            return
        yield from range(self.min_dim, bound + 1, self.p - 1)

    def discriminants(self, n: Optional[int] = None) -> FrozenSet[SquareClass]:
        if n is None:
            if self.fixed_dim is not None:
                return cyclic_family_discriminants(self.p, self.fixed_dim)
            # Both parities of n / (p - 1) occur above min_dim.
            return cyclic_family_discriminants(self.p)
        return cyclic_family_discriminants(self.p, n)


@dataclass(frozen=True)
class ProductFamily:
    """Products B1 x ... x Bk with each Bi drawn from the matching part."""

    parts: Tuple["Family", ...]

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))
        if len(self.parts) < 2:
            raise UnsupportedFamily("A product family needs at least two parts")

    @property
    def label(self) -> str:
        return "*".join(part.label for part in self.parts)

    @property
    def min_dim(self) -> int:
        return sum(part.min_dim for part in self.parts)

    def splits(self, n: int) -> Iterator[Tuple[int, ...]]:
        """Dimension vectors (n_1, ..., n_k) summing to n with n_i admissible for part i."""

        def walk(index: int, remaining: int) -> Iterator[Tuple[int, ...]]:
            if index == len(self.parts) - 1:
                if self.parts[index].admits(remaining):
                    yield (remaining,)
                return
            rest = sum(part.min_dim for part in self.parts[index + 1:])
            for m in self.parts[index].dimensions(remaining - rest):
                for tail in walk(index + 1, remaining - m):
                    yield (m,) + tail

        return walk(0, n)

    def admits(self, n: int) -> bool:
        return next(self.splits(n), None) is not None

    def dimensions(self, bound: int) -> Iterator[int]:
        return (n for n in range(self.min_dim, bound + 1) if self.admits(n))

    def _fold(self, sets: Iterable[FrozenSet[SquareClass]]) -> FrozenSet[SquareClass]:
        sets = iter(sets)
        result = next(sets)
        for other in sets:
            result = product_discriminants(result, other)
        return result

    def discriminants(self, n: Optional[int] = None) -> FrozenSet[SquareClass]:
        if n is None:
            return self._fold(part.discriminants() for part in self.parts)
        result = frozenset()
        for split in self.splits(n):
            result |= self._fold(part.discriminants(m) for part, m in zip(self.parts, split))
        return result


Family = Union[CyclicPowerFamily, ProductFamily]


def admissible_discriminants(family: Family, n: Optional[int] = None) -> FrozenSet[SquareClass]:
    """Classes d(q) of the forms whose commensurability class can contain a member of family."""
    if n is not None and not family.admits(n):
        raise UnsupportedFamily(f"Family {family.label} has no member in dimension {n}", {"n": n})
    result = family.discriminants(n)
    logger.debug(f"Family {family.label} at n={n}: {sorted(str(d) for d in result)}")
    return result


def incompatible_pair(first: Family, second: Family, n: Optional[int] = None) -> bool:
    """True when no single class can hold members of both families."""
    return not (admissible_discriminants(first, n) & admissible_discriminants(second, n))


def family_verdict(family: Family, n: int, q: FormInvariants) -> Verdict:
    """Verdict for a form q of signature (n+1, 1) against a family."""
    if not family.admits(n):
        raise UnsupportedFamily(f"Family {family.label} has no member in dimension {n}", {"n": n})
    if isinstance(family, CyclicPowerFamily):
        if family.p == 3:
            return c3k_b1zero_classify(n, q)
        return cpk_b1zero_disc_obstruction(family.p, n, q)
    admissible = admissible_discriminants(family, n)
    shown = ", ".join(sorted(str(d) for d in admissible))
    if q.discriminant not in admissible:
        return Verdict(Outcome.DOES_NOT_APPEAR, (f"d(q) = {q.discriminant} is not among {shown}",))
    return Verdict(Outcome.NOT_OBSTRUCTED, (f"d(q) = {q.discriminant} is among {shown}",))


def parse_family(text: str) -> Family:
    """
    "cyclic:p:min_dim[:fixed_dim]", or several joined with "*" for a product:

        parse_family("cyclic:5:28:28*cyclic:3:8")
    """
    pieces = [piece.strip() for piece in text.split("*") if piece.strip()]
    if not pieces:
        raise ParseError("Empty family description")
    parts = []
    for piece in pieces:
        fields = piece.split(":")
        if fields[0] != "cyclic" or len(fields) not in (3, 4):
            raise ParseError(f"Unrecognized family {piece!r}", {"text": piece})
        try:
            numbers = [int(x) for x in fields[1:]]
        except ValueError:
            raise ParseError(f"Non-integer family parameter in {piece!r}", {"text": piece})
        parts.append(CyclicPowerFamily(*numbers))
    if len(parts) == 1:
        return parts[0]
    return ProductFamily(tuple(parts))
