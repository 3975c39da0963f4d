# tests/test_symbols.py
from fractions import Fraction

import pytest

from arith_cusps.errors import ParseError, ZeroInput
from arith_cusps.foundation.rational import SquareClass
from arith_cusps.foundation.symbols import (
    INFINITY,
    Place,
    format_places,
    hasse_profile,
    hilbert_symbol,
    is_square_local,
    parse_places,
    support_places,
    symbol_support,
)

PRIMES = (2, 3, 5, 7, 11, 13)


# ---------------------------------------------------------------------------
# Brute-force oracle
# ---------------------------------------------------------------------------

def _int_valuation(n: int, p: int) -> int:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def _reduce(r: Fraction, p: int) -> int:
    """An integer in the same p-adic square class: n*d with p^2 stripped."""
    n = r.numerator * r.denominator
    while n % (p * p) == 0:
        n //= p * p
    return n


def _is_square_padic(n: int, p: int) -> bool:
    v = _int_valuation(n, p)
    if v % 2:
        return False
    u = n // p ** v
    if p == 2:
        return u % 8 == 1
    return pow(u % p, (p - 1) // 2, p) == 1


def oracle_symbol(a, b, p: int) -> int:
    """
    (a, b)_p = 1 iff <a, b> represents a nonzero p-adic square. Isotropic
    forms represent everything; anisotropic ones take values of valuation at
    most 1 (odd p) or 3 (p = 2) on primitive vectors, so squares show up mod p
    or mod 32 on the projective line.
    """
    a, b = _reduce(Fraction(a), p), _reduce(Fraction(b), p)
    if _is_square_padic(-a * b, p):
        return 1
    k = 5 if p == 2 else 1
    m = p ** k
    candidates = [(1, y) for y in range(m)] + [(x, 1) for x in range(0, m, p)]
    for x, y in candidates:
        w = a * x * x + b * y * y
        if w == 0:
            continue
        v = _int_valuation(abs(w), p)
        if v > 2 or (p != 2 and v > 0):
            continue
        if _is_square_padic(w, p):
            return 1
    return -1


def _grid(p: int):
    base = list(range(1, 11)) + [p, 2 * p]
    return [s * x for x in base for s in (1, -1)]


# ---------------------------------------------------------------------------
# Tests
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("p", PRIMES)
def test_hilbert_symbol_matches_oracle(p):
    values = _grid(p)
    mismatches = [
        (a, b) for a in values for b in values if hilbert_symbol(a, b, p) != oracle_symbol(a, b, p)
    ]
    assert mismatches == [], f"closed form disagrees with brute force at p={p}: {mismatches[:5]}"


def test_hilbert_symbol_known_values():
    assert hilbert_symbol(-1, -1, 2) == -1
    assert hilbert_symbol(-1, -1, INFINITY) == -1
    assert hilbert_symbol(-1, -1, 3) == 1
    assert hilbert_symbol(2, 3, 3) == -1
    assert hilbert_symbol(-1, 3, 3) == -1
    assert hilbert_symbol(-1, 5, 5) == 1
    assert hilbert_symbol(Fraction(1, 3), 5, 3) == -1
    assert hilbert_symbol(SquareClass(-3), 2, 2) == -1


def test_hilbert_symbol_of_zero_raises():
    with pytest.raises(ZeroInput):
        hilbert_symbol(0, 3, 2)
    with pytest.raises(ZeroInput):
        is_square_local(0, 5)


def _random_rational(rng) -> Fraction:
    return Fraction(rng.choice([-1, 1]) * rng.randint(1, 2000), rng.randint(1, 300))


def test_product_formula(rng):
    for _ in range(1000):
        a, b = _random_rational(rng), _random_rational(rng)
        product = 1
        for v in support_places((a, b)):
            product *= hilbert_symbol(a, b, v)
        assert product == 1, f"product formula fails for ({a}, {b})"
        assert len(hasse_profile(a, b)) % 2 == 0


def test_bimultiplicative_and_symmetric(rng):
    for _ in range(200):
        a, b, c = (_random_rational(rng) for _ in range(3))
        for v in support_places((a, b, c)):
            assert hilbert_symbol(a, b * c, v) == hilbert_symbol(a, b, v) * hilbert_symbol(a, c, v)
            assert hilbert_symbol(a, b, v) == hilbert_symbol(b, a, v)
            assert hilbert_symbol(a, -a, v) == 1
            if a != 1:
                assert hilbert_symbol(a, 1 - a, v) == 1


def test_symbol_trivial_off_support(rng):
    for _ in range(50):
        a, b = _random_rational(rng), _random_rational(rng)
        support = symbol_support(a, b)
        for p in (17, 19, 23, 29, 31, 37, 41, 43, 47):
            if Place(p) not in support:
                assert hilbert_symbol(a, b, p) == 1


@pytest.mark.parametrize("p", PRIMES)
def test_is_square_local_matches_oracle(p):
    for n in _grid(p) + [p * p * 3, 4 * 17, -7 * 4]:
        assert is_square_local(n, p) == _is_square_padic(_reduce(Fraction(n), p), p), n


def test_is_square_local_examples():
    assert is_square_local(-7, 2)
    assert not is_square_local(3, 2)
    assert is_square_local(-1, 5)
    assert not is_square_local(-1, 3)
    assert is_square_local(Fraction(4, 9), INFINITY)
    assert not is_square_local(-2, INFINITY)


def test_places_order_and_parse():
    places = parse_places("13, inf, 2,3")
    assert format_places(places) == ["2", "3", "13", "inf"]
    assert Place(2) < Place(3) < INFINITY
    assert parse_places("") == frozenset()
    with pytest.raises(ParseError):
        Place.parse("x")
    with pytest.raises(ParseError):
        Place(4)


def test_hasse_profile():
    assert hasse_profile(-1, -1) == {Place(2), INFINITY}
    assert hasse_profile(2, 3) == {Place(2), Place(3)}
    assert hasse_profile(1, 7) == frozenset()


def test_symbol_support_lists_bad_places():
    assert symbol_support(3, Fraction(10, 7)) == {INFINITY, Place(2), Place(3), Place(5), Place(7)}
    assert symbol_support(1, 1) == {INFINITY, Place(2)}


def test_symbol_with_a_square_is_trivial(rng):
    for _ in range(300):
        a, b = _random_rational(rng), _random_rational(rng)
        for v in support_places((a, b)) | {Place(p) for p in PRIMES}:
            assert hilbert_symbol(a * a, b, v) == 1, (a, b, v)
