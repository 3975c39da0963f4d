# tests/test_builder.py
from fractions import Fraction

import pytest
from sympy import primerange

from arith_cusps.errors import BudgetExceeded, InvalidTarget
from arith_cusps.foundation.rational import SquareClass, square_class
from arith_cusps.foundation.symbols import INFINITY, Place, hasse_profile, hilbert_symbol, is_square_local, support_places
from arith_cusps.forms.builder import (
    HilbertTarget,
    SearchBudget,
    combine_three,
    decompose_into_three_odd,
    find_positive_scalar,
    find_scalar,
    realize_form,
    squarefree_products,
)
from arith_cusps.forms.qform import DiagonalForm, FormInvariants, invariants, is_equivalent

SMALL_PRIMES = list(primerange(2, 50))


def random_squarefree(rng, bound: int = 50) -> int:
    while True:
        d = rng.randint(2, bound)
        if square_class(d).representative == d:
            return d


def random_target_places(rng, d: SquareClass, max_size: int = 2):
    """An even set of primes below 50 at which d is not a local square."""
    allowed = [p for p in SMALL_PRIMES if not is_square_local(d, p)]
    size = rng.choice([k for k in range(0, max_size + 1, 2) if k <= len(allowed)])
    return frozenset(Place(p) for p in rng.sample(allowed, size))


def random_target(rng, rank: int) -> FormInvariants:
    s = rng.randint(0, rank)
    d = SquareClass((-1) ** s * random_squarefree(rng))
    finite = set(Place(p) for p in rng.sample(SMALL_PRIMES[:8], rng.choice([0, 2])))
    negative = set(finite)
    if (s * (s - 1) // 2) % 2:
        # eps_inf = -1 forces an odd number of finite places.
        negative ^= {Place(2)}
        negative.add(INFINITY)
    return FormInvariants(rank, (rank - s, s), d, frozenset(negative))


def test_squarefree_products_order():
    values = [v for v, _ in squarefree_products([2, 3, 5], 2)]
    assert values == [1, 2, 3, 5, 6, 10, 15]


def test_squarefree_products_masks():
    pairs = dict(squarefree_products([2, 3, 5], 3, masks=[1, 2, 4]))
    assert pairs[30] == 7
    assert pairs[10] == 5
    assert pairs[1] == 0


def test_find_scalar_examples():
    assert find_scalar(-1, {2, 3}) == 3
    c = find_scalar(-3, {2, 5})
    assert c > 0
    assert hasse_profile(-3, c) == {Place(2), Place(5)}


def test_find_scalar_with_infinity():
    c = find_scalar(-1, {INFINITY, 2})
    assert c < 0
    assert hasse_profile(-1, c) == {INFINITY, Place(2)}


def test_find_scalar_negative_sign():
    c = find_scalar(3, {2, 3}, sign=-1)
    assert c < 0
    assert hasse_profile(3, c) == {Place(2), Place(3)}


def test_find_positive_scalar_random_targets(rng, budget):
    for _ in range(100):
        d = SquareClass(rng.choice([-1, 1]) * random_squarefree(rng))
        negative = random_target_places(rng, d)
        c = find_positive_scalar(HilbertTarget(d, negative), budget)
        assert c > 0
        assert hasse_profile(d, c) == negative


def test_find_positive_scalar_invalid_targets():
    with pytest.raises(InvalidTarget):
        # -1 is a square in Q_5.
        find_positive_scalar(HilbertTarget(SquareClass(-1), frozenset({Place(2), Place(5)})))
    with pytest.raises(InvalidTarget):
        find_positive_scalar(HilbertTarget(SquareClass(-1), frozenset({Place(3)})))
    with pytest.raises(InvalidTarget):
        find_positive_scalar(HilbertTarget(SquareClass(-1), frozenset({INFINITY, Place(2)})))


def test_find_scalar_budget_exceeded():
    # Needs c = 21; single prime factors from {2, 3, 7} cannot do it.
    tiny = SearchBudget(prime_bound=2, max_factors=1, escalations=0)
    with pytest.raises(BudgetExceeded):
        find_scalar(-1, {3, 7}, budget=tiny)


def test_search_budget_rejects_nonsense():
    with pytest.raises(InvalidTarget):
        SearchBudget(prime_bound=1, max_factors=4)


def test_realize_example():
    target = FormInvariants(5, (4, 1), SquareClass(-1), frozenset())
    form = realize_form(target)
    assert invariants(form) == target


def test_realize_prescribed_supports():
    for support in ({2, 3}, {2, 5}, {2, 13}, {5, 13}):
        target = FormInvariants(5, (4, 1), SquareClass(-1), frozenset(support))
        assert invariants(realize_form(target)) == target


def test_realize_low_rank():
    for target in (
        FormInvariants(1, (0, 1), SquareClass(-7)),
        FormInvariants(2, (1, 1), SquareClass(-3)),
        FormInvariants(2, (2, 0), SquareClass(1), frozenset({Place(2), Place(3)})),
    ):
        assert invariants(realize_form(target)) == target


def test_realize_random_targets(rng, budget):
    for _ in range(100):
        target = random_target(rng, rng.randint(3, 8))
        form = realize_form(target, budget)
        assert invariants(form) == target


def test_realize_rejects_invalid():
    with pytest.raises(InvalidTarget):
        realize_form(FormInvariants(3, (2, 1), SquareClass(5)))
    with pytest.raises(InvalidTarget):
        realize_form(FormInvariants(3, (3, 0), SquareClass(1), frozenset({Place(2)})))
    with pytest.raises(InvalidTarget):
        # A binary form with -d a square is hyperbolic everywhere.
        realize_form(FormInvariants(2, (1, 1), SquareClass(-1), frozenset({Place(2), Place(3)})))


def _check_combination(x, y, z, d, h, result):
    a, b, c = result
    assert a > 0 and b > 0 and c > 0
    assert square_class(a * b * c) == d
    eps = invariants(DiagonalForm((a, b, c)))
    for v in support_places((a, b, c, x, y, z, d.representative)) | h:
        value = eps.epsilon(v) * hilbert_symbol(a, x, v) * hilbert_symbol(b, y, v) * hilbert_symbol(c, z, v)
        assert value == (-1 if v in h else 1), (x, y, z, d, v)


def test_combine_three_random(rng, budget):
    for _ in range(50):
        x, y, z = (rng.choice([-1, 1]) * rng.randint(1, 12) for _ in range(3))
        d = SquareClass(random_squarefree(rng, 30)) if rng.random() < 0.8 else SquareClass(1)
        h = frozenset(Place(p) for p in rng.sample(SMALL_PRIMES[:6], rng.choice([0, 2])))
        result = combine_three(x, y, z, d, h, budget)
        _check_combination(x, y, z, d, h, result)


def test_combine_three_rejects_negative_class():
    with pytest.raises(InvalidTarget):
        combine_three(1, 1, 1, -3)
    with pytest.raises(InvalidTarget):
        combine_three(1, 1, 1, 3, {2})


def test_decompose_three_odd_blocks(rng, budget):
    one = DiagonalForm.of(1)
    g = DiagonalForm.of(1, -1)
    for support in ((), (2, 3), (2, 5), (5, 13), (3, 7)):
        q = FormInvariants(5, (4, 1), SquareClass(-rng.choice([1, 2, 3, 5, 6])), frozenset(support))
        a = decompose_into_three_odd(one, one, one, g, q, budget)
        total = DiagonalForm(a) + g
        assert all(x > 0 for x in a)
        assert invariants(total) == q


def test_decompose_with_larger_blocks(budget):
    f1 = DiagonalForm.of(1, 1, 3)
    f2 = DiagonalForm.of(2)
    f3 = DiagonalForm.of(5)
    g = DiagonalForm.of(1, -1)
    q = FormInvariants(7, (6, 1), SquareClass(-7), frozenset({Place(2), Place(7)}))
    a1, a2, a3 = decompose_into_three_odd(f1, f2, f3, g, q, budget)
    assert invariants(f1.scaled(a1) + f2.scaled(a2) + f3.scaled(a3) + g) == q


def test_decompose_rejects_even_block():
    with pytest.raises(InvalidTarget):
        decompose_into_three_odd(
            DiagonalForm.of(1, 1),
            DiagonalForm.of(1),
            DiagonalForm.of(1),
            DiagonalForm.of(1, -1),
            FormInvariants(6, (5, 1), SquareClass(-1)),
        )


def test_budget_rejects_zero_bounds():
    with pytest.raises(InvalidTarget):
        SearchBudget.default(prime_bound=0)
    with pytest.raises(InvalidTarget):
        SearchBudget.default(max_factors=0)
    assert SearchBudget.default(prime_bound=3).prime_bound == 3


def test_distinct_targets_realize_inequivalent_forms(rng, budget):
    for _ in range(200):
        rank = rng.randint(3, 8)
        t1 = random_target(rng, rank)
        t2 = random_target(rng, rank)
        while t2 == t1:
            t2 = random_target(rng, rank)
        f1 = realize_form(t1, budget)
        f2 = realize_form(t2, budget)
        assert not is_equivalent(invariants(f1), invariants(f2)), (t1, t2)
