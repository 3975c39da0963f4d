"""
Constructive solvers over Q.

Existence statements for forms with prescribed invariants are proved with
Dirichlet-type arguments; here they become bounded searches that only ever
return a candidate after checking it:

    find_positive_scalar   c > 0 with (d, c)_p = -1 exactly on a given set
    realize_form           a diagonal form with prescribed invariants
    combine_three          positive a, b, c twisting <x, y, z> to prescribed data
    decompose_into_three_odd
                           q = a1 f1 (+) a2 f2 (+) a3 f3 (+) g

Candidates are signed squarefree products of at most `max_factors` primes,
popped from a heap in increasing height. A failed search doubles the prime
bound up to `escalations` times before raising BudgetExceeded.
"""

import heapq
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import islice
from typing import FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

from loguru import logger
from sympy import primerange
from sympy.ntheory import legendre_symbol

from arith_cusps.config import settings
from arith_cusps.errors import BudgetExceeded, InvalidTarget, ZeroInput
from arith_cusps.foundation.rational import RationalLike, SquareClass, as_rational, square_class
from arith_cusps.foundation.symbols import (
    INFINITY,
    Place,
    PlaceLike,
    as_place,
    hasse_profile,
    hilbert_symbol,
    is_square_local,
    support_places,
)
from arith_cusps.forms.qform import (
    DiagonalForm,
    FormInvariants,
    invariants,
    is_proj_equivalent,
    scale_invariants,
    validate_invariants,
)


@dataclass(frozen=True)
class SearchBudget:
    prime_bound: int
    max_factors: int
    escalations: int = 3
    max_candidates: int = 200_000

    def __post_init__(self):
        if self.prime_bound < 2 or self.max_factors < 1 or self.escalations < 0 or self.max_candidates < 1:
            raise InvalidTarget(
                "Search budget must be positive",
                {"prime_bound": self.prime_bound, "max_factors": self.max_factors},
            )

    @classmethod
    def default(cls, prime_bound: Optional[int] = None, max_factors: Optional[int] = None) -> "SearchBudget":
        return cls(
            prime_bound=settings.PRIME_BOUND if prime_bound is None else prime_bound,
            max_factors=settings.MAX_FACTORS if max_factors is None else max_factors,
            escalations=settings.BUDGET_ESCALATIONS,
            max_candidates=settings.MAX_CANDIDATES,
        )

    def bounds(self) -> Iterator[int]:
        """Prime bounds tried in order: prime_bound, 2*prime_bound, ..."""
        for level in range(self.escalations + 1):
            yield self.prime_bound * 2 ** level


@dataclass(frozen=True)
class HilbertTarget:
    """Target (d, c)_p = -1 exactly for p in h_negative, +1 at every other place."""

    d: SquareClass
    h_negative: FrozenSet[Place] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "h_negative", frozenset(as_place(p) for p in self.h_negative))

    def validate(self) -> "HilbertTarget":
        if INFINITY in self.h_negative:
            raise InvalidTarget("A positive scalar has trivial symbol at infinity")
        _check_prescribed(self.d, self.h_negative)
        return self


def _as_class(d) -> SquareClass:
    return d if isinstance(d, SquareClass) else square_class(d)


def _check_prescribed(d: SquareClass, negative: FrozenSet[Place]) -> None:
    if len(negative) % 2:
        raise InvalidTarget(
            "Prescribed symbols violate the product formula",
            {"d": str(d), "negative": [str(v) for v in sorted(negative)]},
        )
    for v in negative:
        if is_square_local(d, v):
            raise InvalidTarget(
                f"d is a square at {v}, so (d, c)_{v} = 1 for every c",
                {"d": str(d), "place": str(v)},
            )


# ---------------------------------------------------------------------------
# Candidate enumeration
# ---------------------------------------------------------------------------

def squarefree_products(pool: Sequence[int], max_factors: int, masks: Optional[Sequence[int]] = None) -> Iterator[Tuple[int, int]]:
    """
    Yield (product, mask) over products of at most max_factors distinct pool
    entries in strictly increasing order, starting with the empty product 1.
    mask is the XOR of the masks of the factors used.
    """
    masks = masks or [0] * len(pool)
    heap = [(1, -1, 0, 0)]
    while heap:
        value, last, count, mask = heapq.heappop(heap)
        yield value, mask
        nxt = last + 1
        if nxt >= len(pool):
            continue
        if count < max_factors:
            heapq.heappush(heap, (value * pool[nxt], nxt, count + 1, mask ^ masks[nxt]))
        if last >= 0:
            sibling = value // pool[last] * pool[nxt]
            heapq.heappush(heap, (sibling, nxt, count, mask ^ masks[last] ^ masks[nxt]))


def _bits(places: Sequence[Place], sign_of) -> int:
    mask = 0
    for i, v in enumerate(places):
        if sign_of(v) == -1:
            mask |= 1 << i
    return mask


def find_scalar(
    d,
    negative_places: Iterable[PlaceLike] = (),
    sign: Optional[int] = None,
    budget: Optional[SearchBudget] = None,
) -> Fraction:
    """
    Find c with (d, c)_v = -1 exactly for v in negative_places (Infinity
    allowed). sign fixes the sign of c when the target leaves it free.
    """
    budget = budget or SearchBudget.default()
    d = _as_class(d)
    negative = frozenset(as_place(v) for v in negative_places)
    _check_prescribed(d, negative)

    if INFINITY in negative:
        forced = -1
    elif d.sign < 0:
        forced = 1
    else:
        forced = None
    if forced is not None and sign is not None and sign != forced:
        raise InvalidTarget("Requested sign contradicts the symbol at infinity", {"sign": sign})
    sign = forced or sign or 1

    base = {2} | set(d.primes) | {v.prime for v in negative if not v.is_infinite}
    tracked = sorted(Place(p) for p in base) + [INFINITY]
    target = _bits(tracked, lambda v: -1 if v in negative else 1)
    sign_mask = _bits(tracked, lambda v: hilbert_symbol(d, -1, v)) if sign < 0 else 0

    for bound in budget.bounds():
        # Outside `base` only primes with (d|l) = 1 keep (d, c)_l trivial.
        auxiliary = [l for l in primerange(3, bound + 1) if l not in base and legendre_symbol(d.representative % l, l) == 1]
        pool = sorted(base | set(auxiliary))
        masks = [_bits(tracked, lambda v, p=p: hilbert_symbol(d, p, v)) for p in pool]
        for examined, (value, mask) in enumerate(squarefree_products(pool, budget.max_factors, masks)):
            if examined >= budget.max_candidates:
                break
            if mask ^ sign_mask != target:
                continue
            c = Fraction(sign * value)
            if hasse_profile(d, c) != negative:
                continue
            if bound > budget.prime_bound:
                logger.info(f"Scalar search for d={d} succeeded after escalating to prime bound {bound}")
            logger.debug(f"find_scalar d={d} negative={sorted(map(str, negative))} -> {c} after {examined + 1} candidates")
            return c
        logger.debug(f"find_scalar d={d}: no certificate below prime bound {bound}")

    logger.warning(f"Scalar search for d={d} exhausted its budget")
    raise BudgetExceeded(
        "No scalar with the prescribed symbols within budget",
        {"d": str(d), "negative": [str(v) for v in sorted(negative)], "prime_bound": budget.prime_bound},
    )


def find_positive_scalar(t: HilbertTarget, budget: Optional[SearchBudget] = None) -> Fraction:
    """c > 0 with hilbert_symbol(t.d, c, p) = -1 exactly for p in t.h_negative."""
    t.validate()
    return find_scalar(t.d, t.h_negative, sign=1, budget=budget)


def find_projective_scalar(f: FormInvariants, g: FormInvariants, budget: Optional[SearchBudget] = None) -> Fraction:
    """m > 0 with scale_invariants(f, m) = g."""
    if not is_proj_equivalent(f, g):
        raise InvalidTarget("Forms are not projectively equivalent")
    n = f.rank
    if n % 2:
        m = Fraction(abs((f.discriminant * g.discriminant).representative))
    else:
        twist = -f.discriminant if n % 4 == 2 else f.discriminant
        differ = {v for v in f.hasse_negative ^ g.hasse_negative}
        m = find_scalar(twist, differ, sign=1, budget=budget)
    if scale_invariants(f, m) != g:
        raise BudgetExceeded("Projective scalar failed verification", {"m": str(m)})
    return m


# ---------------------------------------------------------------------------
# Realizing prescribed invariants
# ---------------------------------------------------------------------------

def _certify(form: DiagonalForm, target: FormInvariants) -> DiagonalForm:
    if invariants(form) != target:
        raise BudgetExceeded("Candidate failed verification", {"form": str(form)})
    return form


def _realize_binary(inv: FormInvariants, budget: SearchBudget) -> DiagonalForm:
    # <b, b d> has Hasse invariant (b, -d).
    d = inv.discriminant
    b = find_scalar(-d, inv.hasse_negative, budget=budget)
    return _certify(DiagonalForm((b, b * d.representative)), inv)


def _peel(target: FormInvariants) -> Tuple[List[int], FormInvariants]:
    """Split off <1> / <-1> entries until a rank 3 core remains."""
    peeled: List[int] = []
    core = target
    while core.rank > 3:
        r, s = core.signature
        d = core.discriminant
        if r >= s:
            peeled.append(1)
            core = FormInvariants(core.rank - 1, (r - 1, s), d, core.hasse_negative)
        else:
            # core = core' (+) <-1>: d' = -d and eps' = eps * (-d, -1).
            peeled.append(-1)
            places = core.hasse_negative | support_places((d.representative, -1))
            core = FormInvariants(
                core.rank - 1,
                (r, s - 1),
                -d,
                frozenset(v for v in places if core.epsilon(v) * hilbert_symbol(-d, -1, v) == -1),
            )
    return peeled, core


def _first_entries(pool: Sequence[int], max_factors: int, signs: Sequence[int]) -> Iterator[int]:
    for value, _ in squarefree_products(pool, max_factors):
        for sign in signs:
            yield sign * value


def _realize_ternary(core: FormInvariants, budget: SearchBudget) -> DiagonalForm:
    """<a> (+) <b, b d_g> with a ranging over signed candidates."""
    r, s = core.signature
    d = core.discriminant
    signs = ([1] if r else []) + ([-1] if s else [])
    base = {2} | set(d.primes) | set(core.support_primes)
    for level, bound in enumerate(budget.bounds()):
        pool = sorted(base | set(primerange(3, bound + 1)))
        limit = settings.CORE_ATTEMPTS * 2 ** level
        for a in islice(_first_entries(pool, budget.max_factors, signs), limit):
            d_g = d * square_class(a)
            places = core.hasse_negative | support_places((a, d_g.representative))
            binary = FormInvariants(
                2,
                (r - 1, s) if a > 0 else (r, s - 1),
                d_g,
                frozenset(v for v in places if core.epsilon(v) * hilbert_symbol(a, d_g, v) == -1),
            )
            try:
                validate_invariants(binary)
                g = _realize_binary(binary, budget)
            except InvalidTarget:
                continue
            except BudgetExceeded:
                logger.debug(f"Binary completion for first entry {a} ran out of budget")
                continue
            return DiagonalForm((Fraction(a),)) + g

    logger.warning(f"Could not realize ternary core of discriminant {d}")
    raise BudgetExceeded(
        "No ternary form with the prescribed invariants within budget",
        {"disc": str(d), "signature": [r, s], "hasse_neg": [str(v) for v in sorted(core.hasse_negative)]},
    )


def realize_form(target: FormInvariants, budget: Optional[SearchBudget] = None) -> DiagonalForm:
    """A diagonal form whose invariants are exactly `target`."""
    budget = budget or SearchBudget.default()
    validate_invariants(target)
    if target.rank == 1:
        return _certify(DiagonalForm((target.discriminant.as_rational(),)), target)
    if target.rank == 2:
        return _realize_binary(target, budget)
    peeled, core = _peel(target)
    form = _realize_ternary(core, budget)
    if peeled:
        form = DiagonalForm(tuple(Fraction(a) for a in peeled)) + form
    logger.debug(f"Realized rank {target.rank} target as <{form}>")
    return _certify(form, target)


# ---------------------------------------------------------------------------
# Combining blocks
# ---------------------------------------------------------------------------

def _finite(places: Iterable[PlaceLike]) -> FrozenSet[Place]:
    result = frozenset(as_place(v) for v in places)
    if INFINITY in result:
        raise InvalidTarget("Prescribed data must live at finite primes")
    return result


def combine_three(
    x: RationalLike,
    y: RationalLike,
    z: RationalLike,
    d,
    h_negative: Iterable[PlaceLike] = (),
    budget: Optional[SearchBudget] = None,
) -> Tuple[Fraction, Fraction, Fraction]:
    """
    Positive a, b, c with abc = d mod squares and, at every place,

        eps(<a, b, c>) * (a, x) * (b, y) * (c, z) = h

    where h = -1 exactly on h_negative.
    """
    budget = budget or SearchBudget.default()
    x, y, z = as_rational(x), as_rational(y), as_rational(z)
    if 0 in (x, y, z):
        raise ZeroInput("combine_three needs nonzero x, y, z")
    d = _as_class(d)
    if d.sign < 0:
        raise InvalidTarget("A product of positive rationals has positive class", {"d": str(d)})
    h = _finite(h_negative)
    if len(h) % 2:
        raise InvalidTarget("Prescribed data violates the product formula", {"h_negative": [str(v) for v in sorted(h)]})

    twist = invariants(DiagonalForm((x, y, z)))
    xyz = x * y * z
    places = twist.hasse_negative | h | support_places((d.representative, xyz))
    # The twisted form <a/x, b/y, c/z> has discriminant d*xyz and these Hasse invariants.
    target = FormInvariants(
        3,
        twist.signature,
        d * square_class(xyz),
        frozenset(
            v
            for v in places
            if twist.epsilon(v) * hilbert_symbol(d, xyz, v) * (-1 if v in h else 1) == -1
        ),
    )
    shape = realize_form(target, budget)
    positives = [e for e in shape.entries if e > 0]
    negatives = [e for e in shape.entries if e < 0]
    a, b, c = ((positives if t > 0 else negatives).pop(0) * t for t in (x, y, z))

    result = (a, b, c)
    if square_class(a * b * c) != d:
        raise BudgetExceeded("Combined triple failed the discriminant check")
    lhs = invariants(DiagonalForm(result))
    for v in places | support_places(result):
        value = lhs.epsilon(v) * hilbert_symbol(a, x, v) * hilbert_symbol(b, y, v) * hilbert_symbol(c, z, v)
        if value != (-1 if v in h else 1):
            raise BudgetExceeded("Combined triple failed verification", {"place": str(v)})
    return result


def decompose_into_three_odd(
    f1: DiagonalForm,
    f2: DiagonalForm,
    f3: DiagonalForm,
    g: DiagonalForm,
    q: FormInvariants,
    budget: Optional[SearchBudget] = None,
) -> Tuple[Fraction, Fraction, Fraction]:
    """
    Positive a_i with a1 f1 (+) a2 f2 (+) a3 f3 (+) g equivalent to q.

    Each f_i is rescaled by its discriminant to discriminant 1, after which
    scaling by a_i only twists eps by (a_i, (-1)^((r_i - 1)/2)).
    """
    blocks = (f1, f2, f3)
    for f in blocks:
        if not f.is_positive_definite() or f.rank % 2 == 0:
            raise InvalidTarget("Blocks must be positive definite of odd rank", {"form": str(f)})
    rank = sum(f.rank for f in blocks) + g.rank
    if rank != q.rank or q.signature != (rank - g.signature[1], g.signature[1]):
        raise InvalidTarget(
            "Blocks and g do not match the rank and signature of q",
            {"rank": rank, "signature": list(q.signature)},
        )

    scales = [invariants(f).discriminant.as_rational() for f in blocks]
    normalized = [invariants(f.scaled(m)) for f, m in zip(blocks, scales)]
    deltas = [(-1) ** ((f.rank - 1) // 2) for f in blocks]
    g_inv = invariants(g)
    d_q, d_g = q.discriminant, g_inv.discriminant

    places = q.hasse_negative | g_inv.hasse_negative | support_places((d_q.representative, d_g.representative))
    for inv in normalized:
        places |= inv.hasse_negative

    def h(v: Place) -> int:
        value = g_inv.epsilon(v) * q.epsilon(v) * hilbert_symbol(-d_q, d_g, v)
        for inv in normalized:
            value *= inv.epsilon(v)
        return value

    h_negative = frozenset(v for v in places if not v.is_infinite and h(v) == -1)
    b = combine_three(*deltas, d_g * d_q, h_negative, budget)
    result = tuple(bi * m for bi, m in zip(b, scales))

    total = f1.scaled(result[0]) + f2.scaled(result[1]) + f3.scaled(result[2]) + g
    if invariants(total) != q:
        raise BudgetExceeded("Decomposition failed verification", {"form": str(total)})
    return result
