"""
Cusp cross-section verdicts.

A flat n-manifold B appears as a cusp cross-section in the commensurability
class of a form q of signature (n+1, 1) exactly when q = f (+) <1, -1> for a
positive definite f invariant under some holonomy representation of B. The
predicates here decide that from FormInvariants alone.

Two strengths of verdict are kept apart:
    Appears / DoesNotAppear   from if-and-only-if statements
    DoesNotAppear / NotObstructed   from necessary conditions only
"""

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple

from loguru import logger
from sympy import isprime, nextprime, primerange

from arith_cusps.errors import (
    BadParameters,
    BudgetExceeded,
    EmptyList,
    InvalidTarget,
    UnknownRecord,
    WrongSignature,
)
from arith_cusps.forms.builder import (
    HilbertTarget,
    SearchBudget,
    decompose_into_three_odd,
    find_positive_scalar,
    realize_form,
    squarefree_products,
)
from arith_cusps.forms.qform import DiagonalForm, FormInvariants, invariants
from arith_cusps.foundation.rational import SquareClass
from arith_cusps.foundation.symbols import Place, hilbert_symbol, is_square_local, support_places
from arith_cusps.classifier.manifest import Condition, FlatManifoldRecord


class Outcome(str, Enum):
    APPEARS = "Appears"
    DOES_NOT_APPEAR = "DoesNotAppear"
    NOT_OBSTRUCTED = "NotObstructed"


@dataclass(frozen=True)
class Verdict:
    outcome: Outcome
    reasons: Tuple[str, ...] = field(default_factory=tuple)

    @property
    def appears(self) -> bool:
        return self.outcome == Outcome.APPEARS


def _require_signature(q: FormInvariants, n: Optional[int] = None) -> int:
    """Check q has signature (n+1, 1) and return n."""
    expected = n if n is not None else q.rank - 2
    if q.signature != (expected + 1, 1):
        raise WrongSignature(
            f"Expected signature ({expected + 1}, 1)",
            {"signature": list(q.signature), "n": expected},
        )
    return expected


def _bad_primes(q: FormInvariants, keep: Callable[[int], bool]) -> List[int]:
    """Support primes (eps_p = -1) selected by `keep`; eps_p = 1 everywhere else."""
    return [p for p in q.support_primes if keep(p)]


def _residue_verdict(bad: List[int], modulus: int, strong: bool, extra: str = "") -> Verdict:
    if bad:
        return Verdict(
            Outcome.DOES_NOT_APPEAR,
            tuple(f"eps_{p}(q) = -1 with {p} = 1 mod {modulus}{extra}" for p in bad),
        )
    success = Outcome.APPEARS if strong else Outcome.NOT_OBSTRUCTED
    return Verdict(success, (f"eps_p(q) = 1 for every prime p = 1 mod {modulus}{extra}",))


# ---------------------------------------------------------------------------
# Flat 3- and 4-manifolds
# ---------------------------------------------------------------------------

def classify_3d(record: FlatManifoldRecord, q: FormInvariants) -> Verdict:
    if record.dimension != 3:
        raise UnknownRecord(f"{record.id} is not a flat 3-manifold", {"id": record.id})
    _require_signature(q, 3)
    if record.condition == Condition.NONE:
        return Verdict(Outcome.APPEARS, (f"holonomy {record.holonomy_name} imposes no condition",))
    if record.condition == Condition.MOD3:
        return _residue_verdict(_bad_primes(q, lambda p: p % 3 == 1), 3, strong=True)
    if record.condition == Condition.MOD4:
        return _residue_verdict(_bad_primes(q, lambda p: p % 4 == 1), 4, strong=True)
    raise UnknownRecord(f"No 3-dimensional rule for condition {record.condition.value}", {"id": record.id})


def classify_4d(record: FlatManifoldRecord, q: FormInvariants) -> Verdict:
    if record.dimension != 4:
        raise UnknownRecord(f"{record.id} is not a flat 4-manifold", {"id": record.id})
    _require_signature(q, 4)
    if record.condition == Condition.NONE:
        return Verdict(Outcome.APPEARS, (f"holonomy {record.holonomy_name} imposes no condition",))
    minus_d = -q.discriminant
    local = lambda p: is_square_local(minus_d, p)  # noqa: E731
    note = " and -d(q) a square in Q_p"
    if record.condition == Condition.MOD3:
        return _residue_verdict(_bad_primes(q, lambda p: p % 3 == 1 and local(p)), 3, True, note)
    if record.condition == Condition.MOD4:
        return _residue_verdict(_bad_primes(q, lambda p: p % 4 == 1 and local(p)), 4, True, note)
    bad = _bad_primes(q, local)
    if bad:
        return Verdict(
            Outcome.DOES_NOT_APPEAR,
            tuple(f"eps_{p}(q) = -1 with -d(q) a square in Q_{p}" for p in bad),
        )
    return Verdict(Outcome.APPEARS, ("eps_p(q) = 1 wherever -d(q) is a local square",))


def classify(record: FlatManifoldRecord, q: FormInvariants) -> Verdict:
    if record.dimension == 3:
        return classify_3d(record, q)
    return classify_4d(record, q)


def three_odd_blocks_guarantee(block_ranks: Sequence[int]) -> bool:
    """Three odd-dimensional rational summands let B appear in every class."""
    if not block_ranks:
        raise EmptyList("Need at least one block rank")
    if any(r < 1 for r in block_ranks):
        raise BadParameters("Block ranks must be positive", {"ranks": list(block_ranks)})
    return sum(1 for r in block_ranks if r % 2) >= 3


# ---------------------------------------------------------------------------
# Parametric families
# ---------------------------------------------------------------------------

def field_discriminant(d: SquareClass) -> int:
    d0 = d.representative
    return d0 if d0 % 4 == 1 else 4 * d0


def square_for_all_residue_primes(d: SquareClass, modulus: int) -> bool:
    """
    Is d a square in Q_p for every prime p = 1 mod modulus.

    The Kronecker character of Q(sqrt d) has conductor |D|, so it is trivial on
    all primes = 1 mod modulus exactly when D divides modulus.
    """
    if modulus < 1:
        raise BadParameters("Modulus must be positive", {"modulus": modulus})
    if d.is_square():
        return True
    return modulus % abs(field_discriminant(d)) == 0


def residue_prime_witness(d: SquareClass, modulus: int, limit: int = 10**5) -> Optional[int]:
    """Least prime p = 1 mod modulus below limit where d is not a local square."""
    p = modulus + 1
    while p < limit:
        if isprime(p) and not is_square_local(d, p):
            return p
        p += modulus
    return None


def _check_exponent(exponent: int) -> None:
    if exponent < 3 or exponent % 2 == 0:
        raise BadParameters("Holonomy exponent must be odd and at least 3", {"exponent": exponent})


def odd_holonomy_obstruction(b1: int, exponent: int, q: FormInvariants) -> Verdict:
    """Necessary conditions at primes p = 1 mod 4e for odd holonomy with b1 <= 2."""
    _check_exponent(exponent)
    if b1 not in (0, 1, 2):
        raise BadParameters("Obstruction is proved for b1 in {0, 1, 2}", {"b1": b1})
    _require_signature(q)
    modulus = 4 * exponent
    d = q.discriminant
    reasons = []
    if b1 == 0 and not square_for_all_residue_primes(d, modulus):
        witness = residue_prime_witness(d, modulus)
        reasons.append(
            f"d(q) = {d} is not a square in Q_{witness}, {witness} = 1 mod {modulus}"
            if witness
            else f"d(q) = {d} is not a square at some prime = 1 mod {modulus}"
        )
    if b1 == 2:
        bad = _bad_primes(q, lambda p: p % modulus == 1 and is_square_local(d, p))
    else:
        bad = _bad_primes(q, lambda p: p % modulus == 1)
    reasons.extend(f"eps_{p}(q) = -1 with {p} = 1 mod {modulus}" for p in bad)
    if reasons:
        return Verdict(Outcome.DOES_NOT_APPEAR, tuple(reasons))
    return Verdict(Outcome.NOT_OBSTRUCTED, (f"conditions at primes = 1 mod {modulus} hold",))


def c3k_b1zero_classify(n: int, q: FormInvariants) -> Verdict:
    """Holonomy (C_3)^k with b1 = 0: d(q) = -1 (n = 0 mod 4) or -3 (n = 2 mod 4), eps_p = 1 at p = 1 mod 3."""
    if n < 4 or n % 2:
        raise BadParameters("Dimension must be even and at least 4", {"n": n})
    _require_signature(q, n)
    required = SquareClass(-1 if n % 4 == 0 else -3)
    if q.discriminant != required:
        return Verdict(Outcome.DOES_NOT_APPEAR, (f"d(q) = {q.discriminant}, expected {required} for n = {n}",))
    verdict = _residue_verdict(_bad_primes(q, lambda p: p % 3 == 1), 3, strong=True)
    return Verdict(verdict.outcome, (f"d(q) = {required}",) + verdict.reasons)


def cyclic_family_discriminant(p: int, n: int) -> SquareClass:
    """Forced d(q) for holonomy (C_p)^k with b1 = 0 in dimension n."""
    if p < 3 or not isprime(p):
        raise BadParameters(f"{p} is not an odd prime", {"p": p})
    if n < 1 or n % (p - 1):
        raise BadParameters("Dimension must be a multiple of p - 1", {"p": p, "n": n})
    return SquareClass(-1 if n % (2 * (p - 1)) == 0 else -p)


def cpk_b1zero_disc_obstruction(p: int, n: int, q: FormInvariants) -> Verdict:
    required = cyclic_family_discriminant(p, n)
    _require_signature(q, n)
    if q.discriminant != required:
        return Verdict(Outcome.DOES_NOT_APPEAR, (f"d(q) = {q.discriminant}, holonomy (C_{p})^k forces {required}",))
    return Verdict(Outcome.NOT_OBSTRUCTED, (f"d(q) = {required} as forced in dimension {n}",))


def obstructing_form(exponent: int, n: int, budget: Optional[SearchBudget] = None) -> DiagonalForm:
    """
    A form of signature (n+1, 1) with d = -1 and eps = -1 at 2 and at the least
    prime p = 1 mod 4e. No flat n-manifold with odd holonomy of exponent e and
    b1 <= 2 appears in its class.
    """
    _check_exponent(exponent)
    if n < 3:
        raise BadParameters("Dimension must be at least 3", {"n": n})
    modulus = 4 * exponent
    p = nextprime(modulus)
    while p % modulus != 1:
        p = nextprime(p)
    target = FormInvariants(n + 2, (n + 1, 1), SquareClass(-1), frozenset({Place(2), Place(p)}))
    return realize_form(target, budget)


# ---------------------------------------------------------------------------
# Explicit witnesses
# ---------------------------------------------------------------------------

def _twist_search(
    q: FormInvariants,
    unit: int,
    correction: Callable[[Place], int],
    budget: SearchBudget,
) -> Tuple[Fraction, frozenset]:
    """
    Find alpha > 0 such that h_p = eps_p(q) * correction(p) * (alpha, unit)_p is -1
    only where -d(q) is not a local square. Returns alpha and the set where h_p = -1.
    """
    minus_d = -q.discriminant
    base = {2, 3} | set(q.discriminant.primes) | set(q.support_primes)
    pool = sorted(base | set(primerange(5, budget.prime_bound + 1)))
    places = q.hasse_negative | support_places((unit, 3, minus_d.representative))
    for examined, (alpha, _) in enumerate(squarefree_products(pool, budget.max_factors)):
        if examined >= budget.max_candidates:
            break
        candidate_places = places | support_places((alpha,))
        negative = frozenset(
            v
            for v in candidate_places
            if not v.is_infinite and q.epsilon(v) * correction(v) * hilbert_symbol(alpha, unit, v) == -1
        )
        if not any(is_square_local(minus_d, v) for v in negative):
            return Fraction(alpha), negative
    raise BudgetExceeded("No twisting scalar within budget", {"unit": unit})


def realize_cusp_form(record: FlatManifoldRecord, q: FormInvariants, budget: Optional[SearchBudget] = None) -> DiagonalForm:
    """Diagonal form equivalent to q exhibiting the holonomy block structure of the record."""
    budget = budget or SearchBudget.default()
    verdict = classify(record, q)
    if not verdict.appears:
        raise InvalidTarget(f"{record.id} does not appear for this form", {"reasons": list(verdict.reasons)})
    d = q.discriminant.as_rational()
    one = DiagonalForm.of(1)
    hyperbolic = DiagonalForm.of(1, -1)

    if record.condition == Condition.NONE:
        g = hyperbolic if record.dimension == 3 else one + hyperbolic
        a1, a2, a3 = decompose_into_three_odd(one, one, one, g, q, budget)
        witness = DiagonalForm((a1, a2, a3)) + g
    elif record.dimension == 3 and record.condition == Condition.MOD3:
        places = q.finite_negative | {Place(2), Place(3)}
        negative = frozenset(v for v in places if q.epsilon(v) * hilbert_symbol(3, -1, v) == -1)
        c = find_positive_scalar(HilbertTarget(SquareClass(-3), negative), budget)
        b, a = -3 * d, -3 * d * c
        witness = DiagonalForm((3 * a, a, b)) + hyperbolic
    elif record.dimension == 3 and record.condition == Condition.MOD4:
        c = find_positive_scalar(HilbertTarget(SquareClass(-1), q.finite_negative), budget)
        b, a = -d, -d * c
        witness = DiagonalForm((a, a, b)) + hyperbolic
    elif record.condition == Condition.MOD4:
        alpha, h_beta = _twist_search(q, -1, lambda v: 1, budget)
        beta = find_positive_scalar(HilbertTarget(-q.discriminant, h_beta), budget)
        b = -beta * d
        witness = DiagonalForm((alpha * b, alpha * b, b, beta)) + hyperbolic
    elif record.condition == Condition.MOD3:
        alpha, h_beta = _twist_search(q, -3, lambda v: hilbert_symbol(3, -1, v), budget)
        beta = find_positive_scalar(HilbertTarget(-q.discriminant, h_beta), budget)
        b = -3 * beta * d
        a = alpha * b
        witness = DiagonalForm((3 * a, a, b, beta)) + hyperbolic
    else:
        b = find_positive_scalar(HilbertTarget(-q.discriminant, q.finite_negative), budget)
        a = -b * d
        witness = DiagonalForm((a, a, a, b)) + hyperbolic

    if invariants(witness) != q:
        raise BudgetExceeded("Cusp witness failed verification", {"id": record.id, "form": str(witness)})
    logger.debug(f"{record.id}: witness <{witness}>")
    return witness
