"""
Invariant symmetric bilinear forms of finite rational representations.

A representation is presented by generator matrices. The invariant forms are
the symmetric Q with g^T Q g = Q for every generator, found as the exact
nullspace of the stacked linear constraints on the n(n+1)/2 upper-triangular
entries of Q.
"""

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Dict, List, Optional, Sequence, Tuple

from loguru import logger
from sympy import isprime

from arith_cusps.config import settings
from arith_cusps.errors import (
    BadParameters,
    ClosureBudgetExceeded,
    GeneratorCountMismatch,
    NotOddPrime,
    Singular,
    WrongDimension,
)
from arith_cusps.forms.qform import GramMatrix
from arith_cusps.foundation import linalg
from arith_cusps.foundation.linalg import Matrix


@dataclass(frozen=True)
class RepGenerators:
    dimension: int
    generators: Tuple[Matrix, ...]
    group_order: Optional[int] = None
    group_exponent: Optional[int] = None

    def __post_init__(self):
        generators = tuple(linalg.as_matrix(g) for g in self.generators)
        for g in generators:
            if linalg.shape(g) != (self.dimension, self.dimension):
                raise WrongDimension(
                    "Generator does not match the representation dimension",
                    {"dimension": self.dimension, "shape": linalg.shape(g)},
                )
            if linalg.determinant(g) == 0:
                raise Singular("Representation generators must be invertible")
        object.__setattr__(self, "generators", generators)
        for bound, label in ((self.group_order, "order"), (self.group_exponent, "exponent")):
            if bound is None:
                continue
            if bound < 1:
                raise BadParameters(f"Group {label} must be positive", {label: bound})
            for g in generators:
                if _power(g, bound) != linalg.identity(self.dimension):
                    raise BadParameters(
                        f"A generator's order does not divide the group {label}",
                        {label: bound},
                    )


def _power(g: Matrix, k: int) -> Matrix:
    result = linalg.identity(len(g))
    for _ in range(k):
        result = linalg.matmul(result, g)
    return result


@dataclass(frozen=True)
class SymFormSpace:
    dimension: int
    basis: Tuple[Matrix, ...]

    @property
    def rank(self) -> int:
        return len(self.basis)

    def combination(self, coefficients: Sequence[Fraction]) -> Matrix:
        n = self.dimension
        result = linalg.zeros(n, n)
        for c, b in zip(coefficients, self.basis):
            result = linalg.add(result, linalg.scale_matrix(b, Fraction(c)))
        return result


def _upper_indices(n: int) -> List[Tuple[int, int]]:
    return [(i, j) for i in range(n) for j in range(i, n)]


def _primitive(m: Matrix) -> Matrix:
    """Scale to coprime integer entries with a positive leading entry."""
    entries = [x for row in m for x in row]
    denominator = 1
    for x in entries:
        denominator = denominator * x.denominator // gcd(denominator, x.denominator)
    numerators = [int(x * denominator) for x in entries]
    common = 0
    for x in numerators:
        common = gcd(common, x)
    lead = next(x for x in numerators if x != 0)
    factor = Fraction(denominator, common) * (1 if lead > 0 else -1)
    return linalg.scale_matrix(m, factor)


def invariant_form_space(rep: RepGenerators) -> SymFormSpace:
    """Basis of {Q symmetric : g^T Q g = Q for every generator}."""
    n = rep.dimension
    unknowns = _upper_indices(n)
    rows = []
    for g in rep.generators:
        for k, l in unknowns:
            row = []
            for i, j in unknowns:
                # Coefficient of q_ij in (g^T Q g - Q)_kl.
                coeff = g[i][k] * g[i][l] if i == j else g[i][k] * g[j][l] + g[j][k] * g[i][l]
                if (i, j) == (k, l):
                    coeff -= 1
                row.append(coeff)
            rows.append(tuple(row))
    solutions = linalg.nullspace(tuple(rows)) if rows else list(linalg.identity(len(unknowns)))

    basis = []
    for vector in solutions:
        q = [[Fraction(0)] * n for _ in range(n)]
        for (i, j), value in zip(unknowns, vector):
            q[i][j] = q[j][i] = value
        basis.append(_primitive(tuple(map(tuple, q))))
    logger.debug(f"Invariant form space of a {n}-dimensional representation has dimension {len(basis)}")
    return SymFormSpace(n, tuple(basis))


def enumerate_group(rep: RepGenerators, cap: Optional[int] = None) -> List[Matrix]:
    """All elements of the generated group, identity first, by breadth-first closure."""
    cap = cap or settings.CLOSURE_CAP
    identity = linalg.identity(rep.dimension)
    seen = {identity}
    elements = [identity]
    queue = deque([identity])
    while queue:
        element = queue.popleft()
        for g in rep.generators:
            product = linalg.matmul(element, g)
            if product in seen:
                continue
            if len(elements) >= cap:
                raise ClosureBudgetExceeded("Group closure exceeded the element cap", {"cap": cap})
            seen.add(product)
            elements.append(product)
            queue.append(product)
    return elements


def average_form(rep: RepGenerators) -> GramMatrix:
    """(1/|G|) sum over g in G of g^T g: an invariant positive definite form."""
    elements = enumerate_group(rep)
    if rep.group_order is not None and len(elements) != rep.group_order:
        raise BadParameters(
            "Generators do not generate a group of the stated order",
            {"order": rep.group_order, "enumerated": len(elements)},
        )
    n = rep.dimension
    total = linalg.zeros(n, n)
    for g in elements:
        total = linalg.add(total, linalg.matmul(linalg.transpose(g), g))
    return GramMatrix(linalg.scale_matrix(total, Fraction(1, len(elements))))


def is_positive_definite(g: GramMatrix) -> bool:
    """All leading principal minors positive."""
    n = g.dimension
    return all(linalg.determinant(linalg.submatrix(g.entries, range(k), range(k))) > 0 for k in range(1, n + 1))


def cyclic_prime_rep(p: int) -> Tuple[RepGenerators, GramMatrix]:
    """
    The (p-1)-dimensional rational representation of C_p on Z[zeta_p] and the
    invariant tridiagonal form of determinant p.
    """
    if p < 3 or not isprime(p):
        raise NotOddPrime(f"{p} is not an odd prime", {"p": p})
    n = p - 1
    zeta = [[Fraction(0)] * n for _ in range(n)]
    for i in range(1, n):
        zeta[i][i - 1] = Fraction(1)
    for i in range(n):
        zeta[i][n - 1] = Fraction(-1)
    q = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        q[i][i] = Fraction(2)
        if i + 1 < n:
            q[i][i + 1] = q[i + 1][i] = Fraction(-1)
    rep = RepGenerators(n, (tuple(map(tuple, zeta)),), group_order=p, group_exponent=p)
    return rep, GramMatrix(tuple(map(tuple, q)))


def block_sum(rep_a: RepGenerators, rep_b: RepGenerators) -> RepGenerators:
    """Generator-wise direct sum of two representations of the same group."""
    if len(rep_a.generators) != len(rep_b.generators):
        raise GeneratorCountMismatch(
            "Representations are presented by different numbers of generators",
            {"left": len(rep_a.generators), "right": len(rep_b.generators)},
        )
    order = rep_a.group_order if rep_a.group_order == rep_b.group_order else None
    exponent = rep_a.group_exponent if rep_a.group_exponent == rep_b.group_exponent else None
    return RepGenerators(
        rep_a.dimension + rep_b.dimension,
        tuple(linalg.block_diagonal(a, b) for a, b in zip(rep_a.generators, rep_b.generators)),
        group_order=order,
        group_exponent=exponent,
    )


def transport_form(q: GramMatrix, c: Matrix) -> GramMatrix:
    """c^T q c, the form carried along the change of basis c."""
    c = linalg.as_matrix(c)
    if linalg.shape(c) != (q.dimension, q.dimension):
        raise WrongDimension("Change of basis must match the form", {"dimension": q.dimension})
    if linalg.determinant(c) == 0:
        raise Singular("Change of basis must be invertible")
    return q.transformed(c)


def conjugate(g: Matrix, c: Matrix) -> Matrix:
    """c^-1 g c, which preserves transport_form(q, c) whenever g preserves q."""
    return linalg.matmul(linalg.inverse(c), linalg.matmul(g, c))


# ---------------------------------------------------------------------------
# Standard representations
# ---------------------------------------------------------------------------

def trivial_rep(n: int) -> RepGenerators:
    return RepGenerators(n, (linalg.identity(n),), group_order=1, group_exponent=1)


def planar_order3() -> RepGenerators:
    return RepGenerators(2, (linalg.as_matrix([[0, -1], [1, -1]]),), group_order=3, group_exponent=3)


def planar_order4() -> RepGenerators:
    return RepGenerators(2, (linalg.as_matrix([[0, -1], [1, 0]]),), group_order=4, group_exponent=4)


def tetrahedral_rep() -> RepGenerators:
    """A4 acting on R^3 by even sign changes and cyclic coordinate shifts."""
    sign_change = linalg.as_matrix([[1, 0, 0], [0, -1, 0], [0, 0, -1]])
    rotation = linalg.as_matrix([[0, 0, 1], [1, 0, 0], [0, 1, 0]])
    return RepGenerators(3, (sign_change, rotation), group_order=12, group_exponent=6)


def standard_reps() -> Dict[str, RepGenerators]:
    reps = {
        "trivial1": trivial_rep(1),
        "trivial2": trivial_rep(2),
        "trivial3": trivial_rep(3),
        "c3_planar": planar_order3(),
        "c4_planar": planar_order4(),
        "a4": tetrahedral_rep(),
    }
    for p in (3, 5, 7):
        reps[f"c{p}_prime"] = cyclic_prime_rep(p)[0]
    return reps
