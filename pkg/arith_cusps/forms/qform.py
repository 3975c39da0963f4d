"""
Rational quadratic forms and their complete invariants.

A nondegenerate form over Q is determined up to equivalence by its rank,
signature, discriminant class and the finite set of places where the Hasse
invariant eps_v = prod_{i<j} (a_i, a_j)_v equals -1. Forms are carried either
as a DiagonalForm or a GramMatrix; every decider works on FormInvariants.

Usage:
    f = DiagonalForm.parse("3,1,1,1,-1")
    inv = invariants(f)              # rank 5, sig (4,1), d = -3, {2, 3}
    is_proj_equivalent(inv, scale_invariants(inv, Fraction(7)))   # True
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import FrozenSet, Iterable, List, Optional, Sequence, Tuple

from loguru import logger

from arith_cusps.errors import (
    Degenerate,
    InvalidTarget,
    NonPositiveScalar,
    NotIsometry,
    NotIsotropic,
    NotSymmetric,
    ParseError,
    RankMismatch,
    WrongDimension,
    WrongSignature,
    ZeroEntry,
)
from arith_cusps.foundation import linalg
from arith_cusps.foundation.linalg import Matrix, Vector
from arith_cusps.foundation.rational import (
    RationalLike,
    SquareClass,
    as_rational,
    parse_rational,
    square_class,
)
from arith_cusps.foundation.symbols import (
    INFINITY,
    Place,
    PlaceLike,
    as_place,
    hilbert_symbol,
    is_square_local,
    support_places,
)


# ---------------------------------------------------------------------------
# Representations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiagonalForm:
    """<a_1, ..., a_n> with every a_i nonzero."""

    entries: Tuple[Fraction, ...]

    def __post_init__(self):
        entries = tuple(as_rational(a) for a in self.entries)
        if not entries:
            raise WrongDimension("A diagonal form needs at least one entry")
        if any(a == 0 for a in entries):
            raise ZeroEntry("Diagonal forms must have nonzero entries", {"entries": [str(a) for a in entries]})
        object.__setattr__(self, "entries", entries)

    @classmethod
    def of(cls, *entries: RationalLike) -> "DiagonalForm":
        return cls(tuple(as_rational(a) for a in entries))

    @classmethod
    def parse(cls, text: str) -> "DiagonalForm":
        """Comma separated rationals, e.g. "3,1,1,1,-1"."""
        items = [item for item in text.split(",") if item.strip()]
        if not items:
            raise ParseError(f"Empty form text {text!r}")
        return cls(tuple(parse_rational(item) for item in items))

    @property
    def rank(self) -> int:
        return len(self.entries)

    @property
    def signature(self) -> Tuple[int, int]:
        s = sum(1 for a in self.entries if a < 0)
        return (self.rank - s, s)

    def scaled(self, m: RationalLike) -> "DiagonalForm":
        m = as_rational(m)
        return DiagonalForm(tuple(m * a for a in self.entries))

    def direct_sum(self, other: "DiagonalForm") -> "DiagonalForm":
        return DiagonalForm(self.entries + other.entries)

    def __add__(self, other: "DiagonalForm") -> "DiagonalForm":
        return self.direct_sum(other)

    def to_gram(self) -> "GramMatrix":
        return GramMatrix(linalg.diagonal(self.entries))

    def value(self, v: Sequence[RationalLike]) -> Fraction:
        return sum((a * as_rational(x) ** 2 for a, x in zip(self.entries, v)), Fraction(0))

    def is_positive_definite(self) -> bool:
        return all(a > 0 for a in self.entries)

    def __str__(self) -> str:
        return ",".join(str(a) for a in self.entries)


@dataclass(frozen=True)
class GramMatrix:
    """Symmetric n x n rational matrix Q with q(v) = v^T Q v."""

    entries: Matrix

    def __post_init__(self):
        entries = linalg.as_matrix(self.entries)
        if not entries or not linalg.is_square_matrix(entries):
            raise WrongDimension("Gram matrix must be square and nonempty", {"shape": linalg.shape(entries)})
        object.__setattr__(self, "entries", entries)

    @classmethod
    def from_diagonal(cls, f: DiagonalForm) -> "GramMatrix":
        return f.to_gram()

    @property
    def dimension(self) -> int:
        return len(self.entries)

    def is_symmetric(self) -> bool:
        return self.entries == linalg.transpose(self.entries)

    def determinant(self) -> Fraction:
        return linalg.determinant(self.entries)

    def value(self, v: Sequence[RationalLike]) -> Fraction:
        v = linalg.as_vector(v)
        return linalg.bilinear(self.entries, v, v)

    def pair(self, v: Sequence[RationalLike], w: Sequence[RationalLike]) -> Fraction:
        return linalg.bilinear(self.entries, linalg.as_vector(v), linalg.as_vector(w))

    def transformed(self, c: Matrix) -> "GramMatrix":
        """The Gram matrix c^T Q c of the form in the new basis."""
        return GramMatrix(linalg.congruence(self.entries, linalg.as_matrix(c)))

    def require_nondegenerate(self) -> None:
        if not self.is_symmetric():
            raise NotSymmetric("Gram matrix is not symmetric")
        if self.determinant() == 0:
            raise Degenerate("Gram matrix has zero determinant")


@dataclass(frozen=True)
class FormInvariants:
    """
    Complete invariants of a nondegenerate rational form.

    hasse_negative lists the places where eps_v = -1; eps_v = +1 everywhere
    else. Realizability (sign, parity and local rank conditions) is checked
    by validate_invariants, not at construction.
    """

    rank: int
    signature: Tuple[int, int]
    discriminant: SquareClass
    hasse_negative: FrozenSet[Place] = field(default_factory=frozenset)

    def __post_init__(self):
        r, s = self.signature
        if self.rank < 1 or r < 0 or s < 0 or r + s != self.rank:
            raise WrongDimension(
                "Signature must be nonnegative and sum to the rank",
                {"rank": self.rank, "signature": list(self.signature)},
            )
        object.__setattr__(self, "signature", (int(r), int(s)))
        object.__setattr__(self, "hasse_negative", frozenset(as_place(v) for v in self.hasse_negative))

    def epsilon(self, place: PlaceLike) -> int:
        return -1 if as_place(place) in self.hasse_negative else 1

    @property
    def finite_negative(self) -> FrozenSet[Place]:
        return frozenset(v for v in self.hasse_negative if not v.is_infinite)

    @property
    def support_primes(self) -> Tuple[int, ...]:
        return tuple(sorted(v.prime for v in self.finite_negative))


def epsilon(inv: FormInvariants, place: PlaceLike) -> int:
    return inv.epsilon(place)


def _real_epsilon(s: int) -> int:
    return -1 if (s * (s - 1) // 2) % 2 else 1


def _negative_places(places: Iterable[Place], eps) -> FrozenSet[Place]:
    return frozenset(v for v in places if eps(v) == -1)


def validate_invariants(inv: FormInvariants) -> FormInvariants:
    """Raise InvalidTarget unless some rational form has these invariants."""
    r, s = inv.signature
    d = inv.discriminant
    if d.sign != (-1) ** s:
        raise InvalidTarget("Discriminant sign must be (-1)^s", {"disc": str(d), "signature": [r, s]})
    if (INFINITY in inv.hasse_negative) != (_real_epsilon(s) == -1):
        raise InvalidTarget("Hasse invariant at infinity disagrees with the signature", {"signature": [r, s]})
    if len(inv.finite_negative) % 2 != (1 if _real_epsilon(s) == -1 else 0):
        raise InvalidTarget("Hasse invariants violate the product formula", {"hasse_neg": _format(inv)})
    if inv.rank == 1 and inv.finite_negative:
        raise InvalidTarget("A rank 1 form has trivial Hasse invariants", {"hasse_neg": _format(inv)})
    if inv.rank == 2:
        for v in inv.finite_negative:
            if is_square_local(-d.as_rational(), v):
                raise InvalidTarget(
                    "A binary form with -d a local square is hyperbolic there",
                    {"place": str(v), "disc": str(d)},
                )
    return inv


def _format(inv: FormInvariants) -> List[str]:
    return [str(v) for v in sorted(inv.hasse_negative)]


# ---------------------------------------------------------------------------
# Invariant calculus
# ---------------------------------------------------------------------------

def invariants(f: DiagonalForm) -> FormInvariants:
    """Rank, signature, discriminant and Hasse places of a diagonal form."""
    places = support_places(f.entries)
    # eps(<a_1..a_k>) = eps(<a_1..a_{k-1}>) * (a_1...a_{k-1}, a_k)
    prefixes = []
    running = f.entries[0]
    for a in f.entries[1:]:
        prefixes.append((running, a))
        running *= a

    def eps(v: Place) -> int:
        sign = 1
        for prefix, a in prefixes:
            sign *= hilbert_symbol(prefix, a, v)
        return sign

    return FormInvariants(
        rank=f.rank,
        signature=f.signature,
        discriminant=square_class(running),
        hasse_negative=_negative_places(places, eps),
    )


def invariants_of_gram(g: GramMatrix) -> FormInvariants:
    diag, _ = diagonalize(g)
    return invariants(diag)


def sum_invariants(f: FormInvariants, g: FormInvariants) -> FormInvariants:
    """Invariants of f (+) g."""
    df, dg = f.discriminant, g.discriminant
    places = f.hasse_negative | g.hasse_negative | support_places((df.representative, dg.representative))
    return FormInvariants(
        rank=f.rank + g.rank,
        signature=(f.signature[0] + g.signature[0], f.signature[1] + g.signature[1]),
        discriminant=df * dg,
        hasse_negative=_negative_places(
            places, lambda v: f.epsilon(v) * g.epsilon(v) * hilbert_symbol(df, dg, v)
        ),
    )


def scale_invariants(f: FormInvariants, m: RationalLike) -> FormInvariants:
    """Invariants of m * f for a positive rational m."""
    m = as_rational(m)
    if m <= 0:
        raise NonPositiveScalar("Scaling factor must be positive", {"m": str(m)})
    n, d = f.rank, f.discriminant
    branch = n % 4
    if branch == 1:
        twist = None
    elif branch == 2:
        twist = -d.as_rational()
    elif branch == 3:
        twist = Fraction(-1)
    else:
        twist = d.as_rational()
    places = set(f.hasse_negative)
    if twist is not None:
        places |= support_places((m, twist))

    def eps(v: Place) -> int:
        if twist is None:
            return f.epsilon(v)
        return f.epsilon(v) * hilbert_symbol(m, twist, v)

    return FormInvariants(
        rank=n,
        signature=f.signature,
        discriminant=d * square_class(m) if n % 2 else d,
        hasse_negative=_negative_places(places, eps),
    )


def is_equivalent(f: FormInvariants, g: FormInvariants) -> bool:
    return f == g


@dataclass(frozen=True)
class ProjectiveInvariants:
    """Complete invariants of a form up to positive rational scaling."""

    rank: int
    signature: Tuple[int, int]
    discriminant: Optional[SquareClass]
    negative_places: FrozenSet[Place]


def projective_invariants(f: FormInvariants) -> ProjectiveInvariants:
    """
    Odd rank: the places where (d, (-1)^((n-1)/2))_v * eps_v = -1.
    Even rank: d itself, and eps restricted to places where (-1)^(n/2) d is a local square.
    """
    n, d = f.rank, f.discriminant.as_rational()
    if n % 2:
        sign = Fraction((-1) ** ((n - 1) // 2))
        places = f.hasse_negative | support_places((d, sign))
        negative = _negative_places(places, lambda v: hilbert_symbol(d, sign, v) * f.epsilon(v))
        return ProjectiveInvariants(n, f.signature, None, negative)
    twisted = (-1) ** (n // 2) * d
    negative = frozenset(v for v in f.hasse_negative if is_square_local(twisted, v))
    return ProjectiveInvariants(n, f.signature, f.discriminant, negative)


def is_proj_equivalent(f: FormInvariants, g: FormInvariants) -> bool:
    """Is g equivalent to m * f for some positive rational m."""
    if f.rank != g.rank:
        raise RankMismatch("Projective equivalence needs equal ranks", {"ranks": [f.rank, g.rank]})
    return projective_invariants(f) == projective_invariants(g)


def cusp_complement_invariants(q: FormInvariants) -> FormInvariants:
    """Invariants of the positive definite f with q = f (+) <1, -1>."""
    n = q.rank - 2
    if q.signature != (n + 1, 1) or n < 3:
        raise WrongSignature(
            "Cusp complements need signature (n+1, 1) with n >= 3",
            {"signature": list(q.signature)},
        )
    d_f = -q.discriminant
    places = q.hasse_negative | support_places((d_f.representative, -1))
    return FormInvariants(
        rank=n,
        signature=(n, 0),
        discriminant=d_f,
        hasse_negative=_negative_places(places, lambda v: q.epsilon(v) * hilbert_symbol(d_f, -1, v)),
    )


def is_isotropic(f: FormInvariants) -> bool:
    """Does the form represent zero nontrivially over Q (local-global)."""
    r, s = f.signature
    if r == 0 or s == 0:
        return False
    n, d = f.rank, f.discriminant.as_rational()
    if n == 2:
        return (-d) > 0 and square_class(-d).is_square()
    places = f.hasse_negative | support_places((d, -1))
    for v in places:
        if v.is_infinite:
            continue
        if n == 3 and hilbert_symbol(-1, -d, v) != f.epsilon(v):
            return False
        if n == 4 and is_square_local(d, v) and hilbert_symbol(-1, -1, v) != f.epsilon(v):
            return False
    return True


# ---------------------------------------------------------------------------
# Matrix algorithms
# ---------------------------------------------------------------------------

def _swap(work: List[List[Fraction]], c: List[List[Fraction]], i: int, j: int) -> None:
    """Exchange basis vectors i and j."""
    if i == j:
        return
    work[i], work[j] = work[j], work[i]
    for row in work + c:
        row[i], row[j] = row[j], row[i]


def diagonalize(g: GramMatrix) -> Tuple[DiagonalForm, Matrix]:
    """
    Symmetric elimination. Returns (d, c) with c^T g c = diag(d) exactly.

    Pivot rule: first nonzero diagonal entry of the remaining block. When that
    block has a zero diagonal, a pair k, l with g_kl = a != 0 spans a hyperbolic
    plane and is replaced by (e_k/2 + e_l/a, -e_k/2 + e_l/a), giving <1, -1>.
    """
    g.require_nondegenerate()
    n = g.dimension
    work = [list(row) for row in g.entries]
    c = [list(row) for row in linalg.identity(n)]

    def apply(t: List[List[Fraction]]) -> None:
        nonlocal work, c
        tt = tuple(map(tuple, t))
        work = [list(row) for row in linalg.congruence(tuple(map(tuple, work)), tt)]
        c = [list(row) for row in linalg.matmul(tuple(map(tuple, c)), tt)]

    k = 0
    while k < n:
        pivot = next((i for i in range(k, n) if work[i][i] != 0), None)
        t = [list(row) for row in linalg.identity(n)]
        if pivot is None:
            # Zero diagonal: row k is nonzero past k since g is nondegenerate.
            l = next(j for j in range(k + 1, n) if work[k][j] != 0)
            _swap(work, c, k + 1, l)
            a = work[k][k + 1]
            t[k][k], t[k + 1][k] = Fraction(1, 2), 1 / a
            t[k][k + 1], t[k + 1][k + 1] = Fraction(-1, 2), 1 / a
            apply(t)
            continue
        _swap(work, c, k, pivot)
        p = work[k][k]
        for j in range(k + 1, n):
            t[k][j] = -work[k][j] / p
        apply(t)
        k += 1

    result = DiagonalForm(tuple(work[i][i] for i in range(n)))
    logger.debug(f"Diagonalized {n}x{n} Gram matrix to <{result}>")
    return result, tuple(map(tuple, c))


def _extend_basis(vectors: List[Vector], n: int) -> List[Vector]:
    basis = list(vectors)
    for e in linalg.identity(n):
        if len(basis) == n:
            break
        if linalg.rank(tuple(basis + [e])) > len(basis):
            basis.append(e)
    return basis


def split_hyperbolic(g: GramMatrix, iso_basis: Sequence[Sequence[RationalLike]]) -> Matrix:
    """
    Given a basis of an n-dimensional totally isotropic subspace of a
    nondegenerate rank 2n form, return c with c^T g c = diag(1,..,1,-1,..,-1).
    """
    g.require_nondegenerate()
    dim = g.dimension
    vectors = [linalg.as_vector(v) for v in iso_basis]
    if dim % 2 or len(vectors) != dim // 2 or any(len(v) != dim for v in vectors):
        raise WrongDimension(
            "Need n vectors of length 2n",
            {"dimension": dim, "vectors": len(vectors)},
        )
    if linalg.rank(tuple(vectors)) != len(vectors):
        raise WrongDimension("Isotropic vectors are linearly dependent")
    for i, v in enumerate(vectors):
        for w in vectors[i:]:
            if g.pair(v, w) != 0:
                raise NotIsotropic("Vectors do not span a totally isotropic subspace")

    n = dim // 2
    e = linalg.transpose(tuple(_extend_basis(vectors, dim)))
    m = linalg.congruence(g.entries, e)
    a = linalg.submatrix(m, range(0, n), range(n, dim))
    b = linalg.submatrix(m, range(n, dim), range(n, dim))
    a_inv = linalg.inverse(a)
    ident = linalg.identity(n)
    half = Fraction(1, 2)

    # P clears the lower block: P^T M P = [[0, A], [A^T, 0]].
    x = linalg.scale_matrix(linalg.transpose(linalg.matmul(b, a_inv)), -half)
    p = linalg.block([[ident, x], [linalg.zeros(n, n), ident]])
    # N turns [[0, A], [A^T, 0]] into diag(I, -I).
    nmat = linalg.block(
        [
            [linalg.scale_matrix(ident, half), linalg.scale_matrix(ident, -half)],
            [a_inv, a_inv],
        ]
    )
    return linalg.matmul(e, linalg.matmul(p, nmat))


def parabolic_embed(m_f: GramMatrix, a: Matrix, v: Sequence[RationalLike]) -> Matrix:
    """
    Embed (a, v) in O(f) x Q^n into O(f (+) <1, -1>) as

        [[A,        -v,         v      ],
         [v^T M A,  1 - f(v)/2, f(v)/2 ],
         [v^T M A,  -f(v)/2,    1 + f(v)/2]]

    The result fixes the isotropic vector (0, ..., 0, 1, 1).
    """
    a = linalg.as_matrix(a)
    v = linalg.as_vector(v)
    n = m_f.dimension
    if linalg.shape(a) != (n, n) or len(v) != n:
        raise WrongDimension("Isometry and translation must match the form", {"dimension": n})
    if linalg.congruence(m_f.entries, a) != m_f.entries:
        raise NotIsometry("Matrix does not preserve the form")
    fv = m_f.value(v)
    row = linalg.matmul((v,), linalg.matmul(m_f.entries, a))[0]
    half = fv / 2
    top = [tuple(a[i]) + (-v[i], v[i]) for i in range(n)]
    return tuple(top) + (
        row + (1 - half, half),
        row + (-half, 1 + half),
    )


def is_isometry(g: GramMatrix, x: Matrix) -> bool:
    return linalg.congruence(g.entries, linalg.as_matrix(x)) == g.entries
