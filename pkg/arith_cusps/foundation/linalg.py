"""Exact matrix helpers over QQ, backed by sympy's DomainMatrix."""

from fractions import Fraction
from typing import List, Sequence, Tuple

from sympy import QQ
from sympy.polys.matrices import DomainMatrix

from arith_cusps.errors import Singular, WrongDimension
from arith_cusps.foundation.rational import as_rational

Vector = Tuple[Fraction, ...]
Matrix = Tuple[Vector, ...]


def as_matrix(rows: Sequence[Sequence]) -> Matrix:
    """Coerce nested sequences to a rectangular tuple-of-tuples of Fractions."""
    matrix = tuple(tuple(as_rational(x) for x in row) for row in rows)
    if matrix and any(len(row) != len(matrix[0]) for row in matrix):
        raise WrongDimension("Ragged matrix rows", {"lengths": [len(r) for r in matrix]})
    return matrix


def as_vector(values: Sequence) -> Vector:
    return tuple(as_rational(x) for x in values)


def shape(m: Matrix) -> Tuple[int, int]:
    return (len(m), len(m[0]) if m else 0)


def is_square_matrix(m: Matrix) -> bool:
    rows, cols = shape(m)
    return rows == cols


def to_domain(m: Matrix) -> DomainMatrix:
    rows, cols = shape(m)
    data = [[QQ(x.numerator, x.denominator) for x in row] for row in m]
    return DomainMatrix(data, (rows, cols), QQ)


def _from_element(x) -> Fraction:
    return Fraction(int(x.numerator), int(x.denominator))


def from_domain(dm: DomainMatrix) -> Matrix:
    return tuple(tuple(_from_element(x) for x in row) for row in dm.to_list())


def identity(n: int) -> Matrix:
    return tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))


def zeros(rows: int, cols: int) -> Matrix:
    return tuple(tuple(Fraction(0) for _ in range(cols)) for _ in range(rows))


def diagonal(entries: Sequence[Fraction]) -> Matrix:
    n = len(entries)
    return tuple(
        tuple(as_rational(entries[i]) if i == j else Fraction(0) for j in range(n)) for i in range(n)
    )


def transpose(m: Matrix) -> Matrix:
    return tuple(zip(*m)) if m else m


def matmul(a: Matrix, b: Matrix) -> Matrix:
    if shape(a)[1] != shape(b)[0]:
        raise WrongDimension("Incompatible shapes for product", {"left": shape(a), "right": shape(b)})
    return from_domain(to_domain(a) * to_domain(b))


def congruence(g: Matrix, c: Matrix) -> Matrix:
    """c^T g c."""
    return matmul(transpose(c), matmul(g, c))


def determinant(m: Matrix) -> Fraction:
    if not is_square_matrix(m):
        raise WrongDimension("Determinant of a non-square matrix", {"shape": shape(m)})
    if not m:
        return Fraction(1)
    return _from_element(to_domain(m).det())


def inverse(m: Matrix) -> Matrix:
    if determinant(m) == 0:
        raise Singular("Matrix is not invertible")
    return from_domain(to_domain(m).inv())


def rank(m: Matrix) -> int:
    if not m or not m[0]:
        return 0
    return to_domain(m).rank()


def nullspace(m: Matrix) -> List[Vector]:
    """A basis of {x : m x = 0}."""
    rows, cols = shape(m)
    if rows == 0:
        return list(identity(cols))
    basis = to_domain(m).nullspace()
    return [row for row in from_domain(basis) if any(row)]


def mat_vec(m: Matrix, v: Vector) -> Vector:
    return tuple(sum((a * b for a, b in zip(row, v)), Fraction(0)) for row in m)


def bilinear(g: Matrix, v: Vector, w: Vector) -> Fraction:
    """v^T g w."""
    return sum((a * b for a, b in zip(v, mat_vec(g, w))), Fraction(0))


def block(rows: Sequence[Sequence[Matrix]]) -> Matrix:
    """Assemble a matrix from a grid of blocks with compatible shapes."""
    result = []
    for block_row in rows:
        height = shape(block_row[0])[0]
        for i in range(height):
            result.append(tuple(x for blk in block_row for x in blk[i]))
    return tuple(result)


def block_diagonal(a: Matrix, b: Matrix) -> Matrix:
    (ra, ca), (rb, cb) = shape(a), shape(b)
    return block([[a, zeros(ra, cb)], [zeros(rb, ca), b]])


def scale_matrix(m: Matrix, k: Fraction) -> Matrix:
    return tuple(tuple(k * x for x in row) for row in m)


def add(a: Matrix, b: Matrix) -> Matrix:
    return tuple(tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def sub(a: Matrix, b: Matrix) -> Matrix:
    return tuple(tuple(x - y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def submatrix(m: Matrix, rows: range, cols: range) -> Matrix:
    return tuple(tuple(m[i][j] for j in cols) for i in rows)


def format_matrix(m: Matrix) -> List[List[str]]:
    return [[str(x) for x in row] for row in m]
