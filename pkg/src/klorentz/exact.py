"""Exact rational helpers shared by the polynomial, cone and matrix code.

Rationals are :class:`fractions.Fraction` throughout.  Vectors are tuples of
fractions and matrices are tuples of row tuples.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

Vector = tuple[Fraction, ...]
Matrix = tuple[tuple[Fraction, ...], ...]


class DimensionError(ValueError):
    """Raised when vector/matrix/polynomial dimensions disagree."""


def to_fraction(value) -> Fraction:
    """Convert ints, fractions, ``"p/q"`` strings or floats to a Fraction.

    Floats are converted exactly (binary expansion), which is what tolerance
    mode entry points want; exact entry points should pass strings or ints.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, float):
        return Fraction(value)
    # numpy scalars
    if hasattr(value, "item"):
        return to_fraction(value.item())
    raise TypeError(f"cannot interpret {value!r} as a rational number")


def vec(values: Iterable) -> Vector:
    return tuple(to_fraction(v) for v in values)


def mat(rows: Iterable[Iterable]) -> Matrix:
    out = tuple(vec(r) for r in rows)
    if out and any(len(r) != len(out[0]) for r in out):
        raise DimensionError("ragged matrix rows")
    return out


def frac_str(q: Fraction) -> str:
    """Canonical ``"p/q"`` form used by the JSON schemas."""
    return f"{q.numerator}/{q.denominator}"


def dot(x: Sequence[Fraction], y: Sequence[Fraction]) -> Fraction:
    if len(x) != len(y):
        raise DimensionError(f"length {len(x)} vs {len(y)}")
    return sum((a * b for a, b in zip(x, y)), Fraction(0))


def matvec(A: Sequence[Sequence[Fraction]], x: Sequence[Fraction]) -> Vector:
    return tuple(dot(row, x) for row in A)


def transpose(A: Matrix) -> Matrix:
    return tuple(zip(*A)) if A else ()


def matmul(A: Matrix, B: Matrix) -> Matrix:
    Bt = transpose(B)
    return tuple(tuple(dot(r, c) for c in Bt) for r in A)


def identity(n: int) -> Matrix:
    return tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))


def _row_reduce(M: list[list[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form in place; returns (rows, pivot columns)."""
    rows = len(M)
    cols = len(M[0]) if rows else 0
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        p = next((i for i in range(r, rows) if M[i][c] != 0), None)
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        inv = 1 / M[r][c]
        M[r] = [a * inv for a in M[r]]
        for i in range(rows):
            if i != r and M[i][c] != 0:
                factor = M[i][c]
                M[i] = [a - factor * b for a, b in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return M, pivots


def rank(A: Sequence[Sequence[Fraction]]) -> int:
    if not A:
        return 0
    _, piv = _row_reduce([list(map(to_fraction, r)) for r in A])
    return len(piv)


def solve(A: Matrix, b: Sequence[Fraction]) -> Vector:
    """Solve the square system ``A x = b`` exactly; ValueError if singular."""
    n = len(A)
    if any(len(r) != n for r in A) or len(b) != n:
        raise DimensionError("solve needs a square system")
    aug = [list(A[i]) + [to_fraction(b[i])] for i in range(n)]
    red, piv = _row_reduce(aug)
    if piv[:n] != list(range(n)) or len(piv) > n:
        raise ValueError("singular matrix")
    return tuple(red[i][n] for i in range(n))


def inverse(A: Matrix) -> Matrix:
    n = len(A)
    aug = [list(A[i]) + [Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    red, piv = _row_reduce(aug)
    if piv[:n] != list(range(n)):
        raise ValueError("singular matrix")
    return tuple(tuple(red[i][n:]) for i in range(n))


def det(A: Matrix) -> Fraction:
    n = len(A)
    M = [list(r) for r in A]
    sign = 1
    out = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if M[i][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            M[c], M[p] = M[p], M[c]
            sign = -sign
        out *= M[c][c]
        for i in range(c + 1, n):
            f = M[i][c] / M[c][c]
            if f:
                M[i] = [a - f * b for a, b in zip(M[i], M[c])]
    return sign * out
