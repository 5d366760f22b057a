"""Generating polynomials of nonsingular matrices and semipositive cones.

For ``D_j = diag(a_1j, ..., a_nj)`` the polynomial ``det(sum_j x_j D_j)`` is the
product of the linear forms ``(A x)_i``; it is hyperbolic in the direction e
solving ``A e = 1``, and its closed hyperbolicity cone is ``{x : A x >= 0}``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .certificate import Certificate, Status
from .cones import ConeError, GeneratedCone, lp_feasible_point
from .exact import DimensionError, Matrix, Vector, det, inverse, mat, matvec, rank, solve, vec
from .polycore import Polynomial


def generating_polynomial(A: Sequence[Sequence]) -> Polynomial:
    """``prod_i (sum_j a_ij x_j)``, expanded exactly."""
    A = mat(A)
    n = len(A)
    if any(len(r) != n for r in A):
        raise DimensionError("generating_polynomial needs a square matrix")
    out = Polynomial.constant(n, 1)
    for row in A:
        out = out * Polynomial.linear_form(row)
    return out


def hyperbolic_direction(A: Sequence[Sequence]) -> Vector:
    """The solution e of ``A e = 1``."""
    A = mat(A)
    try:
        return solve(A, [Fraction(1)] * len(A))
    except ValueError:
        raise ValueError("matrix is singular") from None


@dataclass(frozen=True)
class SemipositiveModel:
    A: Matrix
    fA: Polynomial
    e: Vector

    @classmethod
    def from_matrix(cls, A: Sequence[Sequence]) -> "SemipositiveModel":
        A = mat(A)
        if det(A) == 0:
            raise ValueError("matrix is singular")
        return cls(A, generating_polynomial(A), hyperbolic_direction(A))


def hyp_cone_contains(A: Sequence[Sequence], x: Sequence, strict: bool = False) -> bool:
    """``A x >= 0`` (or ``> 0``) componentwise."""
    A = mat(A)
    if len(x) != len(A[0]):
        raise DimensionError("vector length does not match the matrix")
    y = matvec(A, vec(x))
    return all(a > 0 for a in y) if strict else all(a >= 0 for a in y)


def semipositive_cone_contains(A: Sequence[Sequence], x: Sequence, Ktilde: GeneratedCone) -> bool:
    return Ktilde.contains(x) and hyp_cone_contains(A, x)


def _is_orthant(K: GeneratedCone) -> bool:
    if len(K.generators) != K.nvars:
        return False
    hit = set()
    for u in K.generators:
        nz = [i for i, a in enumerate(u) if a != 0]
        if len(nz) != 1 or u[nz[0]] < 0:
            return False
        hit.add(nz[0])
    return len(hit) == K.nvars


def is_semipositive(A: Sequence[Sequence], Ktilde: GeneratedCone, seed: int = 0, samples: int = 200) -> Certificate:
    """Is there an x in int K with A x in int K?

    Orthant: exact LP feasibility of ``{x >= 1, A x >= 1}`` (scaling makes the
    strict version equivalent), so both answers are certified.  Other
    polyhedral cones: seeded interior sampling, which can only certify yes.
    """
    A = mat(A)
    n = len(A)
    if Ktilde.nvars != n:
        raise DimensionError("matrix and cone dimensions differ")
    if not Ktilde.properness().full_dimensional:
        raise ConeError("cone is not full-dimensional")
    if _is_orthant(Ktilde):
        # x = 1 + y, y >= 0, A y - s = 1 - A 1, s >= 0
        ones = [Fraction(1)] * n
        A1 = matvec(A, ones)
        rows = [list(A[i]) + [Fraction(-int(i == k)) for k in range(n)] for i in range(n)]
        sol = lp_feasible_point(rows, [1 - a for a in A1])
        if sol is None:
            return Certificate(Status.NO, witness={"reason": "LP {x >= 1, Ax >= 1} infeasible"}, samples_used=1, seed=seed)
        x = tuple(1 + sol[i] for i in range(n))
        return Certificate(Status.YES, witness={"x": x, "Ax": matvec(A, x)}, samples_used=1, seed=seed)
    for k, x in enumerate(Ktilde.interior_samples(samples, seed=seed)):
        y = matvec(A, x)
        if Ktilde.contains_interior(y):
            return Certificate(Status.YES, witness={"x": x, "Ax": y}, samples_used=k + 1, seed=seed)
    return Certificate(Status.UNKNOWN, samples_used=samples, seed=seed)


@dataclass(frozen=True)
class Preservation:
    forward: bool
    equality: bool


def preserves_cone(A: Sequence[Sequence], K: GeneratedCone) -> Preservation:
    """``A(K) <= K`` via generator images, and ``A(K) = K`` via ``A^{-1}`` images too."""
    A = mat(A)
    if len(A) != K.nvars:
        raise DimensionError("matrix and cone dimensions differ")
    try:
        Ainv = inverse(A)
    except ValueError:
        raise ValueError("matrix is singular") from None
    forward = all(K.contains(matvec(A, u)) for u in K.generators)
    equality = forward and all(K.contains(matvec(Ainv, u)) for u in K.generators)
    return Preservation(forward, equality)


def halfspace_cone_rays(H: Sequence[Sequence], max_dim: int = 6) -> GeneratedCone:
    """Extreme rays of the pointed cone ``{x : H x >= 0}``.

    Every extreme ray is cut out by n-1 linearly independent tight rows;
    enumerate those subsets, take the one-dimensional kernel, and keep the
    sign that satisfies all inequalities.
    """
    H = mat(H)
    n = len(H[0])
    if n > max_dim:
        raise ValueError(f"ray enumeration is limited to dimension {max_dim}")
    rays: list[Vector] = []
    for subset in itertools.combinations(range(len(H)), n - 1):
        rows = [H[i] for i in subset]
        if rank(rows) != n - 1:
            continue
        r = _kernel_vector(rows, n)
        for cand in (r, tuple(-a for a in r)):
            if all(sum(h * c for h, c in zip(row, cand)) >= 0 for row in H):
                rays.append(cand)
    if not rays:
        raise ConeError("halfspace system has no nonzero solutions")
    return GeneratedCone(rays, nvars=n)


def _kernel_vector(rows: list[Vector], n: int) -> Vector:
    # a nonzero vector orthogonal to n-1 independent rows: generalized cross product
    out = []
    for j in range(n):
        minor = [tuple(r[k] for k in range(n) if k != j) for r in rows]
        out.append((-1) ** j * det(minor) if minor else Fraction(1))
    scale = max(abs(a) for a in out)
    return tuple(a / scale for a in out)


def semipositive_cone(A: Sequence[Sequence]) -> GeneratedCone:
    """``K_A = {x >= 0 : A x >= 0}`` materialized by its extreme rays."""
    A = mat(A)
    n = len(A)
    eye = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    return halfspace_cone_rays(eye + [list(r) for r in A])


def hyperbolicity_cone(A: Sequence[Sequence]) -> GeneratedCone:
    """``{x : A x >= 0}`` for nonsingular A; its generators are the columns of ``A^{-1}``."""
    Ainv = inverse(mat(A))
    return GeneratedCone([[Ainv[i][j] for i in range(len(Ainv))] for j in range(len(Ainv))])


def matrix_from_json(data) -> Matrix:
    if not isinstance(data, dict) or "rows" not in data:
        raise ValueError("matrix JSON is missing field 'rows'")
    try:
        M = mat(data["rows"])
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"field 'rows': {exc}") from None
    if not M:
        raise ValueError("field 'rows' is empty")
    return M


def as_float_matrix(A: Matrix) -> np.ndarray:
    return np.array([[float(a) for a in r] for r in A], dtype=float)
