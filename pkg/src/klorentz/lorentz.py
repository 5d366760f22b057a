"""Certifiers for K-Lorentzian, completely log-concave and hyperbolic forms,
plus Rayleigh matrices and Rayleigh differences.

Positive answers to the universally quantified properties are semi-decided:
a violation is reported as ``CertifiedNo`` with an exactly re-verifiable
witness, otherwise the verdict is ``Unknown`` together with the number of
checks performed.  The exceptions are conditions that are bilinear in the
cone, where the finite generator scan is complete.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import realroots
from .certificate import Certificate, Status
from .cones import GeneratedCone
from .exact import DimensionError, Vector, vec
from .polycore import Polynomial, SymMatrix

PSD_TOL = 1e-9


@dataclass(frozen=True)
class Inertia:
    n_plus: int
    n_minus: int
    n_zero: int

    @property
    def n(self) -> int:
        return self.n_plus + self.n_minus + self.n_zero

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.n_plus, self.n_minus, self.n_zero)


def inertia(Q: SymMatrix) -> Inertia:
    """Exact signature by symmetric-pivoted LDL^T over the rationals.

    A nonzero diagonal entry is used as a 1x1 pivot.  When the remaining
    diagonal is all zero but some off-diagonal ``b`` is not, the 2x2 block
    ``[[0, b], [b, 0]]`` is eliminated and contributes one positive and one
    negative eigenvalue.
    """
    M = [list(r) for r in Q.entries]
    plus = minus = 0
    idx = list(range(Q.n))
    while idx:
        piv = next((i for i in idx if M[i][i] != 0), None)
        if piv is not None:
            d = M[piv][piv]
            if d > 0:
                plus += 1
            else:
                minus += 1
            rest = [i for i in idx if i != piv]
            for i in rest:
                if M[i][piv] == 0:
                    continue
                f = M[i][piv] / d
                for j in rest:
                    M[i][j] -= f * M[piv][j]
            idx = rest
            continue
        pair = next(((i, j) for i in idx for j in idx if i < j and M[i][j] != 0), None)
        if pair is None:
            break
        p, q = pair
        b = M[p][q]
        plus += 1
        minus += 1
        rest = [i for i in idx if i not in pair]
        # Schur complement of E = [[0, b], [b, 0]]:  S = M - B E^{-1} B^T
        for i in rest:
            for j in rest:
                M[i][j] -= (M[i][p] * M[q][j] + M[i][q] * M[p][j]) / b
        idx = rest
    return Inertia(plus, minus, Q.n - plus - minus)


def _psd_float(M: SymMatrix, tol: float = PSD_TOL) -> tuple[bool, float]:
    arr = M.to_numpy()
    scale = max(1.0, float(np.abs(arr).max(initial=0.0)))
    lo = float(np.linalg.eigvalsh(arr).min()) if M.n else 0.0
    return lo >= -tol * scale, lo


# -- quadratic forms ------------------------------------------------------------


def quadratic_lorentzian(
    Q: SymMatrix, K: GeneratedCone, seed: int = 0, pair_samples: int = 16
) -> Certificate:
    """Is ``x^T Q x`` K-Lorentzian?

    Needs exactly one positive eigenvalue and ``y^T Q x > 0`` on ``int K``.
    With signature (1, n-1) and K acute w.r.t. Q, one interior point with
    ``x0^T Q x0 > 0`` forces the strict inequality on all of ``int K`` (reverse
    Cauchy-Schwarz), which is what ``CertifiedYes`` rests on.
    """
    if Q.n != K.nvars:
        raise DimensionError("matrix and cone dimensions differ")
    inert = inertia(Q)
    used = 1
    if inert.n_plus != 1:
        return Certificate(Status.NO, witness={"inertia": inert.as_tuple()}, samples_used=used, seed=seed)
    acute = K.acute_wrt(Q, seed=seed)
    used += acute.samples_used
    if acute.no:
        return Certificate(Status.NO, witness=acute.witness, samples_used=used, seed=seed)
    points = K.interior_samples(2 * pair_samples, seed=seed)
    for x, y in zip(points[::2], points[1::2]):
        used += 1
        val = Q.bilinear(y, x)
        if val <= 0:
            return Certificate(
                Status.NO, witness={"x": x, "y": y, "value": val}, samples_used=used, seed=seed
            )
    x0 = points[0]
    details = {"inertia": inert.as_tuple(), "x0_value": Q.quad(x0)}
    if inert.n_zero == 0 and Q.quad(x0) > 0:
        return Certificate(Status.YES, samples_used=used, seed=seed, details=details)
    return Certificate(Status.UNKNOWN, samples_used=used, seed=seed, details=details)


def _quadratic_limit_violation(Q: SymMatrix, K: GeneratedCone):
    """Violations that survive the limit from interior directions to boundary ones.

    Eigenvalues and pairings are continuous in the directions, so a boundary
    tuple can legitimately lose its positive eigenvalue or have zero
    pairings, but never gain a second positive eigenvalue or a negative pairing.
    """
    inert = inertia(Q)
    if inert.n_plus > 1:
        return {"inertia": inert.as_tuple()}
    acute = K.acute_wrt(Q)
    if acute.no:
        return acute.witness
    return None


def _derive_along(f: Polynomial, directions: Iterable[Sequence]) -> Polynomial:
    g = f
    for a in directions:
        g = g.dir_derivative(a)
    return g


def k_lorentzian_check(
    f: Polynomial, K: GeneratedCone, samples: int = 100, seed: int = 0, max_generator_tuples: int = 2000
) -> Certificate:
    """Search for a violation of K-Lorentzianity of a homogeneous form.

    Degree <= 1: nonnegativity on the generators (complete for linear forms).
    Degree 2: :func:`quadratic_lorentzian` (may certify).
    Degree >= 3: quadratics ``D_{a_1} ... D_{a_{d-2}} f`` for every
    (d-2)-multiset of generators (limit test) and for ``samples`` tuples of
    seeded interior points (full test).  Never certifies yes.
    """
    d = f.is_homogeneous()
    if d is None:
        raise ValueError("k_lorentzian_check requires a homogeneous form")
    if f.nvars != K.nvars:
        raise DimensionError("polynomial and cone dimensions differ")
    if d <= 1:
        for u in K.generators:
            val = f.eval(u)
            if val < 0:
                return Certificate(Status.NO, witness={"point": u, "value": val}, samples_used=1, seed=seed)
        return Certificate(Status.YES, samples_used=len(K.generators), seed=seed)
    if d == 2:
        return quadratic_lorentzian(SymMatrix.of_quadratic(f), K, seed=seed)

    used = 0
    for tup in itertools.islice(
        itertools.combinations_with_replacement(range(len(K.generators)), d - 2), max_generator_tuples
    ):
        used += 1
        dirs = [K.generators[i] for i in tup]
        Q = SymMatrix.of_quadratic(_derive_along(f, dirs))
        bad = _quadratic_limit_violation(Q, K)
        if bad is not None:
            return Certificate(
                Status.NO,
                witness={"tuple": dirs, "kind": "generator", "quadratic": Q, "violation": bad},
                samples_used=used,
                seed=seed,
            )
    rng = np.random.default_rng(seed)
    for s in range(samples):
        used += 1
        dirs = [K.interior_sample(rng) for _ in range(d - 2)]
        Q = SymMatrix.of_quadratic(_derive_along(f, dirs))
        verdict = quadratic_lorentzian(Q, K, seed=seed + s, pair_samples=4)
        if verdict.no:
            return Certificate(
                Status.NO,
                witness={"tuple": dirs, "kind": "interior", "quadratic": Q, "violation": verdict.witness},
                samples_used=used,
                seed=seed,
            )
    return Certificate(Status.UNKNOWN, samples_used=used, seed=seed, details={"violations": 0})


# -- log-concavity --------------------------------------------------------------


def rayleigh_matrix(f: Polynomial, x: Sequence) -> SymMatrix:
    """``M_f(x) = grad f grad f^T - f(x) Hess f(x)``, exact."""
    g = f.gradient(x)
    H = f.hessian(x)
    fx = f.eval(x)
    n = f.nvars
    return SymMatrix(tuple(tuple(g[i] * g[j] - fx * H[i, j] for j in range(n)) for i in range(n)))


def clc_check(f: Polynomial, K: GeneratedCone, samples: int = 200, seed: int = 0) -> Certificate:
    """Sample derivative strings ``D_{a_1} ... D_{a_m} f`` and test log-concavity.

    At an interior point x, log-concavity of g means ``M_g(x)`` is PSD; the
    test uses floating eigenvalues with tolerance scaled by the largest entry.
    A string that is nonpositive at an interior point is itself a violation.
    """
    d = f.is_homogeneous()
    if d is None:
        raise ValueError("clc_check requires a homogeneous form")
    if f.nvars != K.nvars:
        raise DimensionError("polynomial and cone dimensions differ")
    rng = np.random.default_rng(seed)
    used = 0
    for s in range(samples):
        m = 0 if s == 0 else int(rng.integers(0, max(d, 1)))
        dirs = [K.interior_sample(rng) for _ in range(m)]
        x = K.interior_sample(rng)
        g = _derive_along(f, dirs)
        if g.is_zero():
            continue
        used += 1
        gx = g.eval(x)
        if gx <= 0:
            return Certificate(
                Status.NO,
                witness={"directions": dirs, "x": x, "value": gx, "reason": "nonpositive"},
                samples_used=used,
                seed=seed,
            )
        M = rayleigh_matrix(g, x)
        ok, lo = _psd_float(M)
        if not ok:
            return Certificate(
                Status.NO,
                witness={"directions": dirs, "x": x, "min_eigenvalue": lo, "reason": "not log-concave"},
                samples_used=used,
                seed=seed,
            )
    return Certificate(Status.UNKNOWN, samples_used=used, seed=seed, details={"violations": 0})


def ulc_bivariate(f: Polynomial) -> bool:
    """Ultra log-concavity of the coefficient sequence of a binary form.

    ``f = sum_k c_k x1^(n-k) x2^k``; requires ``(c_k / C(n,k))^2 >=
    (c_{k-1} / C(n,k-1)) (c_{k+1} / C(n,k+1))`` for ``1 <= k <= n-1``.
    """
    if f.nvars != 2:
        raise ValueError("ulc_bivariate needs a polynomial in two variables")
    n = f.is_homogeneous()
    if n is None:
        raise ValueError("ulc_bivariate needs a homogeneous polynomial")
    c = [f.coefficient((n - k, k)) for k in range(n + 1)]
    if any(a < 0 for a in c):
        raise ValueError("negative coefficient")
    support = [k for k, a in enumerate(c) if a != 0]
    if support and support != list(range(support[0], support[-1] + 1)):
        raise ValueError("coefficient support has internal zeros")
    norm = [a / math.comb(n, k) for k, a in enumerate(c)]
    return all(norm[k] ** 2 >= norm[k - 1] * norm[k + 1] for k in range(1, n))


# -- hyperbolicity ---------------------------------------------------------------


def lattice_points(n: int, radius: int = 3) -> list[Vector]:
    """Integer points of ``[-radius, radius]^n`` ordered by max-norm, then lexicographically."""
    pts = itertools.product(range(-radius, radius + 1), repeat=n)
    return [vec(p) for p in sorted(pts, key=lambda p: (max(map(abs, p)), p))]


def hyperbolicity_sample_points(
    n: int, samples: int, seed: int, points: Iterable[Sequence] = (), lattice_cap: int = 4096
) -> list[Vector]:
    """User points, then the lattice ``[-3,3]^n`` (when at most ``lattice_cap`` points),
    then ``samples`` seeded rational points of the cube with denominators up to 4."""
    out = [vec(p) for p in points]
    if 7**n <= lattice_cap:
        out.extend(lattice_points(n))
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        den = int(rng.integers(1, 5))
        out.append(tuple(Fraction(int(k), den) for k in rng.integers(-3 * den, 3 * den + 1, size=n)))
    return out


def hyperbolicity_check(
    f: Polynomial, e: Sequence, samples: int = 200, seed: int = 0, points: Iterable[Sequence] = ()
) -> Certificate:
    """Look for a point x where ``t -> f(x + t e)`` is not real-rooted.

    The witness is the first failing point in sample order (user points
    first, then the lattice, then random points).
    """
    if f.is_homogeneous() is None:
        raise ValueError("hyperbolicity_check requires a homogeneous form")
    e = vec(e)
    if f.eval(e) == 0:
        raise ValueError("f(e) = 0: e cannot be a hyperbolic direction")
    pts = hyperbolicity_sample_points(f.nvars, samples, seed, points)
    for k, x in enumerate(pts):
        coeffs = f.restriction_taylor(x, e)
        if not realroots.is_real_rooted(coeffs):
            return Certificate(
                Status.NO,
                witness={"x": x, "restriction": coeffs},
                samples_used=k + 1,
                seed=seed,
            )
    return Certificate(Status.UNKNOWN, samples_used=len(pts), seed=seed, details={"violations": 0})


# -- Rayleigh differences -----------------------------------------------------------


def rayleigh_diagonal(f: Polynomial, x: Sequence, u: Sequence) -> Fraction:
    """``(D_u f(x))^2 - f(x) D_u^2 f(x)``."""
    du = f.dir_derivative(u)
    return du.eval(x) ** 2 - f.eval(x) * du.dir_derivative(u).eval(x)


def rayleigh_cross(f: Polynomial, x: Sequence, v: Sequence, w: Sequence) -> Fraction:
    """``D_v f(x) D_w f(x) - f(x) D_v D_w f(x)``."""
    dv = f.dir_derivative(v)
    dw = f.dir_derivative(w)
    return dv.eval(x) * dw.eval(x) - f.eval(x) * dv.dir_derivative(w).eval(x)


def rayleigh_cross_poly(f: Polynomial, v: Sequence, w: Sequence) -> Polynomial:
    dv = f.dir_derivative(v)
    dw = f.dir_derivative(w)
    return dv * dw - f * dv.dir_derivative(w)


def delta_ij(f: Polynomial, i: int, j: int) -> Polynomial:
    """Coordinate Rayleigh difference ``d_i f d_j f - f d_i d_j f``."""
    fi = f.partial(i)
    return fi * f.partial(j) - f * fi.partial(j)


def log_hessian_identity_check(f: Polynomial, x: Sequence) -> Fraction:
    """Max-abs entry of ``M_f(x) + f(x)^2 Hess(log f)(x)``; zero when the identity holds."""
    fx = f.eval(x)
    if fx <= 0:
        raise ValueError("log f needs f(x) > 0")
    g = f.gradient(x)
    H = f.hessian(x)
    M = rayleigh_matrix(f, x)
    n = f.nvars
    worst = Fraction(0)
    for i in range(n):
        for j in range(n):
            log_h = H[i, j] / fx - g[i] * g[j] / fx**2
            worst = max(worst, abs(M[i, j] + fx**2 * log_h))
    return worst
