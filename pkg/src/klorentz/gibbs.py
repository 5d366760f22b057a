"""Gibbs measures ``mu_x(alpha) = c_alpha x^alpha / f(x)`` of polynomials with
nonnegative coefficients.

Moments are computed by enumerating the support (exact); derivative-based
formulas are kept separate so each can check the other.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Sequence

import numpy as np

from .certificate import Certificate, Status
from .cones import GeneratedCone
from .exact import DimensionError, Vector, to_fraction, vec
from .lorentz import delta_ij
from .polycore import Exponent, Polynomial, SymMatrix

MAX_SUPPORT = 10**6


@dataclass(frozen=True)
class GibbsModel:
    f: Polynomial
    support: tuple[Exponent, ...]

    @classmethod
    def from_polynomial(cls, f: Polynomial) -> "GibbsModel":
        if f.is_zero():
            raise ValueError("the zero polynomial has no Gibbs measure")
        if len(f) > MAX_SUPPORT:
            raise ValueError(f"support larger than {MAX_SUPPORT} terms")
        if any(c < 0 for _, c in f.items()):
            raise ValueError("Gibbs measures need nonnegative coefficients")
        return cls(f, tuple(e for e, _ in f.items()))

    @property
    def nvars(self) -> int:
        return self.f.nvars

    def _weights(self, x: Sequence) -> tuple[Vector, dict[Exponent, Fraction], Fraction]:
        if len(x) != self.nvars:
            raise DimensionError(f"point of length {len(x)} for {self.nvars} variables")
        x = vec(x)
        if any(a <= 0 for a in x):
            raise ValueError("Gibbs measure needs a strictly positive point")
        w = {}
        for e in self.support:
            t = self.f.coefficient(e)
            for xi, k in zip(x, e):
                t *= xi**k
            w[e] = t
        return x, w, sum(w.values(), Fraction(0))

    def distribution(self, x: Sequence) -> dict[Exponent, Fraction]:
        _, w, Z = self._weights(x)
        return {e: c / Z for e, c in w.items()}

    def prob(self, x: Sequence, alpha: Sequence[int]) -> Fraction:
        dist = self.distribution(x)
        return dist.get(tuple(alpha), Fraction(0))

    def mean(self, x: Sequence) -> Vector:
        dist = self.distribution(x)
        return tuple(
            sum((p * e[i] for e, p in dist.items()), Fraction(0)) for i in range(self.nvars)
        )

    def mean_from_gradient(self, x: Sequence) -> Vector:
        """``x_i d_i f(x) / f(x)``."""
        x = vec(x)
        fx = self.f.eval(x)
        return tuple(xi * gi / fx for xi, gi in zip(x, self.f.gradient(x)))

    def covariance(self, x: Sequence) -> SymMatrix:
        dist = self.distribution(x)
        mu = self.mean(x)
        n = self.nvars
        rows = [
            [sum((p * (e[i] - mu[i]) * (e[j] - mu[j]) for e, p in dist.items()), Fraction(0)) for j in range(n)]
            for i in range(n)
        ]
        return SymMatrix.from_rows(rows)

    def _log_partition_decimal(self, theta: Sequence[Decimal]) -> Decimal:
        x = [t.exp() for t in theta]
        total = Decimal(0)
        for e, c in self.f.items():
            term = Decimal(c.numerator) / Decimal(c.denominator)
            for xi, k in zip(x, e):
                term *= xi**k
            total += term
        return total.ln()

    def theta_hessian_fd(self, x: Sequence, step: float = 1e-4, digits: int = 50) -> np.ndarray:
        """Central finite-difference Hessian of ``theta -> log f(e^theta)`` at ``theta = log x``.

        The four-point stencil is evaluated in ``digits``-digit decimal
        arithmetic at steps h and 2h and Richardson-extrapolated, so neither
        float64 cancellation nor the O(h^2) truncation term limits accuracy.
        """
        n = self.nvars
        with localcontext() as ctx:
            ctx.prec = digits
            theta0 = [Decimal(to_fraction(a).numerator).ln() - Decimal(to_fraction(a).denominator).ln() for a in x]
            h = Decimal(repr(float(step)))
            cache: dict[tuple[int, ...], Decimal] = {}

            def L(offset: tuple[int, ...]) -> Decimal:
                # offset in units of h
                if offset not in cache:
                    cache[offset] = self._log_partition_decimal([t + k * h for t, k in zip(theta0, offset)])
                return cache[offset]

            def stencil(i: int, j: int, m: int) -> Decimal:
                def shifted(si: int, sj: int) -> Decimal:
                    off = [0] * n
                    off[i] += si * m
                    off[j] += sj * m
                    return L(tuple(off))

                return (shifted(1, 1) - shifted(1, -1) - shifted(-1, 1) + shifted(-1, -1)) / (4 * (m * h) ** 2)

            H = np.zeros((n, n))
            for i in range(n):
                for j in range(i, n):
                    H[i, j] = H[j, i] = float((4 * stencil(i, j, 1) - stencil(i, j, 2)) / 3)
        return H

    def inclusion_probabilities(self, x: Sequence, i: int, j: int) -> dict[str, Fraction]:
        """``P(i in S)``, ``P(j in S)``, ``P(i, j in S)`` with S the support set of alpha."""
        dist = self.distribution(x)
        pi = sum((p for e, p in dist.items() if e[i] > 0), Fraction(0))
        pj = sum((p for e, p in dist.items() if e[j] > 0), Fraction(0))
        pij = sum((p for e, p in dist.items() if e[i] > 0 and e[j] > 0), Fraction(0))
        return {"P_i": pi, "P_j": pj, "P_ij": pij}


def is_multiaffine(f: Polynomial) -> bool:
    return all(k <= 1 for e, _ in f.items() for k in e)


def admissible_pairs(K: GeneratedCone) -> list[tuple[int, int]]:
    """Index pairs ``i <= j`` with both coordinate rays in K."""
    n = K.nvars
    idx = [i for i in range(n) if K.contains([int(k == i) for k in range(n)])]
    return [(i, j) for a, i in enumerate(idx) for j in idx[a:]]


def rayleigh_measure_check(
    model: GibbsModel, K: GeneratedCone, samples: int = 100, seed: int = 0
) -> Certificate:
    """Search for ``w in int K`` and admissible i, j with ``Delta_ij f(w) < 0``."""
    if K.nvars != model.nvars:
        raise DimensionError("model and cone dimensions differ")
    pairs = admissible_pairs(K)
    if not pairs:
        raise ValueError("no coordinate rays e_i lie in the cone; the check is empty")
    deltas = {(i, j): delta_ij(model.f, i, j) for i, j in pairs}
    used = 0
    multiaffine = is_multiaffine(model.f)
    for w in K.interior_samples(samples, seed=seed):
        for (i, j), D in deltas.items():
            used += 1
            val = D.eval(w)
            if val < 0:
                witness = {"w": w, "i": i, "j": j, "delta": val}
                if multiaffine and i != j and all(a > 0 for a in w):
                    witness["inclusion"] = model.inclusion_probabilities(w, i, j)
                return Certificate(Status.NO, witness=witness, samples_used=used, seed=seed)
    return Certificate(
        Status.UNKNOWN, samples_used=used, seed=seed, details={"pairs": pairs, "violations": 0}
    )
