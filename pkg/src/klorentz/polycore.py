"""Exact sparse multivariate polynomials over the rationals.

A :class:`Polynomial` is an immutable map from exponent tuples to nonzero
:class:`~fractions.Fraction` coefficients.  Everything needed downstream
(directional derivatives, Taylor restrictions along a line, gradients and
Hessians) is computed exactly; ``eval_float`` exists only for simulation and
finite-difference checks.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .exact import DimensionError, Vector, frac_str, to_fraction, vec

Exponent = tuple[int, ...]


def _grlex_key(exp: Exponent):
    # descending total degree, then descending lexicographic exponent
    return (-sum(exp), tuple(-e for e in exp))


class Polynomial:
    """Immutable sparse polynomial in ``nvars`` variables."""

    __slots__ = ("nvars", "_terms", "_hash")

    def __init__(self, nvars: int, terms: Mapping[Iterable[int], object] | None = None):
        if nvars < 1:
            raise ValueError("nvars must be positive")
        clean: dict[Exponent, Fraction] = {}
        for exp, coef in (terms or {}).items():
            e = tuple(int(k) for k in exp)
            if len(e) != nvars:
                raise DimensionError(f"exponent {e} has length {len(e)}, expected {nvars}")
            if any(k < 0 for k in e):
                raise ValueError(f"negative exponent in {e}")
            c = clean.get(e, Fraction(0)) + to_fraction(coef)
            if c:
                clean[e] = c
            else:
                clean.pop(e, None)
        self.nvars = nvars
        self._terms = clean
        self._hash = None

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, nvars: int) -> "Polynomial":
        return cls(nvars)

    @classmethod
    def constant(cls, nvars: int, c) -> "Polynomial":
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def variable(cls, nvars: int, i: int) -> "Polynomial":
        e = [0] * nvars
        e[i] = 1
        return cls(nvars, {tuple(e): 1})

    @classmethod
    def variables(cls, nvars: int) -> list["Polynomial"]:
        return [cls.variable(nvars, i) for i in range(nvars)]

    @classmethod
    def linear_form(cls, coeffs: Sequence) -> "Polynomial":
        n = len(coeffs)
        return cls(n, {tuple(int(i == j) for j in range(n)): c for i, c in enumerate(coeffs)})

    @classmethod
    def from_bivariate_coefficients(cls, coeffs: Sequence) -> "Polynomial":
        """``sum_k c_k x1^(d-k) x2^k`` from ``(c_0, ..., c_d)``."""
        d = len(coeffs) - 1
        return cls(2, {(d - k, k): c for k, c in enumerate(coeffs)})

    @classmethod
    def from_quadratic_matrix(cls, Q: "SymMatrix | Sequence[Sequence]") -> "Polynomial":
        """The form ``x^T Q x``."""
        Q = Q if isinstance(Q, SymMatrix) else SymMatrix.from_rows(Q)
        n = Q.n
        terms: dict[Exponent, Fraction] = {}
        for i in range(n):
            for j in range(n):
                e = [0] * n
                e[i] += 1
                e[j] += 1
                key = tuple(e)
                terms[key] = terms.get(key, Fraction(0)) + Q[i, j]
        return cls(n, terms)

    # -- basic accessors ----------------------------------------------------

    @property
    def terms(self) -> dict[Exponent, Fraction]:
        return dict(self._terms)

    def items(self):
        """Terms in graded-lex order."""
        return sorted(self._terms.items(), key=lambda kv: _grlex_key(kv[0]))

    def coefficient(self, exp: Iterable[int]) -> Fraction:
        return self._terms.get(tuple(exp), Fraction(0))

    def is_zero(self) -> bool:
        return not self._terms

    def __len__(self) -> int:
        return len(self._terms)

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self._terms), default=0)

    def is_homogeneous(self) -> int | None:
        """Common total degree of all terms, or None.  The zero polynomial reports 0."""
        degs = {sum(e) for e in self._terms}
        if not degs:
            return 0
        return degs.pop() if len(degs) == 1 else None

    def is_constant(self) -> bool:
        return all(sum(e) == 0 for e in self._terms)

    def constant_value(self) -> Fraction:
        return self._terms.get((0,) * self.nvars, Fraction(0))

    # -- arithmetic ---------------------------------------------------------

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.nvars != self.nvars:
                raise DimensionError(f"{self.nvars} vs {other.nvars} variables")
            return other
        return Polynomial.constant(self.nvars, to_fraction(other))

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self._terms)
        for e, c in other._terms.items():
            out[e] = out.get(e, Fraction(0)) + c
        return Polynomial(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.nvars, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        out: dict[Exponent, Fraction] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, Fraction(0)) + c1 * c2
        return Polynomial(self.nvars, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        out = Polynomial.constant(self.nvars, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self.nvars == other.nvars and self._terms == other._terms
        try:
            return self == self._coerce(other)
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self._terms.items())))
        return self._hash

    # -- evaluation ---------------------------------------------------------

    def _check_point(self, x: Sequence) -> Vector:
        if len(x) != self.nvars:
            raise DimensionError(f"point of length {len(x)} for {self.nvars} variables")
        return vec(x)

    def __call__(self, x: Sequence) -> Fraction:
        return self.eval(x)

    def eval(self, x: Sequence) -> Fraction:
        """Exact value at a rational point."""
        x = self._check_point(x)
        total = Fraction(0)
        for e, c in self._terms.items():
            term = c
            for xi, k in zip(x, e):
                if k:
                    term *= xi**k
            total += term
        return total

    def eval_float(self, x: Sequence[float]) -> float:
        if len(x) != self.nvars:
            raise DimensionError(f"point of length {len(x)} for {self.nvars} variables")
        x = np.asarray(x, dtype=float)
        return float(sum(float(c) * np.prod(x ** np.array(e)) for e, c in self._terms.items()))

    # -- calculus -----------------------------------------------------------

    def partial(self, i: int) -> "Polynomial":
        out: dict[Exponent, Fraction] = {}
        for e, c in self._terms.items():
            if e[i]:
                ne = list(e)
                ne[i] -= 1
                out[tuple(ne)] = c * e[i]
        return Polynomial(self.nvars, out)

    def dir_derivative(self, a: Sequence) -> "Polynomial":
        """``D_a f = sum_i a_i df/dx_i``."""
        a = self._check_point(a)
        out = Polynomial.zero(self.nvars)
        for i, ai in enumerate(a):
            if ai:
                out = out + self.partial(i) * ai
        return out

    def gradient(self, x: Sequence) -> Vector:
        x = self._check_point(x)
        return tuple(self.partial(i).eval(x) for i in range(self.nvars))

    def hessian(self, x: Sequence) -> "SymMatrix":
        x = self._check_point(x)
        n = self.nvars
        parts = [self.partial(i) for i in range(n)]
        rows = [[Fraction(0)] * n for _ in range(n)]
        for i in range(n):
            for j in range(i, n):
                v = parts[i].partial(j).eval(x)
                rows[i][j] = rows[j][i] = v
        return SymMatrix.from_rows(rows)

    def gradient_poly(self) -> list["Polynomial"]:
        return [self.partial(i) for i in range(self.nvars)]

    def restriction_taylor(self, x: Sequence, v: Sequence) -> Vector:
        """Coefficients ``(c_0, ..., c_d)`` with ``f(x + t v) = sum_k c_k t^k``.

        Computed by substituting the affine line into each monomial and
        expanding; ``c_k = D_v^k f(x) / k!`` holds as an identity.
        """
        x = self._check_point(x)
        v = self._check_point(v)
        d = self.degree
        coeffs = [Fraction(0)] * (d + 1)
        for e, c in self._terms.items():
            term = [c]
            for xi, vi, k in zip(x, v, e):
                for _ in range(k):
                    # multiply running univariate poly by (xi + vi t)
                    nxt = [Fraction(0)] * (len(term) + 1)
                    for j, a in enumerate(term):
                        nxt[j] += a * xi
                        nxt[j + 1] += a * vi
                    term = nxt
            for j, a in enumerate(term):
                coeffs[j] += a
        return tuple(coeffs)

    def derivative_tower(self, v: Sequence) -> list["Polynomial"]:
        """``[f, D_v f, ..., D_v^d f]`` for a homogeneous form of degree d."""
        d = self.is_homogeneous()
        if d is None:
            raise ValueError("derivative tower requires a homogeneous polynomial")
        tower = [self]
        for _ in range(d):
            tower.append(tower[-1].dir_derivative(v))
        return tower

    # -- serialization ------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "nvars": self.nvars,
            "terms": [{"exp": list(e), "coef": frac_str(c)} for e, c in self.items()],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "Polynomial":
        if not isinstance(data, Mapping):
            raise ValueError("polynomial JSON must be an object")
        if "nvars" not in data:
            raise ValueError("polynomial JSON is missing field 'nvars'")
        if "terms" not in data:
            raise ValueError("polynomial JSON is missing field 'terms'")
        nvars = data["nvars"]
        if not isinstance(nvars, int) or nvars < 1:
            raise ValueError("field 'nvars' must be a positive integer")
        terms: dict[Exponent, Fraction] = {}
        for k, t in enumerate(data["terms"]):
            if "exp" not in t or "coef" not in t:
                raise ValueError(f"field 'terms[{k}]' needs 'exp' and 'coef'")
            try:
                e = tuple(int(a) for a in t["exp"])
                c = to_fraction(t["coef"])
            except (TypeError, ValueError, ZeroDivisionError) as exc:
                raise ValueError(f"field 'terms[{k}]': {exc}") from None
            if len(e) != nvars:
                raise ValueError(f"field 'terms[{k}].exp' has length {len(e)}, expected {nvars}")
            terms[e] = terms.get(e, Fraction(0)) + c
        return cls(nvars, terms)

    def __repr__(self):
        return f"Polynomial({self.nvars}, {self})"

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for e, c in self.items():
            mono = "*".join(
                f"x{i + 1}" + (f"^{k}" if k > 1 else "") for i, k in enumerate(e) if k
            )
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")


@dataclass(frozen=True)
class SymMatrix:
    """Exact symmetric matrix."""

    entries: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        n = len(self.entries)
        for i, row in enumerate(self.entries):
            if len(row) != n:
                raise DimensionError("SymMatrix must be square")
            for j in range(i):
                if row[j] != self.entries[j][i]:
                    raise ValueError(f"matrix not symmetric at ({i}, {j})")

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable]) -> "SymMatrix":
        return cls(tuple(vec(r) for r in rows))

    @classmethod
    def symmetric_part(cls, rows: Iterable[Iterable]) -> "SymMatrix":
        """``(A + A^T) / 2`` of an arbitrary square matrix."""
        A = [vec(r) for r in rows]
        n = len(A)
        return cls(tuple(tuple((A[i][j] + A[j][i]) / 2 for j in range(n)) for i in range(n)))

    @classmethod
    def of_quadratic(cls, q: Polynomial) -> "SymMatrix":
        """Matrix Q with ``q(x) = x^T Q x`` for a quadratic form q."""
        if q.is_homogeneous() not in (0, 2):
            raise ValueError("not a quadratic form")
        return q.hessian((0,) * q.nvars).scale(Fraction(1, 2))

    @property
    def n(self) -> int:
        return len(self.entries)

    def __getitem__(self, ij) -> Fraction:
        i, j = ij
        return self.entries[i][j]

    def scale(self, c) -> "SymMatrix":
        c = to_fraction(c)
        return SymMatrix(tuple(tuple(a * c for a in r) for r in self.entries))

    def bilinear(self, x: Sequence, y: Sequence) -> Fraction:
        """``x^T Q y``."""
        if len(x) != self.n or len(y) != self.n:
            raise DimensionError("vector length does not match matrix")
        x, y = vec(x), vec(y)
        return sum(
            (xi * Qij * yj for xi, row in zip(x, self.entries) for Qij, yj in zip(row, y)),
            Fraction(0),
        )

    def quad(self, x: Sequence) -> Fraction:
        return self.bilinear(x, x)

    def to_numpy(self) -> np.ndarray:
        return np.array([[float(a) for a in r] for r in self.entries], dtype=float)

    def to_json(self) -> dict:
        return {"rows": [[frac_str(a) for a in r] for r in self.entries]}

    def __sub__(self, other: "SymMatrix") -> "SymMatrix":
        return SymMatrix(
            tuple(tuple(a - b for a, b in zip(r, s)) for r, s in zip(self.entries, other.entries))
        )

    def __add__(self, other: "SymMatrix") -> "SymMatrix":
        return SymMatrix(
            tuple(tuple(a + b for a, b in zip(r, s)) for r, s in zip(self.entries, other.entries))
        )

    def is_zero(self) -> bool:
        return all(a == 0 for r in self.entries for a in r)

