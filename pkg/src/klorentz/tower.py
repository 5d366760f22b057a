"""Derivative-tower cones ``K(f, v) = {f >= 0, D_v f >= 0, ..., D_v^{d-1} f >= 0}``.

Membership is decided by exact signs of the tower at a rational point.  The
open cone (all strict) is what :attr:`MembershipClass.INTERIOR_OPEN` reports.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import realroots
from .certificate import Certificate, Status
from .cones import GeneratedCone
from .exact import DimensionError, Vector, vec
from .polycore import Polynomial


class MembershipClass(str, enum.Enum):
    INTERIOR_OPEN = "InteriorOpen"
    CLOSED_ONLY = "ClosedOnly"
    OUTSIDE = "Outside"


class BoundaryVerdict(str, enum.Enum):
    NOT_INTERIOR = "NotInterior"
    NECESSARY_CONDITIONS_HOLD = "NecessaryConditionsHold"
    IDENTICALLY_ZERO = "IdenticallyZero"


@dataclass(frozen=True)
class ConeTower:
    f: Polynomial
    v: Vector
    tower: tuple[Polynomial, ...]

    @classmethod
    def build(cls, f: Polynomial, v: Sequence) -> "ConeTower":
        v = vec(v)
        if len(v) != f.nvars:
            raise DimensionError("direction length does not match the polynomial")
        return cls(f, v, tuple(f.derivative_tower(v)))

    @property
    def degree(self) -> int:
        return len(self.tower) - 1

    @property
    def nvars(self) -> int:
        return self.f.nvars

    def values(self, x: Sequence) -> list[Fraction]:
        """``[D_v^k f(x) for k < d]``; the constant top entry is excluded."""
        if len(x) != self.nvars:
            raise DimensionError(f"point of length {len(x)} for {self.nvars} variables")
        x = vec(x)
        return [p.eval(x) for p in self.tower[:-1]]

    def classify(self, x: Sequence) -> MembershipClass:
        vals = self.values(x)
        if all(a > 0 for a in vals):
            return MembershipClass.INTERIOR_OPEN
        if all(a >= 0 for a in vals):
            return MembershipClass.CLOSED_ONLY
        return MembershipClass.OUTSIDE

    def classify_float(self, x: Sequence[float]) -> MembershipClass:
        vals = [p.eval_float(x) for p in self.tower[:-1]]
        if all(a > 0 for a in vals):
            return MembershipClass.INTERIOR_OPEN
        if all(a >= 0 for a in vals):
            return MembershipClass.CLOSED_ONLY
        return MembershipClass.OUTSIDE

    def __contains__(self, x) -> bool:
        return self.classify(x) is not MembershipClass.OUTSIDE


def tower_membership(T: ConeTower, x: Sequence) -> MembershipClass:
    return T.classify(x)


@dataclass(frozen=True)
class BoundaryEntry:
    k: int
    order: int | None
    sign: int | None
    verdict: BoundaryVerdict


def boundary_classify(T: ConeTower, x: Sequence) -> list[BoundaryEntry]:
    """Local sign analysis of each vanishing tower entry along ``x + t v``.

    For a vanishing ``D_v^k f(x)``, the restriction ``t -> D_v^k f(x + t v)``
    has a first nonzero Taylor coefficient of order l.  Odd l means a sign
    change, even l with negative sign means local negativity; both place x on
    the boundary.  Even l with positive sign only says this constraint does
    not exclude interiority.
    """
    if T.classify(x) is not MembershipClass.CLOSED_ONLY:
        raise ValueError("boundary_classify needs a point of K(f,v) outside the open cone")
    x = vec(x)
    out = []
    for k, p in enumerate(T.tower[:-1]):
        if p.eval(x) != 0:
            continue
        coeffs = realroots.trim(p.restriction_taylor(x, T.v))
        if not coeffs:
            out.append(BoundaryEntry(k, None, None, BoundaryVerdict.IDENTICALLY_ZERO))
            continue
        order, sign = realroots.first_nonzero_taylor(coeffs)
        if order % 2 == 1 or sign < 0:
            verdict = BoundaryVerdict.NOT_INTERIOR
        else:
            verdict = BoundaryVerdict.NECESSARY_CONDITIONS_HOLD
        out.append(BoundaryEntry(k, order, sign, verdict))
    return out


def inclusion_witness(
    K: GeneratedCone, T: ConeTower, samples: int = 50, seed: int = 0
) -> Vector | None:
    """First generator (then interior sample) of K outside ``K(f, v)``, if any."""
    if K.nvars != T.nvars:
        raise DimensionError("cone and tower dimensions differ")
    for u in K.generators:
        if T.classify(u) is MembershipClass.OUTSIDE:
            return u
    if samples and K.properness().full_dimensional:
        for x in K.interior_samples(samples, seed=seed):
            if T.classify(x) is MembershipClass.OUTSIDE:
                return x
    return None


def inclusion_check(K: GeneratedCone, T: ConeTower, samples: int = 50, seed: int = 0) -> bool:
    """Do the generators of K (and interior spot checks) lie in ``K(f, v)``?"""
    return inclusion_witness(K, T, samples, seed) is None


# -- convexity ---------------------------------------------------------------------


def _box_point(rng: np.random.Generator, n: int, half_width: int, den: int = 16) -> Vector:
    return tuple(Fraction(int(k), den) for k in rng.integers(-half_width * den, half_width * den + 1, size=n))


def convexity_falsifier(
    region,
    trials: int = 10_000,
    seed: int = 0,
    half_width: int = 2,
    nvars: int | None = None,
    max_draws: int | None = None,
) -> Certificate:
    """Midpoint test for convexity of a closed cone.

    ``region`` is a :class:`ConeTower` (closed tower cone, exact), a
    :class:`GeneratedCone` (tolerance-mode membership, endpoints drawn from
    the cone itself) or a predicate on rational vectors (then ``nvars`` is
    required).  Endpoints for towers and predicates come from rejection
    sampling in the box ``[-half_width, half_width]^n``.
    """
    rng = np.random.default_rng(seed)
    if isinstance(region, GeneratedCone):
        return _falsify_generated(region, trials, seed, rng)
    if isinstance(region, ConeTower):
        inside: Callable[[Vector], bool] = region.__contains__
        n = region.nvars
    else:
        if nvars is None:
            raise ValueError("nvars is required for predicate regions")
        inside, n = region, nvars
    if n == 1:
        # a closed cone in R^1 is {0}, a ray or the line: always convex
        return Certificate(Status.UNKNOWN, samples_used=0, seed=seed, details={"reason": "dimension 1"})
    cap = max_draws if max_draws is not None else 200 * trials
    draws = 0

    def draw():
        nonlocal draws
        while draws < cap:
            draws += 1
            p = _box_point(rng, n, half_width)
            if inside(p):
                return p
        return None

    done = 0
    for done in range(1, trials + 1):
        a, b = draw(), draw()
        if a is None or b is None:
            done -= 1
            break
        mid = tuple((p + q) / 2 for p, q in zip(a, b))
        if not inside(mid):
            return Certificate(
                Status.NO, witness={"a": a, "b": b, "midpoint": mid}, samples_used=done, seed=seed
            )
    return Certificate(Status.UNKNOWN, samples_used=done, seed=seed, details={"draws": draws})


def _falsify_generated(K: GeneratedCone, trials: int, seed: int, rng) -> Certificate:
    if K.nvars == 1:
        return Certificate(Status.UNKNOWN, samples_used=0, seed=seed, details={"reason": "dimension 1"})
    pts = K.random_points_float(2 * trials, rng)
    for k in range(trials):
        a, b = pts[2 * k], pts[2 * k + 1]
        mid = (a + b) / 2
        if not K.contains(mid, mode="tolerance", tol=1e-7):
            return Certificate(
                Status.NO, witness={"a": a, "b": b, "midpoint": mid}, samples_used=k + 1, seed=seed
            )
    return Certificate(Status.UNKNOWN, samples_used=trials, seed=seed)


# -- connectivity ----------------------------------------------------------------


def connectivity_witness(T: ConeTower, x: Sequence, grid: int = 64, lambda_cap: int = 2**40) -> bool:
    """Check f > 0 along the three-segment path from x to v.

    Path: the ray ``x + t v`` for ``t in [0, lam]``, the translated segment
    ``(1-s) x + s v + lam v``, and the ray ``v + t v`` back down to v.  ``lam``
    is doubled from 1 until f is positive at every grid point of the middle
    segment.  False means the numerical search gave up, not a disproof.
    """
    if T.classify(x) is not MembershipClass.INTERIOR_OPEN:
        raise ValueError("connectivity_witness needs a point of the open tower cone")
    f, v = T.f, T.v
    x = vec(x)
    ss = [Fraction(k, grid) for k in range(grid + 1)]

    def point(base, direction, t):
        return tuple(b + t * d for b, d in zip(base, direction))

    lam = Fraction(1)
    while True:
        if all(f.eval(point(tuple((1 - s) * a + s * b for a, b in zip(x, v)), v, lam)) > 0 for s in ss):
            break
        lam *= 2
        if lam > lambda_cap:
            return False
    rays_ok = all(f.eval(point(x, v, s * lam)) > 0 for s in ss) and all(
        f.eval(point(v, v, s * lam)) > 0 for s in ss
    )
    return rays_ok


# -- region cloud ---------------------------------------------------------------


MAX_CLOUD_POINTS = 10**7


def region_cloud(T: ConeTower, box: tuple, resolution: int):
    """Grid points of ``[lo, hi]^n`` with their membership class.

    Yields ``(point, MembershipClass)`` pairs; an empty box (lo >= hi) yields
    nothing.
    """
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    lo, hi = (Fraction(b) if not isinstance(b, float) else Fraction(b).limit_denominator(10**6) for b in box)
    n = T.nvars
    if resolution**n > MAX_CLOUD_POINTS:
        raise ValueError(f"grid of {resolution}^{n} points exceeds {MAX_CLOUD_POINTS}")
    if lo >= hi:
        return
    axis = [lo + (hi - lo) * k / (resolution - 1) for k in range(resolution)]
    for p in itertools.product(axis, repeat=n):
        yield p, T.classify(p)
