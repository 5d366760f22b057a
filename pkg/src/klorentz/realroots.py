"""Exact univariate real-root analysis over the rationals.

Univariate polynomials are plain sequences of :class:`~fractions.Fraction`
coefficients, lowest degree first.  Root counting uses a Sturm chain evaluated
at plus/minus the Cauchy bound.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

from .exact import to_fraction

UniPoly = tuple[Fraction, ...]


class ZeroPolynomialError(ValueError):
    pass


def trim(p: Sequence) -> UniPoly:
    """Drop trailing zero coefficients; the zero polynomial becomes ``()``."""
    q = [to_fraction(c) for c in p]
    while q and q[-1] == 0:
        q.pop()
    return tuple(q)


def _nonzero(p: Sequence) -> UniPoly:
    q = trim(p)
    if not q:
        raise ZeroPolynomialError("zero polynomial")
    return q


def degree(p: Sequence) -> int:
    q = trim(p)
    return len(q) - 1 if q else -1


def evaluate(p: Sequence[Fraction], t: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * t + c
    return acc


def derivative(p: Sequence[Fraction]) -> UniPoly:
    return trim(k * c for k, c in enumerate(p) if k)


def divmod_poly(a: Sequence[Fraction], b: Sequence[Fraction]) -> tuple[UniPoly, UniPoly]:
    a = list(trim(a))
    b = _nonzero(b)
    if len(a) < len(b):
        return (), tuple(a)
    quot = [Fraction(0)] * (len(a) - len(b) + 1)
    lead = b[-1]
    while len(a) >= len(b) and a:
        shift = len(a) - len(b)
        f = a[-1] / lead
        quot[shift] = f
        for i, c in enumerate(b):
            a[shift + i] -= f * c
        a = list(trim(a))
    return trim(quot), tuple(a)


def primitive(p: Sequence[Fraction]) -> UniPoly:
    """Scale to integer coefficients with gcd 1 and positive leading term."""
    q = _nonzero(p)
    lcm = 1
    for c in q:
        lcm = lcm * c.denominator // math.gcd(lcm, c.denominator)
    ints = [int(c * lcm) for c in q]
    g = 0
    for c in ints:
        g = math.gcd(g, c)
    sign = 1 if ints[-1] > 0 else -1
    return tuple(Fraction(sign * c // g) for c in ints)


def gcd_poly(a: Sequence[Fraction], b: Sequence[Fraction]) -> UniPoly:
    a, b = trim(a), trim(b)
    while b:
        _, r = divmod_poly(a, b)
        a, b = b, (primitive(r) if r else ())
    if not a:
        return ()
    return primitive(a)


def square_free(p: Sequence) -> UniPoly:
    """``p / gcd(p, p')``, content-normalized.  Same distinct roots as p."""
    p = _nonzero(p)
    if len(p) == 1:
        return (Fraction(1),)
    g = gcd_poly(p, derivative(p))
    q, r = divmod_poly(p, g)
    assert not r
    return primitive(q)


def sturm_chain(p: Sequence[Fraction]) -> list[UniPoly]:
    """Sturm sequence with content normalization at each remainder.

    Positive rescaling of a remainder does not change sign variations, so
    making each remainder primitive keeps the count exact.
    """
    p0 = primitive(p)
    chain = [p0]
    p1 = derivative(p0)
    if not p1:
        return chain
    chain.append(primitive(p1))
    while True:
        _, r = divmod_poly(chain[-2], chain[-1])
        if not r:
            break
        r = tuple(-c for c in r)
        # primitive() would flip the sign to make the leading term positive;
        # scale by the positive content only.
        prim = primitive(r)
        if (prim[-1] > 0) != (r[-1] > 0):
            prim = tuple(-c for c in prim)
        chain.append(prim)
    return chain


def _sign_variations(values: Sequence[Fraction]) -> int:
    signs = [v > 0 for v in values if v != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def cauchy_bound(p: Sequence) -> Fraction:
    p = _nonzero(p)
    lead = abs(p[-1])
    return 1 + max((abs(c) / lead for c in p[:-1]), default=Fraction(0))


def count_real_roots(p: Sequence) -> int:
    """Number of distinct real roots, exact."""
    p = _nonzero(p)
    if len(p) == 1:
        return 0
    sf = square_free(p)
    chain = sturm_chain(sf)
    B = cauchy_bound(sf)
    return _sign_variations([evaluate(q, -B) for q in chain]) - _sign_variations(
        [evaluate(q, B) for q in chain]
    )


def is_real_rooted(p: Sequence) -> bool:
    sf = square_free(p)
    return count_real_roots(sf) == len(sf) - 1


def first_nonzero_taylor(p: Sequence) -> tuple[int, int]:
    """Index and sign of the lowest-order nonzero coefficient."""
    p = _nonzero(p)
    for k, c in enumerate(p):
        if c:
            return k, 1 if c > 0 else -1
    raise AssertionError("unreachable")
