"""Finitely generated convex cones.

A cone is stored by its generator rays only.  Certificates (membership,
pointedness, acuteness) are decided exactly with a small rational simplex;
projection and tolerance-mode membership go through floating nonnegative
least squares.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.optimize import lsq_linear, nnls

from .certificate import Certificate, Status
from .exact import DimensionError, Vector, dot, rank, to_fraction, vec
from .polycore import SymMatrix

DEFAULT_TOL = 1e-9


class ConeError(ValueError):
    pass


class ProjectionError(RuntimeError):
    """Nonnegative least squares failed or its KKT residual is too large."""


def _kkt_ok(U: np.ndarray, z: np.ndarray, lam: np.ndarray, tol: float) -> bool:
    p = U @ lam
    r = z - p
    scale = float(np.linalg.norm(z)) * float(np.abs(U).max())
    return (U.T @ r).max(initial=0.0) <= tol * scale and abs(r @ p) <= tol * scale * scale


def nonneg_lstsq(U: np.ndarray, z: np.ndarray, kkt_tol: float = 1e-9) -> np.ndarray:
    """``argmin |U lam - z|`` over ``lam >= 0``, verified by its KKT conditions.

    scipy's ``nnls`` is tried first; it occasionally stops at a non-optimal
    point, in which case the bounded-variable solver of ``lsq_linear`` is
    used instead.
    """
    # the problem is positively homogeneous in z; solve at unit max-norm so that
    # tiny or huge inputs do not underflow the KKT tolerances
    nz = float(np.abs(z).max(initial=0.0))
    if nz == 0.0:
        return np.zeros(U.shape[1])
    z = z / nz
    try:
        lam, _ = nnls(U, z, maxiter=50 * max(U.shape))
        if _kkt_ok(U, z, lam, kkt_tol):
            return lam * nz
    except RuntimeError:
        pass
    res = lsq_linear(U, z, bounds=(0, np.inf), method="bvls", tol=1e-14)
    lam = np.maximum(res.x, 0.0)
    if not _kkt_ok(U, z, lam, kkt_tol):
        raise ProjectionError("KKT check failed for the nonnegative least-squares solution")
    return lam * nz


# -- exact phase-one simplex ---------------------------------------------------


def lp_feasible_point(A: Sequence[Sequence], b: Sequence) -> Vector | None:
    """Return some ``y >= 0`` with ``A y = b`` (exact), or None if infeasible.

    Phase-one simplex with Bland's rule on a dense rational tableau.  Meant
    for desk-scale systems (tens of rows and columns).
    """
    rows = [vec(r) for r in A]
    rhs = vec(b)
    m = len(rows)
    nv = len(rows[0]) if m else 0
    if any(len(r) != nv for r in rows) or len(rhs) != m:
        raise DimensionError("inconsistent LP dimensions")
    if m == 0:
        return tuple(Fraction(0) for _ in range(nv))
    # tableau: [A | I_art | b] with b >= 0
    T: list[list[Fraction]] = []
    for i in range(m):
        sgn = -1 if rhs[i] < 0 else 1
        T.append(
            [sgn * a for a in rows[i]]
            + [Fraction(int(i == k)) for k in range(m)]
            + [sgn * rhs[i]]
        )
    basis = [nv + i for i in range(m)]
    ncols = nv + m
    # objective: minimize sum of artificials -> reduced costs row
    cost = [Fraction(0)] * (ncols + 1)
    for i in range(m):
        for j in range(ncols + 1):
            cost[j] -= T[i][j]
    for i in range(m):
        cost[nv + i] += 1  # artificial columns have cost 1; basic -> 0
    while True:
        enter = next((j for j in range(ncols) if cost[j] < 0), None)
        if enter is None:
            break
        best = None
        for i in range(m):
            if T[i][enter] > 0:
                ratio = T[i][-1] / T[i][enter]
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:
            break  # unbounded in phase one cannot happen; objective >= 0
        r = best[1]
        piv = T[r][enter]
        T[r] = [a / piv for a in T[r]]
        for i in range(m):
            if i != r and T[i][enter] != 0:
                f = T[i][enter]
                T[i] = [a - f * c for a, c in zip(T[i], T[r])]
        f = cost[enter]
        cost = [a - f * c for a, c in zip(cost, T[r])]
        basis[r] = enter
    if -cost[-1] != 0:
        return None
    y = [Fraction(0)] * ncols
    for i, bi in enumerate(basis):
        y[bi] = T[i][-1]
    return tuple(y[:nv])


# -- cone type -----------------------------------------------------------------


def _canonical_ray(u: Vector) -> Vector:
    scale = max(abs(a) for a in u)
    return tuple(a / scale for a in u)


@dataclass(frozen=True)
class ConeFlags:
    pointed: bool
    full_dimensional: bool

    @property
    def proper(self) -> bool:
        # finitely generated cones are closed
        return self.pointed and self.full_dimensional


class GeneratedCone:
    """``cone{u_1, ..., u_m}`` in R^n with rational generators."""

    def __init__(self, generators: Iterable[Sequence], nvars: int | None = None):
        gens: list[Vector] = []
        seen: set[Vector] = set()
        for g in generators:
            u = vec(g)
            if nvars is None:
                nvars = len(u)
            if len(u) != nvars:
                raise DimensionError(f"generator {g} has length {len(u)}, expected {nvars}")
            if all(a == 0 for a in u):
                raise ConeError("zero generator")
            key = _canonical_ray(u)
            if key not in seen:
                seen.add(key)
                gens.append(u)
        if nvars is None:
            raise ConeError("empty generator list needs an explicit nvars")
        self.nvars = nvars
        self.generators: tuple[Vector, ...] = tuple(gens)
        self._gen_array = (
            np.array([[float(a) for a in u] for u in gens], dtype=float).T
            if gens
            else np.zeros((nvars, 0))
        )

    @classmethod
    def orthant(cls, n: int) -> "GeneratedCone":
        return cls([[int(i == j) for j in range(n)] for i in range(n)])

    @classmethod
    def from_json(cls, data) -> "GeneratedCone":
        if "nvars" not in data:
            raise ValueError("cone JSON is missing field 'nvars'")
        if "generators" not in data:
            raise ValueError("cone JSON is missing field 'generators'")
        try:
            return cls(data["generators"], nvars=int(data["nvars"]))
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"field 'generators': {exc}") from None

    def to_json(self) -> dict:
        from .certificate import jsonable

        return {"nvars": self.nvars, "generators": jsonable(self.generators)}

    def __repr__(self):
        return f"GeneratedCone(nvars={self.nvars}, m={len(self.generators)})"

    @property
    def matrix(self) -> np.ndarray:
        """Float generator matrix, one generator per column."""
        return self._gen_array

    def _check(self, x) -> None:
        if len(x) != self.nvars:
            raise DimensionError(f"vector of length {len(x)} for a cone in R^{self.nvars}")

    # -- membership ------------------------------------------------------------

    def contains(self, x: Sequence, mode: str = "exact", tol: float = DEFAULT_TOL) -> bool:
        """Is ``x = sum lambda_i u_i`` with ``lambda >= 0``?

        ``mode="exact"`` solves a rational LP; ``mode="tolerance"`` accepts a
        least-squares residual up to ``tol * max(1, |x|)``.
        """
        self._check(x)
        if mode == "exact":
            return self.decompose(x) is not None
        if mode != "tolerance":
            raise ValueError(f"unknown mode {mode!r}")
        z = np.asarray([float(a) for a in x], dtype=float)
        if not self.generators:
            return bool(np.linalg.norm(z) <= tol)
        scale = tol * max(1.0, float(np.linalg.norm(z)))
        N = self.facet_normals()
        if N is not None:
            # a unit facet violation bounds the distance to the cone from below
            worst = float((N @ z).min())
            if worst >= 0:
                return True
            if worst < -scale:
                return False
        lam = nonneg_lstsq(self._gen_array, z)
        return bool(np.linalg.norm(self._gen_array @ lam - z) <= scale)

    def decompose(self, x: Sequence) -> Vector | None:
        """Exact nonnegative coefficients over the generators, or None."""
        self._check(x)
        x = vec(x)
        if not self.generators:
            return () if all(a == 0 for a in x) else None
        A = [[u[i] for u in self.generators] for i in range(self.nvars)]
        return lp_feasible_point(A, x)

    def contains_interior(self, x: Sequence) -> bool:
        """Exact test for ``x`` in the interior of a proper cone.

        For full-dimensional generators, x is interior iff it is a strictly
        positive combination; homogenized as ``U mu = s x``, ``mu >= 1``,
        ``s >= 0`` (pointedness rules out s = 0).
        """
        self._check(x)
        if not self.properness().proper:
            raise ConeError("interior test needs a proper cone")
        x = vec(x)
        m = len(self.generators)
        # mu = 1 + nu:  U nu - s x = -U 1
        A = [[u[i] for u in self.generators] + [-x[i]] for i in range(self.nvars)]
        b = [-sum((u[i] for u in self.generators), Fraction(0)) for i in range(self.nvars)]
        return lp_feasible_point(A, b) is not None and m > 0

    def dual_contains(self, y: Sequence) -> bool:
        self._check(y)
        y = vec(y)
        return all(dot(y, u) >= 0 for u in self.generators)

    # -- structure -------------------------------------------------------------

    def pointedness_certificate(self) -> Vector | None:
        """Some ``c`` with ``c . u_i >= 1`` for every generator, or None.

        A floating LP proposes c, which is rounded to a rational vector and
        verified exactly; only if that fails does the exact simplex run.
        """
        if hasattr(self, "_pointed"):
            return self._pointed
        n, m = self.nvars, len(self.generators)
        if m == 0:
            self._pointed = tuple(Fraction(0) for _ in range(n))
            return self._pointed
        c = self._float_pointedness()
        if c is None:
            # c = p - q, slack s: U^T p - U^T q - s = 1
            A = []
            for u in self.generators:
                A.append(list(u) + [-a for a in u] + [Fraction(-int(k == len(A))) for k in range(m)])
            sol = lp_feasible_point(A, [1] * m)
            c = None if sol is None else tuple(sol[i] - sol[n + i] for i in range(n))
        self._pointed = c
        return c

    def _float_pointedness(self) -> Vector | None:
        from scipy.optimize import linprog

        U = self._gen_array
        res = linprog(
            np.zeros(self.nvars), A_ub=-U.T, b_ub=-np.ones(U.shape[1]),
            bounds=[(None, None)] * self.nvars, method="highs",
        )
        if res.status != 0:
            return None
        for den in (10**3, 10**6, 10**9):
            c = tuple(Fraction(a).limit_denominator(den) for a in res.x)
            vals = [dot(c, u) for u in self.generators]
            low = min(vals)
            if low > 0:
                return tuple(a / low for a in c)
        return None

    def properness(self) -> ConeFlags:
        if not hasattr(self, "_flags"):
            pointed = self.pointedness_certificate() is not None
            full = rank(self.generators) == self.nvars if self.generators else False
            self._flags = ConeFlags(pointed=pointed, full_dimensional=full)
        return self._flags

    def is_proper(self) -> bool:
        return self.properness().proper

    def interior_sample(self, seed: int | np.random.Generator | None = 0) -> Vector:
        """``sum lambda_i u_i`` with rational ``lambda_i`` uniform on [1/2, 3/2] (step 1/64)."""
        if not self.properness().full_dimensional:
            raise ConeError("cone is not full-dimensional; it has no interior")
        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        return self._interior_point(rng)

    def _interior_point(self, rng: np.random.Generator) -> Vector:
        lam = [Fraction(int(k), 64) for k in rng.integers(32, 97, size=len(self.generators))]
        x = [Fraction(0)] * self.nvars
        for li, u in zip(lam, self.generators):
            for i, a in enumerate(u):
                x[i] += li * a
        return tuple(x)

    def interior_samples(self, count: int, seed: int = 0) -> list[Vector]:
        if not self.properness().full_dimensional:
            raise ConeError("cone is not full-dimensional; it has no interior")
        rng = np.random.default_rng(seed)
        return [self._interior_point(rng) for _ in range(count)]

    def random_points_float(self, count: int, rng: np.random.Generator) -> np.ndarray:
        """Random float points of the cone (nonnegative exponential weights), one per row."""
        w = rng.exponential(size=(count, len(self.generators)))
        # sparsify so that boundary faces get sampled too
        mask = rng.random(size=w.shape) < 0.3
        w[mask] = 0.0
        return w @ self._gen_array.T

    # -- acuteness -------------------------------------------------------------

    def acute_wrt(self, Q: SymMatrix, seed: int | None = None) -> Certificate:
        """Is ``y^T Q x >= 0`` on the cone?  Complete by bilinearity over generator pairs."""
        if Q.n != self.nvars:
            raise DimensionError(f"{Q.n}x{Q.n} matrix for a cone in R^{self.nvars}")
        gens = self.generators
        checked = 0
        for i in range(len(gens)):
            for j in range(i, len(gens)):
                checked += 1
                val = Q.bilinear(gens[i], gens[j])
                if val < 0:
                    return Certificate(
                        Status.NO,
                        witness={"pair": (i, j), "u": gens[i], "w": gens[j], "value": val},
                        samples_used=checked,
                        seed=seed,
                    )
        return Certificate(Status.YES, samples_used=checked, seed=seed)

    # -- projection ------------------------------------------------------------

    def project(self, z: Sequence[float], kkt_tol: float = 1e-9) -> np.ndarray:
        """Euclidean projection onto the cone by nonnegative least squares.

        The result is checked against the KKT conditions of the projection:
        the residual ``r = z - p`` must satisfy ``U^T r <= 0`` and ``r . p = 0``
        up to ``kkt_tol`` (relative to the scale of z and the generators).
        """
        self._check(z)
        z = np.asarray(z, dtype=float)
        U = self._gen_array
        if U.shape[1] == 0:
            return np.zeros_like(z)
        N = self.facet_normals()
        if N is not None and (N @ z).min() >= 0:
            return z.copy()
        if N is not None and self.nvars <= 3:
            return self.project_rows(z[None, :], kkt_tol)[0]
        return U @ nonneg_lstsq(U, z, kkt_tol)

    def project_rows(self, Z: np.ndarray, kkt_tol: float = 1e-9) -> np.ndarray:
        """Project every row of ``Z`` onto the cone (vectorized :meth:`project`)."""
        Z = np.asarray(Z, dtype=float)
        if Z.ndim != 2 or Z.shape[1] != self.nvars:
            raise DimensionError(f"expected rows of length {self.nvars}")
        U = self._gen_array
        if U.shape[1] == 0:
            return np.zeros_like(Z)
        N = self.facet_normals()
        if N is None:
            return np.array([self.project(z, kkt_tol) for z in Z])
        if not hasattr(self, "_gen_scale"):
            self._gen_scale = float(np.abs(U).max())
        out = Z.copy()
        outside = np.nonzero((Z @ N.T).min(axis=1) < 0)[0]
        if len(outside) == 0:
            return out
        if self.nvars > 3:
            for k in outside:
                out[k] = U @ nonneg_lstsq(U, Z[k], kkt_tol)
            return out
        # rows outside a facet are nonzero; rescale them to unit max-norm
        norms = np.abs(Z[outside]).max(axis=1)
        Zo = Z[outside] / norms[:, None]
        P = self._project_by_faces(Zo, N)
        R = Zo - P
        scale = kkt_tol * self._gen_scale
        ok = ((R @ U).max(axis=1) <= scale) & (np.abs((R * P).sum(axis=1)) <= scale * self._gen_scale)
        for k in np.nonzero(~ok)[0]:
            P[k] = U @ nonneg_lstsq(U, Zo[k], kkt_tol)
        out[outside] = P * norms[:, None]
        return out

    def _project_by_faces(self, Z: np.ndarray, N: np.ndarray) -> np.ndarray:
        # In dimension <= 3 every proper face is the origin, a ray or a facet,
        # so the projection is the nearest feasible face-wise projection.
        # Squared distances: |z|^2 (origin), |z|^2 - t^2 (ray), s^2 (facet).
        if not hasattr(self, "_unit_gens"):
            U = self._gen_array.T
            self._unit_gens = U / np.linalg.norm(U, axis=1, keepdims=True)
            self._normal_gram = N @ N.T
        U, G = self._unit_gens, self._normal_gram
        zz = np.einsum("ij,ij->i", Z, Z)
        t = np.maximum(Z @ U.T, 0.0)
        S = Z @ N.T
        # facet i candidate z - s_i n_i has facet values s_j - s_i G_ij
        feasible = (S[:, None, :] - S[:, :, None] * G[None]).min(axis=2) >= -1e-12 * np.sqrt(zz)[:, None]
        dist = np.concatenate([zz[:, None], zz[:, None] - t * t, np.where(feasible, S * S, np.inf)], axis=1)
        best = dist.argmin(axis=1)
        rows = np.arange(len(Z))
        r = len(U)
        jr = np.clip(best - 1, 0, r - 1)
        jf = np.clip(best - 1 - r, 0, len(N) - 1)
        on_ray = t[rows, jr][:, None] * U[jr]
        on_facet = Z - S[rows, jf][:, None] * N[jf]
        out = np.where((best <= r)[:, None], on_ray, on_facet)
        out[best == 0] = 0.0
        return out

    def facet_normals(self) -> np.ndarray | None:
        """Inward float normals N with ``K = {x : N x >= 0}`` (rows), or None.

        Available for proper cones; computed once from the convex hull of the
        generators on a slice and cached.  Used only as a fast path.
        """
        if hasattr(self, "_facets"):
            return self._facets
        self._facets = None
        c = self.pointedness_certificate()
        if c is None or rank(self.generators) != self.nvars:
            return None
        n = self.nvars
        cf = np.array([float(a) for a in c])
        if n == 1:
            self._facets = cf[None, :]
            return self._facets
        U = self._gen_array.T
        if n == 2:
            ang = np.arctan2(U[:, 1], U[:, 0])
            rel = np.angle(np.exp(1j * (ang - np.arctan2(cf[1], cf[0]))))
            lo, hi = U[int(np.argmin(rel))], U[int(np.argmax(rel))]
            normals = []
            for edge, other in ((lo, hi), (hi, lo)):
                nrm = np.array([-edge[1], edge[0]])
                normals.append(nrm if nrm @ other > 0 else -nrm)
            self._facets = np.array(normals)
            return self._facets
        from scipy.spatial import ConvexHull

        pts = U / (U @ cf)[:, None]
        basis = np.linalg.svd(cf[None, :])[2][1:]
        hull = ConvexHull(pts @ basis.T)
        # hull: a . (B y) + b <= 0 on the slice; for x = s y with s = c . x:
        # -(B^T a + b c) . x >= 0
        normals = -(hull.equations[:, :-1] @ basis + hull.equations[:, -1:] * cf[None, :])
        normals /= np.linalg.norm(normals, axis=1, keepdims=True)
        self._facets = np.vstack([normals, cf / np.linalg.norm(cf)])
        return self._facets

    # -- reduction -------------------------------------------------------------

    def extreme_rays(self) -> "GeneratedCone":
        """Drop generators that are nonnegative combinations of the others.

        Uses a convex hull of the generators scaled onto the slice ``c . x = 1``
        for a pointedness certificate ``c``; cones that are not pointed are
        returned unchanged.
        """
        c = self.pointedness_certificate()
        m = len(self.generators)
        if c is None or m <= self.nvars:
            return self
        cf = np.array([float(a) for a in c])
        pts = self._gen_array.T / (self._gen_array.T @ cf)[:, None]
        # coordinates on the slice: project onto an orthonormal basis of c-perp
        basis = np.linalg.svd(cf[None, :])[2][1:]
        coords = pts @ basis.T
        if coords.shape[1] == 1:
            keep = sorted({int(np.argmin(coords[:, 0])), int(np.argmax(coords[:, 0]))})
        else:
            from scipy.spatial import ConvexHull

            keep = sorted(ConvexHull(coords).vertices.tolist())
        return GeneratedCone([self.generators[k] for k in keep], nvars=self.nvars)


def inner_approximation(
    predicate: Callable[[Vector], bool],
    nvars: int,
    n_rays: int = 200,
    seed: int = 0,
    candidates: Iterable[Sequence] = (),
    denominator: int = 1000,
    max_draws: int | None = None,
) -> GeneratedCone:
    """Polyhedral approximation of a nonpolyhedral cone by sampled rays.

    Rays are drawn uniformly on the unit sphere, rounded to rationals with the
    given denominator, and kept when ``predicate`` accepts them; ``candidates``
    are tried first.  The result is the conic hull of the kept rays, so it can
    overshoot where the target set is not convex.
    """
    rng = np.random.default_rng(seed)
    kept: list[Vector] = []
    for c in candidates:
        u = vec(c)
        if predicate(u):
            kept.append(u)
    draws = 0
    cap = max_draws if max_draws is not None else 1000 * n_rays
    while len(kept) < n_rays and draws < cap:
        g = rng.normal(size=nvars)
        g /= np.linalg.norm(g)
        u = tuple(Fraction(round(a * denominator), denominator) for a in g)
        draws += 1
        if all(a == 0 for a in u):
            continue
        if predicate(u):
            kept.append(u)
    if not kept:
        raise ConeError("no sampled ray passed the membership predicate")
    return GeneratedCone(kept, nvars=nvars)


def orthant(n: int) -> GeneratedCone:
    return GeneratedCone.orthant(n)


def as_float(x: Sequence) -> np.ndarray:
    return np.asarray([float(to_fraction(a)) if not isinstance(a, float) else a for a in x])
