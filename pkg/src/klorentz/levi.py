"""Linear evolution variational inequalities on cones.

The system ``<x' + A x + F(x), v - x> >= 0`` for all ``v`` in K, with ``x(t)``
in K, is integrated by projected explicit Euler (catching-up):
``x_{k+1} = Proj_K(x_k - h (A x_k + F(x_k)))``.  Stability is approached from
two sides: exact certificates (copositivity, Lyapunov conditions) and
empirical trajectories, which are only ever reported as evidence.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .certificate import Certificate, Status
from .cones import GeneratedCone
from .exact import DimensionError, Matrix, mat, matvec
from .lorentz import PSD_TOL, _psd_float, quadratic_lorentzian
from .polycore import Polynomial, SymMatrix
from .semipositive import _is_orthant

FEASIBILITY_TOL = 1e-7


class Verdict(str, enum.Enum):
    STABLE = "StableEvidence"
    ASYMPTOTIC = "AsymptoticEvidence"
    UNSTABLE = "UnstableWitness"
    INCONCLUSIVE = "Inconclusive"


# -- system and trajectories ------------------------------------------------------


class LeviSystem:
    """``x' + A x + F(x)`` in ``-N_K(x)`` with K a generated cone."""

    def __init__(self, A, K: GeneratedCone, F: Sequence[Polynomial] | None = None):
        self.A_exact: Matrix = mat(A)
        n = len(self.A_exact)
        if any(len(r) != n for r in self.A_exact):
            raise DimensionError("A must be square")
        if K.nvars != n:
            raise DimensionError(f"cone lives in R^{K.nvars}, A is {n}x{n}")
        if F is not None:
            F = tuple(F)
            if len(F) != n or any(p.nvars != n for p in F):
                raise DimensionError("F must have n component polynomials in n variables")
        self.A = np.array([[float(a) for a in r] for r in self.A_exact])
        self.K = K
        self.F = F
        self._orthant = _is_orthant(K)
        # projection only needs the extreme rays
        self._proj_cone = K if self._orthant else K.extreme_rays()

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @classmethod
    def from_json(cls, data) -> "LeviSystem":
        from .semipositive import matrix_from_json

        if not isinstance(data, dict):
            raise ValueError("system JSON must be an object")
        if "A" not in data:
            raise ValueError("system JSON is missing field 'A'")
        A = matrix_from_json(data["A"] if isinstance(data["A"], dict) else {"rows": data["A"]})
        n = len(A)
        K = GeneratedCone.from_json(data["cone"]) if data.get("cone") is not None else GeneratedCone.orthant(n)
        F = None
        if data.get("F") is not None:
            try:
                F = [Polynomial.from_json(p) for p in data["F"]]
            except (TypeError, ValueError, KeyError) as exc:
                raise ValueError(f"field 'F': {exc}") from None
        try:
            return cls(A, K, F)
        except DimensionError as exc:
            raise ValueError(str(exc)) from None

    def vector_field(self, x: np.ndarray) -> np.ndarray:
        """``A x + F(x)``; rows of a 2-D array are treated as separate states."""
        x = np.asarray(x, dtype=float)
        out = x @ self.A.T
        if self.F is not None:
            if x.ndim == 1:
                out = out + np.array([p.eval_float(x) for p in self.F])
            else:
                out = out + np.array([[p.eval_float(row) for p in self.F] for row in x])
        return out

    def project(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        if self._orthant:
            return np.maximum(z, 0.0)
        if z.ndim == 1:
            return self._proj_cone.project(z)
        return self._proj_cone.project_rows(z)

    def step(self, x: Sequence[float], h: float) -> np.ndarray:
        if h <= 0:
            raise ValueError("step size must be positive")
        x = np.asarray(x, dtype=float)
        if x.shape[-1:] != (self.n,):
            raise DimensionError(f"state of shape {x.shape} for a system in R^{self.n}")
        return self.project(x - h * self.vector_field(x))

    def simulate(self, x0: Sequence[float], h: float, T: float, stop_norm: float | None = None) -> "Trajectory":
        """Iterate :meth:`step` for ``round(T/h)`` steps.

        ``stop_norm`` ends the run early once the state norm exceeds it (used
        to cut off divergent runs).
        """
        limits = None if stop_norm is None else [stop_norm]
        return self.simulate_many([x0], h, T, limits)[0]

    def simulate_many(
        self, x0s: Sequence[Sequence[float]], h: float, T: float, stop_norms: Sequence[float | None] | None = None
    ) -> list["Trajectory"]:
        """Simulate several starts in lockstep; same result as separate runs."""
        if h <= 0 or T <= 0:
            raise ValueError("h and T must be positive")
        X = np.array([np.asarray(x, dtype=float) for x in x0s])
        if X.ndim != 2 or X.shape[1] != self.n:
            raise DimensionError(f"start points must have length {self.n}")
        for x in X:
            if not self.K.contains(x, mode="tolerance", tol=FEASIBILITY_TOL):
                raise ValueError(f"initial state {x.tolist()} is not in the cone")
        limits = np.array([np.inf if s is None else s for s in (stop_norms or [None] * len(X))], dtype=float)
        steps = int(round(T / h))
        states = np.empty((steps + 1,) + X.shape)
        states[0] = X
        last = np.full(len(X), steps)
        live = np.ones(len(X), dtype=bool)
        for k in range(1, steps + 1):
            if live.all():
                X = self.step(X, h)
            else:
                X = X.copy()
                X[live] = self.step(X[live], h)
            states[k] = X
            over = live & (np.linalg.norm(X, axis=1) > limits)
            if over.any():
                last[over] = k
                live &= ~over
                if not live.any():
                    break
        return [
            Trajectory(h * np.arange(last[i] + 1), states[: last[i] + 1, i].copy(), h) for i in range(len(X))
        ]


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    h: float

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.states, axis=1)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t"] + [f"x{i + 1}" for i in range(self.states.shape[1])])
        for t, x in zip(self.times, self.states):
            w.writerow([repr(float(t))] + [repr(float(a)) for a in x])
        return buf.getvalue()


# -- certificates -------------------------------------------------------------------


def copositivity(Q: SymMatrix, K: GeneratedCone, seed: int = 0, samples: int = 200) -> Certificate:
    """Is ``x^T Q x >= 0`` on K?

    Yes via PSD (floating eigenvalues) or acuteness of K with respect to Q;
    no via an exact negative value at a generator or a seeded interior
    sample.  ``details["strict"]`` records whether strict copositivity is
    also certified.
    """
    if Q.n != K.nvars:
        raise DimensionError(f"{Q.n}x{Q.n} matrix for a cone in R^{K.nvars}")
    psd, lam_min = _psd_float(Q)
    if psd:
        return Certificate(
            Status.YES,
            samples_used=0,
            seed=seed,
            details={"reason": "positive semidefinite", "min_eigenvalue": lam_min, "strict": lam_min > PSD_TOL},
        )
    acute = K.acute_wrt(Q, seed=seed)
    if acute.yes:
        strict = all(Q.quad(u) > 0 for u in K.generators)
        return Certificate(
            Status.YES, samples_used=acute.samples_used, seed=seed, details={"reason": "acute", "strict": strict}
        )
    used = 0
    for u in K.generators:
        used += 1
        val = Q.quad(u)
        if val < 0:
            return Certificate(Status.NO, witness={"x": u, "value": val}, samples_used=used, seed=seed)
    if K.properness().full_dimensional:
        for x in K.interior_samples(samples, seed=seed):
            used += 1
            val = Q.quad(x)
            if val < 0:
                return Certificate(Status.NO, witness={"x": x, "value": val}, samples_used=used, seed=seed)
    return Certificate(Status.UNKNOWN, samples_used=used, seed=seed)


@dataclass
class ChainReport:
    lorentzian: Certificate
    copositivity: Certificate
    chain: list[str]
    verdict: Verdict

    def to_json(self) -> dict:
        return {
            "lorentzian": self.lorentzian.to_json(),
            "copositivity": self.copositivity.to_json(),
            "chain": list(self.chain),
            "verdict": self.verdict.value,
        }


def quadratic_lorentzian_implies_stable(q: SymMatrix, K: GeneratedCone, seed: int = 0) -> ChainReport:
    """Chain: K-Lorentzian form => copositive => Lyapunov semi-stable (P = I/2) => stable.

    When the Lorentzian check is inconclusive or negative the chain does not
    apply and only the copositivity certificate is reported.
    """
    lor = quadratic_lorentzian(q, K, seed=seed)
    cop = copositivity(q, K, seed=seed)
    if not lor.yes:
        return ChainReport(lor, cop, [], Verdict.INCONCLUSIVE)
    chain = [
        "quadratic form is K-Lorentzian",
        "A is K-copositive",
        "A is Lyapunov semi-stable on K with P = I/2",
        "trivial solution is stable w.r.t. K",
    ]
    verdict = Verdict.STABLE
    if cop.details.get("strict"):
        chain.append("strict copositivity: asymptotically stable w.r.t. K")
        verdict = Verdict.ASYMPTOTIC
    return ChainReport(lor, cop, chain, verdict)


def _sym_times(P: SymMatrix, A: Matrix) -> SymMatrix:
    """``sym((P + P^T) A)`` for symmetric P, i.e. ``P A + A^T P``."""
    n = P.n
    PA = [[sum(P[i, k] * A[k][j] for k in range(n)) for j in range(n)] for i in range(n)]
    return SymMatrix.from_rows([[PA[i][j] + PA[j][i] for j in range(n)] for i in range(n)])


def _norm2(x) -> Fraction:
    return sum((a * a for a in x), Fraction(0))


def lyapunov_semistability_check(
    A, P: SymMatrix, K: GeneratedCone, seed: int = 0, samples: int = 200
) -> Certificate:
    """Conditions (a) positivity of P on K, (b) K-copositivity of
    ``P A + A^T P``, (c) ``(I - 2P) u`` in K for every boundary generator u."""
    A = mat(A)
    n = P.n
    if len(A) != n or K.nvars != n:
        raise DimensionError("A, P and K dimensions differ")
    parts: dict[str, str] = {}

    # (a)
    psd, lam_min = _psd_float(P)
    if psd and lam_min > PSD_TOL:
        parts["a"] = Status.YES.value
    else:
        bad = next((u for u in K.generators if P.quad(u) <= 0), None)
        if bad is not None:
            return Certificate(
                Status.NO,
                witness={"condition": "a", "x": bad, "value": P.quad(bad)},
                seed=seed,
                details={"conditions": parts},
            )
        if K.acute_wrt(P).yes:
            parts["a"] = Status.YES.value  # acute with positive generator diagonal: strictly copositive
        else:
            parts["a"] = Status.UNKNOWN.value
            if K.properness().full_dimensional:
                for x in K.interior_samples(samples, seed=seed):
                    if P.quad(x) <= 0:
                        return Certificate(
                            Status.NO,
                            witness={"condition": "a", "x": x, "value": P.quad(x)},
                            seed=seed,
                            details={"conditions": parts},
                        )

    # (b)
    cop = copositivity(_sym_times(P, A), K, seed=seed, samples=samples)
    if cop.no:
        return Certificate(
            Status.NO, witness={"condition": "b", **cop.witness}, seed=seed, details={"conditions": parts}
        )
    parts["b"] = cop.status.value

    # (c)
    M = [[Fraction(int(i == j)) - 2 * P[i, j] for j in range(n)] for i in range(n)]
    proper = K.is_proper()
    for u in K.generators:
        if K.contains(matvec(M, u)):
            continue
        if proper and K.contains_interior(u):
            continue  # not a boundary point; the condition does not apply
        return Certificate(
            Status.NO,
            witness={"condition": "c", "x": u, "image": matvec(M, u)},
            seed=seed,
            details={"conditions": parts},
        )
    parts["c"] = Status.YES.value

    status = Status.YES if all(v == Status.YES.value for v in parts.values()) else Status.UNKNOWN
    return Certificate(status, seed=seed, details={"conditions": parts})


def lyapunov_condition_check(
    sys: LeviSystem,
    P: SymMatrix,
    sigma: float = 1.0,
    lam: float = 0.0,
    samples: int = 1000,
    seed: int = 0,
) -> Certificate:
    """Sampled check of the Lyapunov conditions for ``V(x) = x^T P x`` on ``K ∩ {|x| <= sigma}``.

    Checked: ``V(x) >= c |x|^2`` with ``c > 0`` (reports the fitted c),
    ``x - grad V(x)`` in K on boundary rays, and
    ``<A x + F(x), grad V(x)> >= lam V(x)``.
    """
    if sigma <= 0 or lam < 0:
        raise ValueError("need sigma > 0 and lam >= 0")
    if P.n != sys.n:
        raise DimensionError("V and system dimensions differ")
    rng = np.random.default_rng(seed)
    Pf = P.to_numpy()
    G = Pf + Pf.T
    K = sys.K

    pts = K.random_points_float(samples, rng)
    norms = np.linalg.norm(pts, axis=1)
    pts = pts[norms > 0]
    pts = pts / np.linalg.norm(pts, axis=1)[:, None] * (sigma * rng.uniform(0.05, 1.0, size=len(pts)))[:, None]
    rays = K.matrix.T / np.linalg.norm(K.matrix.T, axis=1)[:, None] * sigma
    cloud = np.vstack([rays, pts])

    def V(x):
        return float(x @ Pf @ x)

    c = np.inf
    for x in cloud:
        ratio = V(x) / float(x @ x)
        if ratio <= 0:
            return Certificate(
                Status.NO, witness={"condition": "positivity", "x": x, "V": V(x)}, samples_used=len(cloud), seed=seed
            )
        c = min(c, ratio)

    slack = 1e-9
    for u in rays:
        if not K.contains(u - G @ u, mode="tolerance", tol=1e-7):
            return Certificate(
                Status.NO, witness={"condition": "boundary", "x": u, "image": u - G @ u}, samples_used=len(cloud), seed=seed
            )
    for x in cloud:
        lhs = float(sys.vector_field(x) @ (G @ x))
        if lhs < lam * V(x) - slack * max(1.0, float(x @ x)):
            return Certificate(
                Status.NO,
                witness={"condition": "decay", "x": x, "inner": lhs, "lamV": lam * V(x)},
                samples_used=len(cloud),
                seed=seed,
            )
    return Certificate(
        Status.UNKNOWN,
        samples_used=len(cloud),
        seed=seed,
        details={"c": c, "tau": 2, "V0": 0, "violations": 0},
    )


# -- experiments --------------------------------------------------------------------


@dataclass
class StabilityReport:
    copositivity: Certificate
    lyapunov: Certificate
    empirical: dict
    verdict: Verdict
    runs: list[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        from .certificate import jsonable

        return {
            "copositivity": self.copositivity.to_json(),
            "lyapunov": self.lyapunov.to_json(),
            "empirical": jsonable(self.empirical),
            "runs": jsonable(self.runs),
            "verdict": self.verdict.value,
        }


def standard_starts(K: GeneratedCone) -> list[np.ndarray]:
    """The generators of K and their sum."""
    U = K.matrix.T
    return [u for u in U] + [U.sum(axis=0)]


def _monotone_after(norms: np.ndarray, slack: float = 1e-9) -> int:
    """Smallest index from which the norm sequence is nonincreasing."""
    rises = np.nonzero(np.diff(norms) > slack * np.maximum(1.0, norms[:-1]))[0]
    return int(rises[-1]) + 1 if len(rises) else 0


def stability_experiment(
    sys: LeviSystem, x0s: Sequence[Sequence[float]], h: float = 1e-3, T: float = 20.0, seed: int = 0
) -> StabilityReport:
    """Simulate every start and classify the outcome.

    AsymptoticEvidence: every ``|x(T)|/|x0| <= 1e-4`` and the run with step
    h/2 lands within 10% of the step-h end point.  UnstableWitness: some
    state norm exceeds ``1e3 |x0|``.  StableEvidence: norms stay within a
    factor 10 of the start.
    """
    x0s = [np.asarray(x, dtype=float) for x in x0s]
    if not x0s:
        raise ValueError("need at least one start point")
    half = Fraction(1, 2)
    P = SymMatrix.from_rows([[half * int(i == j) for j in range(sys.n)] for i in range(sys.n)])
    cop = copositivity(SymMatrix.symmetric_part(sys.A_exact), sys.K, seed=seed)
    lyap = lyapunov_semistability_check(sys.A_exact, P, sys.K, seed=seed)

    norms0 = [float(np.linalg.norm(x)) for x in x0s]
    trajs = sys.simulate_many(x0s, h, T, [1e3 * n0 if n0 > 0 else None for n0 in norms0])
    runs = []
    diverged = None
    for idx, (x0, n0, traj) in enumerate(zip(x0s, norms0, trajs)):
        norms = traj.norms()
        run = {
            "start": x0,
            "max_norm": float(norms.max()),
            "final_norm": float(norms[-1]),
            "final_norm_ratio": float(norms[-1] / n0) if n0 > 0 else 0.0,
            "growth": float(norms.max() / n0) if n0 > 0 else 0.0,
            "monotone_after": _monotone_after(norms),
            "steps": len(norms) - 1,
        }
        if n0 > 0 and norms.max() > 1e3 * n0:
            run["diverged_at"] = float(traj.times[-1])
            diverged = idx if diverged is None else diverged
        runs.append(run)
    refine = [i for i, r in enumerate(runs) if "diverged_at" not in r and r["final_norm_ratio"] <= 1e-4]
    if refine:
        fine = sys.simulate_many([x0s[i] for i in refine], h / 2, T)
        for i, tf in zip(refine, fine):
            gap = float(np.linalg.norm(trajs[i].final - tf.final))
            runs[i]["halved_step_gap"] = gap
            runs[i]["halved_step_agrees"] = gap <= 0.1 * max(float(np.linalg.norm(tf.final)), 1e-12 * norms0[i])

    empirical = {
        "max_norm": max(r["max_norm"] for r in runs),
        "final_norm_ratio": max(r["final_norm_ratio"] for r in runs),
        "monotone_after": max(r["monotone_after"] for r in runs),
        "h": h,
        "T": T,
    }
    if diverged is not None:
        empirical["diverging_start"] = diverged
        verdict = Verdict.UNSTABLE
    elif all(r["final_norm_ratio"] <= 1e-4 and r.get("halved_step_agrees") for r in runs):
        verdict = Verdict.ASYMPTOTIC
    elif max(r["growth"] for r in runs) <= 10:
        verdict = Verdict.STABLE
    else:
        verdict = Verdict.INCONCLUSIVE
    return StabilityReport(cop, lyap, empirical, verdict, runs)
