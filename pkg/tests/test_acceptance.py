"""Acceptance criteria, each checked at its stated tolerance.

Every test records a one-line verdict that is printed in the terminal summary.
"""

import math
import random
from contextlib import contextmanager
from fractions import Fraction

import numpy as np

from conftest import A2, A3, A4, ACCEPTANCE, CUBIC, Q3
from klorentz.cones import GeneratedCone, inner_approximation
from klorentz.gibbs import GibbsModel
from klorentz.levi import LeviSystem, Verdict, copositivity, stability_experiment, standard_starts
from klorentz.lorentz import (
    inertia,
    log_hessian_identity_check,
    quadratic_lorentzian,
    rayleigh_cross,
    rayleigh_cross_poly,
    rayleigh_diagonal,
    rayleigh_matrix,
    ulc_bivariate,
)
from klorentz.polycore import Polynomial, SymMatrix
from klorentz.realroots import is_real_rooted
from klorentz.semipositive import generating_polynomial, hyperbolic_direction
from klorentz.tower import ConeTower, MembershipClass, connectivity_witness, convexity_falsifier, tower_membership

F = Fraction


@contextmanager
def criterion(n, label):
    notes = []
    try:
        yield notes
    except BaseException as exc:
        reason = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        ACCEPTANCE[n] = (label, False, "; ".join(notes + [reason]))
        print(f"criterion {n}: FAIL {label}")
        raise
    ACCEPTANCE[n] = (label, True, "; ".join(notes))
    print(f"criterion {n}: PASS {label}")


def rand_fraction(rng, lo=-6, hi=6, den=4):
    return F(rng.randint(lo, hi), rng.randint(1, den))


def rand_poly(rng, nvars, degree, terms=5, homogeneous=False, positive=False):
    coeffs = {}
    for _ in range(terms):
        if homogeneous:
            cuts = sorted(rng.randint(0, degree) for _ in range(nvars - 1))
            bounds = [0, *cuts, degree]
            exp = tuple(bounds[i + 1] - bounds[i] for i in range(nvars))
        else:
            exp = tuple(rng.randint(0, degree // nvars + 1) for _ in range(nvars))
        coeffs[exp] = rng.randint(1, 6) if positive else rng.randint(-5, 5)
    return Polynomial(nvars, coeffs)


def cubic_discriminant(a, b, c, d):
    """Discriminant of a t^3 + b t^2 + c t + d."""
    return 18 * a * b * c * d - 4 * b**3 * d + b**2 * c**2 - 4 * a * c**3 - 27 * a**2 * d**2


def test_criterion_1_ulc():
    with criterion(1, "ULC certificate of the bivariate cubic"):
        c = [CUBIC.coefficient((3 - k, k)) for k in range(4)]
        assert c == [4, 15, 18, 6]
        assert [F(a, math.comb(3, k)) for k, a in enumerate(c)] == [4, 5, 6, 6]
        assert ulc_bivariate(CUBIC) is True


def test_criterion_2_hyperbolicity_counterexample():
    with criterion(2, "non-real-rooted restriction at (2,1)"):
        coeffs = CUBIC.restriction_taylor((2, 1), (1, 1))
        assert coeffs == (134, 276, 189, 43)
        assert not is_real_rooted(coeffs)
        d, c, b, a = coeffs
        assert cubic_discriminant(a, b, c, d) == -324


def test_criterion_3_rayleigh_quartic():
    with criterion(3, "Rayleigh cross quartic"):
        R = rayleigh_cross_poly(CUBIC, (1, 1), (2, 1))
        assert R.is_homogeneous() == 4
        assert [R.coefficient((4 - k, k)) for k in range(5)] == [3 * a for a in (119, 580, 1002, 768, 240)]


def test_criterion_4_generating_polynomial():
    with criterion(4, "generating polynomial of the 4x4 example"):
        z = Polynomial.variables(4)
        expected = (
            -sum((v**4 for v in z), Polynomial.zero(4))
            + 2 * sum((z[i] ** 2 * z[j] ** 2 for i in range(4) for j in range(i + 1, 4)), Polynomial.zero(4))
            + 8 * z[0] * z[1] * z[2] * z[3]
        )
        fA = generating_polynomial(A4)
        assert fA == expected
        J_I = SymMatrix.from_rows([[int(i != j) for j in range(4)] for i in range(4)])
        assert fA.hessian((1, 1, 1, 1)) == J_I.scale(16)
        eig = np.sort(np.linalg.eigvalsh(J_I.to_numpy()))
        assert np.abs(eig - [-1, -1, -1, 3]).max() <= 1e-9
        assert inertia(J_I).as_tuple() == (1, 3, 0)


def test_criterion_5_hyperbolic_direction():
    with criterion(5, "hyperbolic direction of the 4x4 example"):
        assert hyperbolic_direction(A4) == (F(1, 2),) * 4


def test_criterion_6_levi_2d():
    with criterion(6, "2D LEVI stability"):
        eig = np.sort(np.linalg.eigvals(np.array(A2, dtype=float)).real)
        assert np.abs(eig - [1 - math.sqrt(2), 1 + math.sqrt(2)]).max() <= 1e-9
        sys2 = LeviSystem(A2, GeneratedCone.orthant(2))
        assert copositivity(SymMatrix.symmetric_part(A2), sys2.K).yes
        starts = [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]
        for x0, traj in zip(starts, sys2.simulate_many(starts, 1e-3, 20.0)):
            assert np.linalg.norm(traj.final) <= 1e-6 * max(1.0, np.linalg.norm(x0))
        report = stability_experiment(sys2, starts, h=1e-3, T=20.0)
        assert report.verdict is Verdict.ASYMPTOTIC
        assert all(run["halved_step_agrees"] for run in report.runs)


def test_criterion_7_levi_3d():
    with criterion(7, "3D LEVI on the orthant") as notes:
        eig = np.linalg.eigvals(np.array(A3, dtype=float))
        eig = sorted(eig, key=lambda z: (z.real, z.imag))
        expected = [complex(-2.1387, -1.5087), complex(-2.1387, 1.5087), complex(6.2773, 0)]
        assert max(abs(a - b) for a, b in zip(eig, expected)) <= 1e-3
        cert = copositivity(SymMatrix.symmetric_part(A3), GeneratedCone.orthant(3))
        assert cert.no and cert.witness == {"x": (0, 1, 0), "value": -1}
        notes.append("eigenvalues and copositivity hold")
        sys3 = LeviSystem(A3, GeneratedCone.orthant(3))
        report = stability_experiment(sys3, standard_starts(sys3.K))
        # the ray through e2 is invariant with x2' = x2, so this clause cannot hold
        assert report.verdict is Verdict.ASYMPTOTIC, f"stability_experiment reports {report.verdict.value}"


def test_criterion_8_quadratic_pipeline():
    with criterion(8, "quadratic tower, convexity and LEVI on the inner approximation"):
        v = (1, 1, 1)
        T = ConeTower.build(Q3, v)
        y = Polynomial.variables(3)
        assert list(T.tower) == [Q3, 9 * y[0] + 17 * y[1] + 14 * y[2], Polynomial.constant(3, 40)]
        cert = convexity_falsifier(T, trials=10_000, seed=0)
        assert cert.no
        a, b, mid = cert.witness["a"], cert.witness["b"], cert.witness["midpoint"]
        assert tower_membership(T, a) is not MembershipClass.OUTSIDE
        assert tower_membership(T, b) is not MembershipClass.OUTSIDE
        assert tower_membership(T, mid) is MembershipClass.OUTSIDE

        region = inner_approximation(lambda u: all(c >= 0 for c in u) and u in T, 3, n_rays=200, seed=0)
        assert convexity_falsifier(region, trials=10_000, seed=0).unknown
        K = region.extreme_rays()
        assert K.is_proper()
        assert all(tower_membership(T, g) is not MembershipClass.OUTSIDE for g in K.generators)
        report = stability_experiment(LeviSystem(A3, K), standard_starts(K))
        assert report.verdict is Verdict.ASYMPTOTIC


def test_criterion_9_identity_suite():
    with criterion(9, "exact identity suite over 100 random instances"):
        rng = random.Random(2024)
        for _ in range(100):
            f = rand_poly(rng, 3, 4, positive=True) + Polynomial.constant(3, rng.randint(1, 5))
            x = tuple(F(rng.randint(1, 9), rng.randint(1, 4)) for _ in range(3))
            u, v, w = (tuple(rand_fraction(rng) for _ in range(3)) for _ in range(3))
            assert log_hessian_identity_check(f, x) == 0
            M = rayleigh_matrix(f, x)
            assert rayleigh_diagonal(f, x, u) == M.quad(u)
            assert rayleigh_cross(f, x, v, w) == M.bilinear(v, w)

        for _ in range(100):
            d = rng.randint(1, 5)
            f = rand_poly(rng, 3, d, homogeneous=True)
            if f.is_zero():
                continue
            v = tuple(rand_fraction(rng) for _ in range(3))
            tower = f.derivative_tower(v)
            top = f
            for _ in range(d):
                top = top.dir_derivative(v)
            assert top.is_constant()
            for k, g in enumerate(tower):
                assert g.is_zero() or g.is_homogeneous() == d - k

        worst = 0.0
        for _ in range(100):
            f = rand_poly(rng, 2, 3, positive=True) + Polynomial.constant(2, rng.randint(1, 4))
            x = tuple(F(rng.randint(1, 8), rng.randint(1, 4)) for _ in range(2))
            m = GibbsModel.from_polynomial(f)
            dist = m.distribution(x)
            assert sum(dist.values()) == 1
            mean = m.mean(x)
            assert mean == m.mean_from_gradient(x)
            assert mean == tuple(sum(p * a[i] for a, p in dist.items()) for i in range(2))
            cov = m.covariance(x)
            for i in range(2):
                for j in range(2):
                    direct = sum(p * (a[i] - mean[i]) * (a[j] - mean[j]) for a, p in dist.items())
                    assert cov[i, j] == direct
            worst = max(worst, float(np.abs(cov.to_numpy() - m.theta_hessian_fd(x)).max()))
        assert worst <= 1e-8


def test_criterion_10_acuteness_completeness():
    with criterion(10, "acuteness verdicts against brute-force sign scan") as notes:
        rng = random.Random(10)
        nrng = np.random.default_rng(10)
        verdicts = {"yes": 0, "no": 0}
        for _ in range(50):
            n = rng.randint(2, 3)
            gens = [tuple(rng.randint(0, 4) for _ in range(n)) for _ in range(n + rng.randint(0, 2))]
            gens = [g for g in gens if any(g)] or [(1,) * n]
            K = GeneratedCone(gens)
            Q = SymMatrix.symmetric_part([[rng.randint(-2, 6) for _ in range(n)] for _ in range(n)])
            cert = K.acute_wrt(Q)
            G = K.matrix
            X = G @ nrng.random((G.shape[1], 10_000))
            Y = G @ nrng.random((G.shape[1], 10_000))
            X /= np.maximum(np.linalg.norm(X, axis=0), 1e-300)
            Y /= np.maximum(np.linalg.norm(Y, axis=0), 1e-300)
            scan = np.einsum("ik,ij,jk->k", Y, Q.to_numpy(), X)
            if cert.yes:
                verdicts["yes"] += 1
                assert scan.min() >= -1e-12
            else:
                verdicts["no"] += 1
                assert cert.no
                u, w, val = cert.witness["u"], cert.witness["w"], cert.witness["value"]
                assert K.contains(u) and K.contains(w)
                assert Q.bilinear(u, w) == val < 0
        notes.append(f"{verdicts['yes']} acute, {verdicts['no']} not acute")
        assert verdicts["yes"] and verdicts["no"]


def test_criterion_11_interior_properties():
    with criterion(11, "exclusion and connectivity at interior points"):
        rng = random.Random(11)
        K = GeneratedCone.orthant(3)
        instances = []
        while len(instances) < 10:
            rows = [[rng.randint(0, 5) for _ in range(3)] for _ in range(3)]
            Q = SymMatrix.symmetric_part(rows)
            if quadratic_lorentzian(Q, K).yes:
                y = Polynomial.variables(3)
                f = sum((Q[i, j] * y[i] * y[j] for i in range(3) for j in range(3)), Polynomial.zero(3))
                instances.append(ConeTower.build(f, (1, 1, 1)))
        checked = 0
        while checked < 100:
            T = instances[checked % len(instances)]
            x = tuple(rand_fraction(rng) for _ in range(3))
            if tower_membership(T, x) is not MembershipClass.INTERIOR_OPEN:
                continue
            assert tower_membership(T, tuple(-a for a in x)) is MembershipClass.OUTSIDE
            assert connectivity_witness(T, x)
            checked += 1
