from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import positive_polynomials, positive_rationals, vectors, x1, x2
from klorentz.cones import GeneratedCone
from klorentz.exact import DimensionError
from klorentz.gibbs import GibbsModel, admissible_pairs, is_multiaffine, rayleigh_measure_check
from klorentz.lorentz import delta_ij, rayleigh_matrix
from klorentz.polycore import Polynomial, SymMatrix

F = Fraction
t = Polynomial.variable(1, 0)


def model(f):
    return GibbsModel.from_polynomial(f)


def log_hessian(f, x):
    """Exact Hessian of log f at x, from the symbolic gradient and Hessian."""
    fx, g, H = f.eval(x), f.gradient(x), f.hessian(x)
    n = f.nvars
    return [[H[i, j] / fx - g[i] * g[j] / fx**2 for j in range(n)] for i in range(n)]


class TestProbabilities:
    def test_linear(self):
        assert model(x1 + x2).prob((1, 1), (1, 0)) == F(1, 2)

    def test_univariate(self):
        assert model(1 + t).prob((3,), (1,)) == F(3, 4)

    def test_mixed(self):
        assert model(x1 * x2 + 2 * x1).prob((1, 1), (1, 1)) == F(1, 3)

    def test_outside_support(self):
        assert model(x1 + x2).prob((1, 1), (2, 0)) == 0

    def test_point_must_be_positive(self):
        with pytest.raises(ValueError):
            model(x1 + x2).prob((0, 1), (1, 0))

    def test_negative_coefficient_rejected(self):
        with pytest.raises(ValueError):
            model(x1 - x2)

    def test_zero_rejected(self):
        with pytest.raises(ValueError):
            model(Polynomial.zero(2))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            model(x1 + x2).mean((1, 2, 3))


class TestMoments:
    def test_bernoulli_mean(self):
        assert model(1 + t).mean((1,)) == (F(1, 2),)

    def test_symmetric_mean(self):
        assert model(x1 + x2).mean((1, 1)) == (F(1, 2), F(1, 2))

    def test_binomial_mean(self):
        assert model((1 + t) ** 2).mean((1,)) == (1,)

    def test_bernoulli_variance(self):
        m = model(1 + t)
        assert m.covariance((1,)) == SymMatrix.from_rows([[F(1, 4)]])
        # d^2/dtheta^2 log(1 + e^theta) at 0
        assert m.theta_hessian_fd((1,))[0, 0] == pytest.approx(0.25, abs=1e-8)

    def test_point_mass(self):
        assert model(x1 * x2).covariance((2, 3)).is_zero()

    def test_positive_correlation(self):
        cov = model(1 + x1 * x2).covariance((1, 1))
        assert cov[0, 1] == F(1, 4)


class TestRayleighMeasure:
    def test_product_measure(self, orthant2):
        cert = rayleigh_measure_check(model((1 + x1) * (1 + x2)), orthant2, samples=50)
        assert cert.unknown and cert.details["violations"] == 0
        assert delta_ij((1 + x1) * (1 + x2), 0, 1).is_zero()

    def test_linear(self, orthant2):
        cert = rayleigh_measure_check(model(x1 + x2), orthant2, samples=50)
        assert cert.unknown and cert.details["violations"] == 0

    def test_positively_correlated(self, orthant2):
        f = 1 + x1 * x2
        assert delta_ij(f, 0, 1) == Polynomial.constant(2, -1)
        cert = rayleigh_measure_check(model(f), orthant2, samples=50)
        assert cert.no
        w = cert.witness
        assert (w["i"], w["j"]) == (0, 1) and w["delta"] == -1
        incl = w["inclusion"]
        assert incl["P_ij"] > incl["P_i"] * incl["P_j"]

    def test_no_admissible_pairs(self):
        K = GeneratedCone([(1, 1), (1, 2)])
        assert admissible_pairs(K) == []
        with pytest.raises(ValueError):
            rayleigh_measure_check(model(x1 + x2), K)

    def test_partial_pairs(self):
        K = GeneratedCone([(1, 0), (1, 1)])
        assert admissible_pairs(K) == [(0, 0)]

    def test_multiaffine(self):
        assert is_multiaffine(1 + x1 * x2)
        assert not is_multiaffine(x1**2)


class TestIdentities:
    @given(positive_polynomials(nvars=2), vectors(2, positive_rationals))
    def test_normalisation(self, f, x):
        assert sum(model(f).distribution(x).values()) == 1

    @given(positive_polynomials(nvars=3), vectors(3, positive_rationals))
    def test_mean_identity(self, f, x):
        m = model(f)
        assert m.mean(x) == m.mean_from_gradient(x)

    @given(
        positive_polynomials(nvars=2, max_degree=3),
        vectors(2, st.builds(F, st.integers(1, 8), st.integers(1, 4))),
    )
    def test_covariance_matches_theta_hessian(self, f, x):
        m = model(f)
        cov = m.covariance(x).to_numpy()
        assert np.abs(cov - m.theta_hessian_fd(x)).max() <= 1e-8

    @given(positive_polynomials(nvars=2), vectors(2, positive_rationals))
    def test_delta_sign_matches_log_hessian(self, f, x):
        d = delta_ij(f, 0, 1).eval(x)
        h = log_hessian(f, x)[0][1]
        assert (d > 0) == (-h > 0) and (d < 0) == (-h < 0)

    @given(positive_polynomials(nvars=2), vectors(2, positive_rationals))
    def test_rayleigh_matrix_is_negative_scaled_log_hessian(self, f, x):
        fx = f.eval(x)
        M = rayleigh_matrix(f, x)
        H = log_hessian(f, x)
        assert all(M[i, j] == -(fx**2) * H[i][j] for i in range(2) for j in range(2))

    def test_clc_model_has_concave_log(self, orthant2):
        from klorentz.lorentz import clc_check

        f = (x1 + x2) * (x1 + 3 * x2)
        assert clc_check(f, orthant2, samples=50).unknown
        for x in orthant2.interior_samples(20, seed=4):
            H = np.array(log_hessian(f, x), dtype=float)
            assert np.linalg.eigvalsh(-H).min() >= -1e-12
