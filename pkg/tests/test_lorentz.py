from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import CUBIC, polynomials, positive_rationals, vectors, x1, x2, y1, y2, y3
from klorentz.cones import GeneratedCone
from klorentz.exact import DimensionError
from klorentz.lorentz import (
    clc_check,
    delta_ij,
    hyperbolicity_check,
    inertia,
    k_lorentzian_check,
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

F = Fraction

square_matrices = st.lists(st.lists(st.integers(-4, 4), min_size=4, max_size=4), min_size=4, max_size=4)


def eig_inertia(Q, gap=1e-6):
    w = np.linalg.eigvalsh(Q.to_numpy())
    return (int((w > gap).sum()), int((w < -gap).sum()), int((np.abs(w) <= gap).sum()))


class TestInertia:
    def test_diagonal(self):
        assert inertia(SymMatrix.from_rows([[2, 0, 0], [0, -3, 0], [0, 0, 0]])).as_tuple() == (1, 1, 1)

    def test_hyperbolic_plane(self):
        assert inertia(SymMatrix.from_rows([[0, 1], [1, 0]])).as_tuple() == (1, 1, 0)

    def test_ones_minus_identity(self):
        J_I = SymMatrix.from_rows([[int(i != j) for j in range(4)] for i in range(4)])
        assert inertia(J_I).as_tuple() == (1, 3, 0)
        assert np.allclose(sorted(np.linalg.eigvalsh(J_I.to_numpy())), [-1, -1, -1, 3])

    def test_zero_diagonal_block(self):
        Q = SymMatrix.from_rows([[0, 2, 0], [2, 0, 1], [0, 1, 0]])
        assert inertia(Q).as_tuple() == eig_inertia(Q)

    @given(square_matrices, square_matrices)
    def test_sylvester_law(self, rows, prows):
        Q = SymMatrix.symmetric_part(rows)
        # strictly diagonally dominant, hence invertible
        P = np.array([[13 if i == j else prows[i][j] for j in range(4)] for i in range(4)], dtype=object)
        PtQP = [
            [sum(P[k, i] * Q[k, l] * P[l, j] for k in range(4) for l in range(4)) for j in range(4)]
            for i in range(4)
        ]
        assert inertia(SymMatrix.from_rows(PtQP)) == inertia(Q)

    @given(square_matrices)
    def test_matches_eigenvalues(self, rows):
        Q = SymMatrix.symmetric_part(rows)
        w = np.abs(np.linalg.eigvalsh(Q.to_numpy()))
        if ((w > 1e-9) & (w < 1e-4)).any():
            return  # eigenvalue too close to zero for a float comparison
        assert inertia(Q).as_tuple() == eig_inertia(Q, gap=1e-9)


class TestQuadraticLorentzian:
    def test_hyperbolic_plane_on_orthant(self, orthant2):
        assert quadratic_lorentzian(SymMatrix.from_rows([[0, 1], [1, 0]]), orthant2).yes

    def test_identity_two_positive(self, orthant2):
        cert = quadratic_lorentzian(SymMatrix.from_rows([[1, 0], [0, 1]]), orthant2)
        assert cert.no and cert.witness == {"inertia": (2, 0, 0)}

    def test_indefinite_diagonal(self, orthant2):
        cert = quadratic_lorentzian(SymMatrix.from_rows([[1, 0], [0, -1]]), orthant2)
        assert cert.no
        assert cert.witness["value"] < 0
        assert cert.witness["w"] == (0, 1)

    def test_degenerate_is_unknown(self, orthant2):
        cert = quadratic_lorentzian(SymMatrix.from_rows([[1, 1], [1, 1]]), orthant2)
        assert cert.unknown

    def test_dimension_mismatch(self, orthant3):
        with pytest.raises(DimensionError):
            quadratic_lorentzian(SymMatrix.from_rows([[0, 1], [1, 0]]), orthant3)

    @given(st.lists(st.lists(st.integers(-3, 3), min_size=3, max_size=3), min_size=3, max_size=3), st.integers(0, 99))
    def test_yes_implies_reverse_cauchy_schwarz(self, rows, seed):
        Q = SymMatrix.symmetric_part(rows)
        K = GeneratedCone.orthant(3)
        if not quadratic_lorentzian(Q, K, seed=seed).yes:
            return
        rng = np.random.default_rng(seed)
        X = rng.uniform(0.01, 1.0, size=(1000, 3))
        Y = rng.uniform(0.01, 1.0, size=(1000, 3))
        A = Q.to_numpy()
        xy = np.einsum("ij,jk,ik->i", X, A, Y)
        xx = np.einsum("ij,jk,ik->i", X, A, X)
        yy = np.einsum("ij,jk,ik->i", Y, A, Y)
        assert xy.min() > 0
        assert (xy**2 - xx * yy).min() >= -1e-9 * (xy**2).max()

    def test_yes_reverse_cauchy_schwarz_fixed(self, orthant3):
        Q = SymMatrix.of_quadratic(y1 * y2 + y2 * y3 + y1 * y3)
        assert quadratic_lorentzian(Q, orthant3).yes


class TestKLorentzian:
    def test_product_of_three(self, orthant3):
        cert = k_lorentzian_check(y1 * y2 * y3, orthant3, samples=100, seed=0)
        assert cert.unknown and cert.samples_used >= 100
        assert cert.details["violations"] == 0

    def test_negative_pairing(self, orthant2):
        cert = k_lorentzian_check(x1**2 * x2 - x2**3, orthant2, samples=50)
        assert cert.no
        # re-verify: the witnessing quadratic pairs two generators negatively
        Q = cert.witness["quadratic"]
        bad = cert.witness["violation"]
        assert Q.bilinear(bad["u"], bad["w"]) < 0 or inertia(Q).n_plus != 1

    def test_lorentzian_cubic(self, orthant2):
        cert = k_lorentzian_check(CUBIC, orthant2, samples=100)
        assert cert.unknown and cert.details["violations"] == 0

    def test_linear_nonnegative(self, orthant2):
        assert k_lorentzian_check(x1 + 2 * x2, orthant2).yes
        assert k_lorentzian_check(x1 - x2, orthant2).no

    def test_inhomogeneous_rejected(self, orthant2):
        with pytest.raises(ValueError):
            k_lorentzian_check(x1**2 + x2, orthant2)


class TestCLC:
    def test_product(self, orthant2):
        cert = clc_check(x1 * x2, orthant2, samples=100)
        assert cert.unknown and cert.details["violations"] == 0

    def test_sum_of_squares(self, orthant2):
        cert = clc_check(x1**2 + x2**2, orthant2, samples=100)
        assert cert.no
        w = cert.witness
        g = (x1**2 + x2**2)
        for a in w["directions"]:
            g = g.dir_derivative(a)
        assert np.linalg.eigvalsh(rayleigh_matrix(g, w["x"]).to_numpy()).min() < 0

    def test_rayleigh_of_sum_of_squares_at_ones(self):
        M = rayleigh_matrix(x1**2 + x2**2, (1, 1))
        assert M == SymMatrix.from_rows([[0, 4], [4, 0]])
        assert sorted(np.linalg.eigvalsh(M.to_numpy())) == pytest.approx([-4, 4])

    def test_lorentzian_cubic(self, orthant2):
        cert = clc_check(CUBIC, orthant2, samples=200)
        assert cert.unknown and cert.details["violations"] == 0


class TestULC:
    def test_cubic(self):
        assert ulc_bivariate(CUBIC)

    def test_binomial(self):
        assert ulc_bivariate(Polynomial.from_bivariate_coefficients([1, 3, 3, 1]))

    def test_flat_sequence(self):
        assert not ulc_bivariate(Polynomial.from_bivariate_coefficients([1, 1, 1, 1]))

    def test_first_index_is_checked(self):
        # normalized (1, 1/3, 1, 3) fails only at k = 1
        assert not ulc_bivariate(Polynomial.from_bivariate_coefficients([1, 1, 3, 3]))

    def test_errors(self):
        with pytest.raises(ValueError):
            ulc_bivariate(Polynomial.from_bivariate_coefficients([1, -1, 1]))
        with pytest.raises(ValueError):
            ulc_bivariate(Polynomial.from_bivariate_coefficients([1, 0, 1]))


class TestHyperbolicity:
    def test_product_of_coordinates(self):
        cert = hyperbolicity_check(y1 * y2 * y3, (1, 1, 1), samples=50)
        assert cert.unknown and cert.details["violations"] == 0

    def test_cubic_witness(self):
        cert = hyperbolicity_check(CUBIC, (1, 1), samples=50)
        assert cert.no
        x = cert.witness["x"]
        assert not is_real_rooted(CUBIC.restriction_taylor(x, (1, 1)))

    def test_cubic_at_two_one(self):
        cert = hyperbolicity_check(CUBIC, (1, 1), samples=0, points=[(2, 1)])
        assert cert.no and cert.witness["x"] == (2, 1)
        assert cert.witness["restriction"] == (134, 276, 189, 43)

    def test_lorentz_quadratic(self):
        cert = hyperbolicity_check(y1**2 - y2**2 - y3**2, (1, 0, 0), samples=50)
        assert cert.unknown

    def test_vanishing_direction(self):
        with pytest.raises(ValueError):
            hyperbolicity_check(x1 * x2, (1, 0))

    @given(st.lists(vectors(2, st.integers(-3, 3)).filter(lambda a: a[0] + a[1] != 0), min_size=1, max_size=3))
    def test_products_of_linear_forms(self, forms):
        f = Polynomial.constant(2, 1)
        for a, b in forms:
            f = f * (a * x1 + b * x2)
        cert = hyperbolicity_check(f, (1, 1), samples=20)
        assert cert.unknown


class TestRayleigh:
    def test_matrix_of_product(self):
        assert rayleigh_matrix(x1 * x2, (1, 2)) == SymMatrix.from_rows([[4, 0], [0, 1]])

    def test_matrix_of_linear_form(self):
        M = rayleigh_matrix(3 * x1 - x2, (5, 7))
        assert M == SymMatrix.from_rows([[9, -3], [-3, 1]])

    def test_matrix_of_square(self):
        assert rayleigh_matrix(x1**2, (1, 0)) == SymMatrix.from_rows([[2, 0], [0, 0]])

    def test_diagonal(self):
        assert rayleigh_diagonal(x1 * x2, (1, 1), (1, 1)) == 2
        assert rayleigh_diagonal(CUBIC, (2, 1), (0, 0)) == 0

    def test_cross_value(self):
        assert rayleigh_cross(CUBIC, (1, 0), (1, 1), (2, 1)) == 357

    def test_cross_polynomial(self):
        expected = Polynomial.from_bivariate_coefficients([357, 1740, 3006, 2304, 720])
        assert rayleigh_cross_poly(CUBIC, (1, 1), (2, 1)) == expected
        assert expected == 3 * Polynomial.from_bivariate_coefficients([119, 580, 1002, 768, 240])

    def test_delta(self):
        assert delta_ij(x1 * x2, 0, 1).is_zero()
        assert delta_ij(x1 * x2 + x1 + x2, 0, 1) == Polynomial.constant(2, 1)

    def test_log_hessian_identity(self):
        assert log_hessian_identity_check(x1 * x2, (1, 2)) == 0
        assert log_hessian_identity_check(1 + Polynomial.variable(1, 0), (3,)) == 0
        with pytest.raises(ValueError):
            log_hessian_identity_check(x1 - x2, (1, 2))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            rayleigh_matrix(x1 * x2, (1, 2, 3))

    @given(polynomials(nvars=3, max_degree=3), vectors(3), vectors(3), vectors(3))
    def test_consistency_with_matrix(self, f, x, v, w):
        M = rayleigh_matrix(f, x)
        assert rayleigh_diagonal(f, x, v) == M.quad(v)
        assert rayleigh_cross(f, x, v, w) == M.bilinear(v, w)
        assert rayleigh_cross_poly(f, v, w).eval(x) == M.bilinear(v, w)

    @given(polynomials(nvars=2, max_degree=4, coefficients=st.integers(1, 5)), vectors(2, positive_rationals))
    def test_log_hessian_identity_random(self, f, x):
        f = f + 1
        assert log_hessian_identity_check(f, x) == 0

    @given(
        polynomials(nvars=3, homogeneous=3, coefficients=st.integers(0, 5)).filter(lambda f: not f.is_zero()),
        st.integers(0, 1000),
    )
    def test_acute_rayleigh_gives_nonnegative_cross_terms(self, f, seed):
        K = GeneratedCone([(1, 0, 0), (1, 1, 0), (0, 1, 1), (1, 0, 2)])
        x = K.interior_sample(seed)
        M = rayleigh_matrix(f, x)
        if K.acute_wrt(M).yes:
            for u in K.generators:
                for w in K.generators:
                    assert rayleigh_cross(f, x, u, w) >= 0
