from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from klorentz.cones import GeneratedCone
from klorentz.polycore import Polynomial

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

x1, x2 = Polynomial.variables(2)
y1, y2, y3 = Polynomial.variables(3)

# bivariate cubic 4x1^3 + 15x1^2x2 + 18x1x2^2 + 6x2^3: ultra log-concave, not hyperbolic
CUBIC = Polynomial.from_bivariate_coefficients([4, 15, 18, 6])

# ternary quadratic with signature (2, 1)
Q3 = y1**2 + 8 * y1 * y2 - y2**2 - y1 * y3 + 11 * y2 * y3 + 2 * y3**2

# diag -1, off-diagonal 1
A4 = [[-1, 1, 1, 1], [1, -1, 1, 1], [1, 1, -1, 1], [1, 1, 1, -1]]

A2 = [[1, 2], [1, 1]]
A3 = [[1, 3, 2], [5, -1, 1], [-3, 10, 2]]


@pytest.fixture
def cubic():
    return CUBIC


@pytest.fixture
def q3():
    return Q3


@pytest.fixture
def orthant2():
    return GeneratedCone.orthant(2)


@pytest.fixture
def orthant3():
    return GeneratedCone.orthant(3)


# -- strategies -----------------------------------------------------------------------

small_ints = st.integers(-5, 5)
rationals = st.builds(Fraction, st.integers(-12, 12), st.integers(1, 4))
positive_rationals = st.builds(Fraction, st.integers(1, 12), st.integers(1, 4))


def vectors(n, elements=rationals):
    return st.lists(elements, min_size=n, max_size=n).map(tuple)


@st.composite
def polynomials(draw, nvars=2, max_degree=3, max_terms=5, homogeneous=None, coefficients=small_ints):
    """Random polynomials; ``homogeneous=d`` fixes the total degree of every term."""
    n_terms = draw(st.integers(1, max_terms))
    terms = {}
    for _ in range(n_terms):
        if homogeneous is None:
            exp = tuple(draw(st.lists(st.integers(0, max_degree), min_size=nvars, max_size=nvars)))
            if sum(exp) > max_degree:
                continue
        else:
            cuts = sorted(draw(st.lists(st.integers(0, homogeneous), min_size=nvars - 1, max_size=nvars - 1)))
            bounds = [0] + cuts + [homogeneous]
            exp = tuple(bounds[i + 1] - bounds[i] for i in range(nvars))
        terms[exp] = draw(coefficients)
    return Polynomial(nvars, terms)


@st.composite
def positive_polynomials(draw, nvars=2, max_degree=3, max_terms=5):
    """Nonnegative coefficients with a positive constant term (positive on the orthant)."""
    p = draw(polynomials(nvars, max_degree, max_terms, coefficients=st.integers(0, 6)))
    return p + Polynomial.constant(nvars, draw(st.integers(1, 4)))


# -- acceptance summary ---------------------------------------------------------------

ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        label, ok, note = ACCEPTANCE[n]
        line = f"criterion {n:>2} {'PASS' if ok else 'FAIL'}  {label}"
        terminalreporter.write_line(line + (f"  ({note})" if note else ""))
