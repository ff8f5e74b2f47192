from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from cones import cone_from_rays
from config import config
from errors import DomainError, InvalidFunctionError, UnsupportedError
from exactnum import Interval, RationalMatrix, lower, upper
from hconc import (
    HomogeneousPolynomial,
    LinearFunction,
    PiecewiseLinearFunction,
    PowerPolynomialFunction,
    QuotientFunction,
    _sign_positive_somewhere,
    check_duality_transform,
    check_hconc,
    evaluate,
    polar_compare,
    polar_eval,
    polar_function,
    values_close,
)
from invariants import M_root, N_function, nef_volume_function, s_function, volhat_root
from models import CheckStatus
from tests.conftest import vec

I2 = RationalMatrix.identity(2)
SQRT2 = 1.4142135623730951


def quadrant():
    return cone_from_rays(2, [vec(1, 0), vec(0, 1)], I2)


def min_xy():
    return PiecewiseLinearFunction.from_min_forms(quadrant(), [vec(1, 0), vec(0, 1)])


def test_polynomial_basics():
    p = HomogeneousPolynomial.from_terms(2, [((2, 0), 1), ((1, 1), 2), ((0, 2), -1)])
    assert p.is_homogeneous(2)
    assert p.evaluate(vec(1, 1)) == 2
    G = p.gram()
    assert G.is_symmetric()
    assert G[0, 1] == 1 and G[1, 1] == -1


def test_linear_function_domain():
    f = LinearFunction(quadrant(), vec(1, 2))
    assert f(vec(1, 1)) == 3
    with pytest.raises(DomainError):
        f(vec(-1, 1))


def test_min_of_forms_splits_into_chambers():
    f = min_xy()
    assert len(f.chambers) == 2
    assert f(vec(3, 5)) == 3
    assert {tuple(r) for r in f.chamber_rays()} >= {(1, 1)}


@given(
    st.integers(min_value=0, max_value=50),
    st.integers(min_value=0, max_value=50),
    st.integers(min_value=1, max_value=9),
)
def test_piecewise_linear_is_homogeneous(a, b, t):
    f = min_xy()
    assert f(vec(a * t, b * t)) == t * f(vec(a, b))


def test_polar_of_min_is_exact():
    h = polar_eval(min_xy(), vec(1, 1))
    assert h.exact and h.strategy == "exact"
    assert h.value == 2
    assert tuple(h.argmin_ray) == (1, 1)


def test_polar_outside_dual_is_zero_boundary():
    h = polar_eval(min_xy(), vec(-1, 1))
    assert h.value == 0 and h.boundary


def test_polar_needs_positive_function():
    zero = LinearFunction(quadrant(), vec(0, 0))
    with pytest.raises(InvalidFunctionError):
        polar_eval(zero, vec(1, 1))


def test_quadratic_polar_keeps_radicand(p1xp1):
    h = polar_eval(p1xp1.volume_function, vec(1, 1))
    assert h.radicand == 2 and h.root_degree == 2
    assert isinstance(h.value, Interval)
    assert lower(h.value) <= Fraction(SQRT2) <= upper(h.value)


def test_one_ray_cone(p2):
    h = polar_eval(p2.volume_function, vec(1))
    assert h.value == 1 and h.exact


def test_certified_bisection_on_threefold(blp3):
    f = nef_volume_function(blp3)
    h = polar_eval(f, vec(1, 0), method="bisection")
    assert h.value == 1 and h.strategy == "bisection"
    with pytest.raises(UnsupportedError):
        polar_eval(f, vec(1, 0), method="exact")


def test_certified_bisection_brackets_irrational_value(blp3):
    f = nef_volume_function(blp3)
    h = polar_eval(f, vec(3, -1), tol=Fraction(1, 10**6))
    assert h.certified
    assert h.hi - h.lo <= Fraction(1, 10**6)
    # на H - tE отношение (3 - t)/(1 - t^3)^(1/3)
    t = np.linspace(0.0, 0.999, 200001)
    grid_min = float(np.min((3 - t) / np.cbrt(1 - t**3)))
    assert 2.6 < grid_min < 2.61
    assert float(h.lo) <= grid_min + 1e-9
    assert float(h.hi) >= grid_min - 1e-6


def test_bisection_sees_stretch_between_close_roots(blp3):
    # на H - tE отношение (7 - t)/(1 - t^3)^(1/3) падает ниже 7 около t = 0.38
    m = M_root(blp3, vec(7, -1))
    assert not m.exact
    assert m.hi < 7
    assert values_close(m.value, volhat_root(blp3, vec(7, -1)).value, config.tol)
    assert 6.74 < float(m.lo) < 6.75


LAM = sympy.Symbol("lam")


@pytest.mark.parametrize(
    "expr, positive",
    [
        (-(LAM - sympy.Rational(2, 5)) * (LAM - sympy.Rational(1, 2)), True),
        (-((LAM - sympy.Rational(1, 2)) ** 2 - sympy.Rational(1, 1000)), True),
        ((LAM - sympy.Rational(1, 2)) ** 2, True),
        (-((LAM - sympy.Rational(1, 2)) ** 2), False),
        (-LAM * (LAM - 1), True),
        (LAM * (LAM - 1), False),
        (-(LAM - sympy.Rational(1, 3)) * (LAM - sympy.Rational(1, 3) - sympy.Rational(1, 10**12)), True),
    ],
)
def test_sign_test_between_roots(expr, positive):
    h = sympy.Poly(sympy.expand(expr), LAM, domain="QQ")
    assert _sign_positive_somewhere(h, Fraction(0), Fraction(1)) is positive


def test_sign_test_ignores_roots_outside_segment():
    h = sympy.Poly(sympy.expand(-(LAM - 2) * (LAM - 3)), LAM, domain="QQ")
    assert not _sign_positive_somewhere(h, Fraction(0), Fraction(1))
    assert _sign_positive_somewhere(h, Fraction(0), Fraction(5, 2))


def test_exact_comparison_on_rank_two_cone(blp3):
    f = nef_volume_function(blp3)
    assert polar_compare(f, vec(1, 0), 1) == 0
    assert polar_compare(f, vec(1, 0), Fraction(1, 2)) == 1
    assert polar_compare(f, vec(1, 0), 2) == -1
    # ℓ и объём обращаются в ноль на H - E одновременно
    assert polar_compare(f, vec(1, -1), 0) == 0
    assert polar_compare(f, vec(1, -1), Fraction(1, 10**6)) == -1
    assert polar_compare(blp3.volume_function, vec(7, -1), 7) == -1
    assert polar_compare(blp3.volume_function, vec(7, -1), Fraction(674, 100)) == 1


def test_exact_comparison_on_quadratic_and_linear_paths(p1xp1):
    f = p1xp1.volume_function
    assert polar_compare(f, vec(1, 1), 1) == 1
    assert polar_compare(f, vec(1, 1), Fraction(3, 2)) == -1
    assert polar_compare(min_xy(), vec(1, 1), 2) == 0
    assert polar_compare(min_xy(), vec(-1, 1), 0) == 0


def test_vanishing_polar_is_exact_zero(blp3):
    h = polar_eval(nef_volume_function(blp3), vec(1, -1))
    assert h.value == 0 and h.exact


def sqrt_xy(scale=1):
    xy = HomogeneousPolynomial.from_terms(2, [((1, 1), scale)])
    return PowerPolynomialFunction(quadrant(), [(quadrant(), xy)], 2)


def test_polar_of_geometric_mean():
    h = polar_eval(sqrt_xy(), vec(1, 1))
    assert h.value == 2 and h.exact
    assert h.strategy == "exact"
    assert h.radicand == 4 and h.root_degree == 2


def test_geometric_mean_is_self_dual_up_to_scale():
    # ℋ√(xy) = 2√(ab), ℋ(2√(ab)) = √(xy): 50 лучей в каждую сторону
    report = check_duality_transform(
        sqrt_xy(), sqrt_xy(4), samples=48, tol=Fraction(1, 10**6), seed=3, order_pairs=2
    )
    assert report.status is CheckStatus.PASS, report.witnesses[:2]


@settings(max_examples=40, deadline=None)
@given(
    st.integers(min_value=0, max_value=30),
    st.integers(min_value=0, max_value=30),
)
def test_polar_of_doubled_function_is_halved(a, b):
    w = vec(a, b)
    assert polar_eval(min_xy().scaled(2), w).value == polar_eval(min_xy(), w).value / 2


@settings(max_examples=25, deadline=None)
@given(
    st.integers(min_value=1, max_value=20),
    st.integers(min_value=1, max_value=20),
)
def test_polar_of_doubled_volume_is_halved(p1xp1, a, b):
    w = vec(a, b)
    f = p1xp1.volume_function
    assert polar_eval(f.scaled(2), w).radicand * 4 == polar_eval(f, w).radicand


def test_numeric_path_is_not_certified(p1xp1):
    h = polar_eval(p1xp1.volume_function, vec(1, 1), tol=Fraction(1, 1000), method="numeric")
    assert not h.exact and not h.certified
    assert abs(float(h.lo) - SQRT2) < 1e-2


def test_check_hconc_passes_on_invariant(blq):
    report = check_hconc(s_function(blq.profile("on_curve_F")), samples=40, seed=1)
    assert report.status is CheckStatus.PASS


def test_check_hconc_catches_convex_quotient():
    num = HomogeneousPolynomial.from_terms(2, [((2, 0), 1), ((0, 2), 1)])
    den = HomogeneousPolynomial.from_terms(2, [((1, 0), 1), ((0, 1), 1)])
    report = check_hconc(QuotientFunction(quadrant(), num, den), samples=10, seed=0)
    assert report.status is CheckStatus.FAIL
    assert any(w["property"] == "superadditivity" for w in report.witnesses)


def test_duality_transform_of_s_and_N(blq):
    profile = blq.profile("generic")
    report = check_duality_transform(s_function(profile), N_function(profile), samples=15, seed=2)
    assert report.status is CheckStatus.PASS


def test_polar_of_piecewise_linear_is_piecewise_linear(bl2):
    profile = bl2.profile("on_curve_E1")
    polar = polar_function(s_function(profile))
    assert polar.as_piecewise_linear() is not None
    N = N_function(profile)
    for alpha in bl2.eff_curves.rays:
        assert evaluate(polar, alpha) == N.evaluate(alpha)


def test_scaled_power_function(p1xp1):
    f = p1xp1.volume_function
    g = f.scaled(3)
    assert g.power_value(vec(1, 1)) == 9 * f.power_value(vec(1, 1))
