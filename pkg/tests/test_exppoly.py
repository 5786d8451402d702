import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pidsteps.exppoly import ExpPoly, deriv_weight


def central_difference(f, t, h, step):
    """Richardson-extrapolated order-h central difference (independent oracle)."""

    def plain(s):
        total = 0.0
        for k in range(h + 1):
            total += (-1.0) ** k * math.comb(h, k) * f(t + (h / 2.0 - k) * s)
        return total / s**h

    return (4.0 * plain(0.5 * step) - plain(step)) / 3.0


# -- evaluation ---------------------------------------------------------


def test_evaluate_constant_anywhere():
    f = ExpPoly([(0.0, [1.0])])
    assert f.evaluate(7.3) == 1.0


def test_evaluate_two_rate_segment_at_zero():
    # value at 0 is the sum of the constant coefficients
    f = ExpPoly([(0.0, [1.5, -0.5]), (-1.0, [-0.5])])
    assert f.evaluate(0.0) == 1.0


def test_evaluate_exponential_times_t():
    f = ExpPoly([(2.0, [0.0, 1.0])])
    assert f.evaluate(1.0) == pytest.approx(math.exp(2.0), rel=1e-15)


def test_evaluate_many_matches_scalar():
    import numpy as np

    f = ExpPoly([(0.5, [1.0, -2.0, 0.25]), (-1.0, [3.0])])
    ts = np.linspace(-1.0, 2.0, 17)
    many = f.evaluate_many(ts)
    for t, v in zip(ts, many):
        assert v == pytest.approx(f.evaluate(float(t)), rel=1e-15)


# -- derivative ---------------------------------------------------------


def test_derivative_product_rule():
    r = 1.7
    f = ExpPoly([(r, [0.0, 1.0])])  # e^{rt} t
    g = f.derivative(1)
    assert g.coeffs_for(r) == pytest.approx((1.0, r))


def test_derivative_second_of_t_squared():
    f = ExpPoly([(0.0, [0.0, 0.0, 1.0])])
    g = f.derivative(2)
    assert g.terms == ((0.0, (2.0,)),)


def test_derivative_third_matches_finite_difference():
    f = ExpPoly([(0.7, [0.0, 0.0, 1.0])])
    exact = f.derivative(3).evaluate(0.4)
    # plain central difference with the tighter step still resolves h = 3
    total = 0.0
    for k in range(4):
        total += (-1.0) ** k * math.comb(3, k) * f.evaluate(0.4 + (1.5 - k) * 1e-3)
    approx = total / 1e-9
    assert exact == pytest.approx(approx, rel=1e-5, abs=1e-5)


def test_derivative_rejects_order_zero():
    with pytest.raises(ValueError):
        ExpPoly.constant(1.0).derivative(0)


def test_deriv_weight_values():
    # d^2/dt^2 (e^{rt} t) = e^{rt} (2r + r^2 t): weights 2 and 1
    assert deriv_weight(2, 1, 0) == 2.0
    assert deriv_weight(2, 1, 1) == 1.0
    # d^3/dt^3 (e^{rt} t^2) = e^{rt} (6r + 6r^2 t + r^3 t^2)
    assert deriv_weight(3, 2, 0) == 6.0
    assert deriv_weight(3, 2, 1) == 6.0
    assert deriv_weight(3, 2, 2) == 1.0


# -- algebra ------------------------------------------------------------


def test_shift_origin_linear():
    f = ExpPoly([(0.0, [0.0, 1.0])])  # t
    g = f.shift_origin(1.0)  # t + 1
    assert g.terms == ((0.0, (1.0, 1.0)),)


def test_add_merges_equal_rates():
    f = ExpPoly([(1.0, [1.0])])
    g = ExpPoly([(1.0, [2.0])])
    assert (f + g).terms == ((1.0, (3.0,)),)


def test_shift_origin_exponential():
    f = ExpPoly([(-1.0, [1.0])])
    assert f.shift_origin(1.0).evaluate(0.0) == pytest.approx(math.exp(-1.0), rel=1e-15)


def test_scale_and_negate():
    f = ExpPoly([(0.0, [2.0, -4.0])])
    assert (f * 0.5).terms == ((0.0, (1.0, -2.0)),)
    assert (-f).evaluate(1.0) == -f.evaluate(1.0)


def test_zero_coefficients_trimmed():
    f = ExpPoly([(0.0, [1.0, 0.0, 0.0]), (1.0, [0.0])])
    assert f.terms == ((0.0, (1.0,)),)
    assert ExpPoly([(2.0, [0.0])]).is_zero


def test_antiderivative_inverts_derivative():
    f = ExpPoly([(0.0, [1.0, 2.0]), (-0.5, [0.5, 0.0, 1.0])])
    F = f.antiderivative()
    assert F.derivative(1).isclose(f, rel=1e-13)
    # definite integral against midpoint-free quadrature
    import numpy as np

    ts = np.linspace(0.2, 1.7, 20001)
    approx = np.trapezoid(f.evaluate_many(ts), ts)
    assert f.integrate(0.2, 1.7) == pytest.approx(float(approx), rel=1e-7)


# -- property tests -----------------------------------------------------

rates = st.lists(
    st.floats(min_value=-3.0, max_value=3.0), min_size=1, max_size=4, unique=True
).filter(lambda rs: all(abs(a - b) > 1e-3 for i, a in enumerate(rs) for b in rs[:i]))
coeff_lists = st.lists(
    st.floats(min_value=-2.0, max_value=2.0), min_size=1, max_size=7
)


@st.composite
def exp_polys(draw):
    rs = draw(rates)
    return ExpPoly((r, draw(coeff_lists)) for r in rs)


@given(exp_polys())
@settings(max_examples=150, deadline=None)
def test_derivative_composes(f):
    assert f.derivative(1).derivative(1).isclose(f.derivative(2), rel=1e-12, abs_tol=1e-12)


@given(exp_polys(), st.integers(min_value=1, max_value=4))
@settings(max_examples=150, deadline=None)
def test_higher_derivative_equals_repeated_first(f, h):
    stepwise = f
    for _ in range(h):
        stepwise = stepwise.derivative(1)
    assert stepwise.isclose(f.derivative(h), rel=1e-12, abs_tol=1e-12)


@given(
    exp_polys(),
    st.integers(min_value=1, max_value=4),
    st.floats(min_value=-2.0, max_value=2.0),
)
@settings(max_examples=150, deadline=None)
def test_derivative_matches_finite_difference(f, h, t):
    exact = f.derivative(h).evaluate(t)
    approx = central_difference(f.evaluate, t, h, 1e-2)
    assert abs(exact - approx) <= 1e-5 * max(abs(exact), abs(approx), 1.0)


@given(
    exp_polys(),
    st.floats(min_value=-1.5, max_value=1.5),
    st.floats(min_value=-1.5, max_value=1.5),
)
@settings(max_examples=150, deadline=None)
def test_shift_origin_composes(f, a, b):
    once = f.shift_origin(a).shift_origin(b)
    joint = f.shift_origin(a + b)
    assert once.isclose(joint, rel=1e-12, abs_tol=1e-12)


@given(exp_polys(), st.floats(min_value=-1.0, max_value=1.0))
@settings(max_examples=100, deadline=None)
def test_shift_origin_is_time_translation(f, delta):
    g = f.shift_origin(delta)
    for t in (-0.7, 0.0, 0.9):
        assert g.evaluate(t) == pytest.approx(f.evaluate(t + delta), rel=1e-9, abs=1e-9)
