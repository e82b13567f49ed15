import numpy as np
import pytest

from core.errors import BesselOverflowError, DomainError, QuadratureError
from core.specfun import check_bessel_identities, eval_I, eval_I_negative, eval_K, limit_constants
from core.types import Order

ORDERS = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]


@pytest.mark.parametrize("t", [1e-3, 0.5, 2.0, 17.0])
def test_half_integer_closed_forms(t):
    assert eval_K(0.5, t) == pytest.approx(np.sqrt(np.pi / (2 * t)) * np.exp(-t), rel=1e-13)
    assert eval_I(0.5, t) == pytest.approx(np.sqrt(2 / (np.pi * t)) * np.sinh(t), rel=1e-13)
    assert eval_I_negative(0.5, t) == pytest.approx(np.sqrt(2 / (np.pi * t)) * np.cosh(t), rel=1e-12)


def test_scaled_evaluation_beyond_overflow():
    with pytest.raises(BesselOverflowError):
        eval_K(0.3, 800.0)
    with pytest.raises(BesselOverflowError):
        eval_I(0.3, 800.0)
    assert eval_K(0.5, 800.0, scaled=True) == pytest.approx(np.sqrt(np.pi / 1600.0), rel=1e-12)


def test_array_in_array_out():
    t = np.array([0.1, 1.0, 10.0])
    out = eval_K(0.3, t)
    assert isinstance(out, np.ndarray) and out.shape == (3,)
    assert isinstance(eval_K(0.3, 1.0), float)


@pytest.mark.parametrize("bad", [0.0, -1.0, np.nan])
def test_nonpositive_argument(bad):
    with pytest.raises(DomainError):
        eval_K(0.4, bad)


@pytest.mark.parametrize("s", [0.0, 1.0, -0.2, 1.5])
def test_order_outside_unit_interval(s):
    with pytest.raises(DomainError):
        Order(s)


@pytest.mark.parametrize("s", ORDERS)
def test_bessel_identity_suite(s):
    report = check_bessel_identities(s, np.geomspace(1e-6, 40.0, 64))
    assert report.wronskian <= 1e-8
    assert report.recurrence <= 1e-8
    assert report.weighted_derivative <= 1e-8
    assert report.weighted_derivative_sign == -1
    assert report.passed(1e-8)


def test_constants_at_one_half():
    c = limit_constants(0.5)
    assert c.c_s == pytest.approx(-1.0, abs=1e-12)
    assert c.c_hat_s == pytest.approx(np.sqrt(np.pi / 2), abs=1e-12)
    assert c.c_bar_s == pytest.approx(np.sqrt(np.pi / 2), abs=1e-12)
    # c1 = c2 = int_0^inf t K_{1/2}(t)^2 dt = pi/4
    assert c.c1 == pytest.approx(np.pi / 4, rel=1e-8)
    assert c.c2 == pytest.approx(np.pi / 4, rel=1e-8)


@pytest.mark.parametrize("s", ORDERS)
def test_closed_form_sum(s):
    c = limit_constants(s)
    assert c.c_sum == pytest.approx(np.pi / (2 * np.sin(np.pi * s)), rel=1e-8)
    assert c.closed_form_deviation <= 1e-8
    assert c.c1 == pytest.approx(np.pi * s / (2 * np.sin(np.pi * s)), rel=1e-8)
    assert c.c_bar_s * c.c_hat_s == pytest.approx(c.c_sum, rel=1e-12)


def test_limits_consistent_with_constants():
    c = limit_constants(0.3)
    assert c.dtn_unit_limit == c.c_sum
    assert c.ntd_unit_limit == pytest.approx(c.c_sum / c.c_hat_s**2)


def test_quadrature_tolerance_range():
    with pytest.raises(DomainError):
        limit_constants(0.5, quad_tol=1e-2)
    assert issubclass(QuadratureError, ArithmeticError)
