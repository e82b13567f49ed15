import numpy as np
import pytest
from scipy import special

from core.errors import DomainError
from core.odekernel import (
    ProfileGridSpec,
    bessel_profile,
    flux_from_source,
    homogeneous_profile,
    ode_residual,
    solve_inhomogeneous,
    weighted_flux_limit,
)
from core.types import ProfileKind

ROOT_HALF_PI = np.sqrt(np.pi / 2)


def _c_hat(s):
    return 2.0 ** (-s) * special.gamma(1.0 - s)


def test_grid_is_graded_then_uniform():
    spec = ProfileGridSpec()
    t = spec.build()
    assert t[0] == pytest.approx(spec.t_min, rel=0.06)
    assert t[-1] == pytest.approx(spec.t_max)
    assert np.all(np.diff(t) > 0)
    assert spec.refine().build().size > t.size


@pytest.mark.parametrize("A", [0.5, 1.0, 3.0])
def test_homogeneous_profile_at_one_half(A):
    h = homogeneous_profile(0.5, A)
    t = h.grid[[0, 40, 200, 300]]
    assert h(t) == pytest.approx(ROOT_HALF_PI * np.exp(-A * t), rel=1e-10)
    assert h.derivative(t) == pytest.approx(-A * ROOT_HALF_PI * np.exp(-A * t), rel=1e-10)
    between = 0.5 * (h.grid[100:110] + h.grid[101:111])
    assert h(between) == pytest.approx(ROOT_HALF_PI * np.exp(-A * between), rel=1e-5)
    assert h.kind is ProfileKind.EXTENDED
    assert h.trace_value == pytest.approx(ROOT_HALF_PI)


def test_profile_extends_below_and_above_grid():
    w = bessel_profile(0.5)
    assert w(np.array([1e-8]))[0] == pytest.approx(ROOT_HALF_PI / np.sqrt(1e-8), rel=1e-5)
    assert w(np.array([45.0]))[0] == pytest.approx(ROOT_HALF_PI / np.sqrt(45.0) * np.exp(-45.0), rel=1e-2)
    assert w.tail_consistent()


@pytest.mark.parametrize("s", [0.2, 0.5, 0.8])
@pytest.mark.parametrize("A", [1.0, 2.0])
def test_flux_of_bessel_profiles(s, A):
    expected = -(A ** (2 * s)) * _c_hat(s)
    assert weighted_flux_limit(bessel_profile(s), s, A) == pytest.approx(expected, rel=1e-6)
    # extended profiles carry their own scale
    assert weighted_flux_limit(homogeneous_profile(s, A), s) == pytest.approx(expected, rel=1e-6)


def test_first_iterate_at_one_half():
    # (d^2 - 1) H = sqrt(pi/2) e^{-t} with H(0) = 0 gives H = -t e^{-t} sqrt(pi/2) / 2
    w1 = solve_inhomogeneous(0.5, bessel_profile(0.5))
    t = w1.grid[(w1.grid > 1e-3) & (w1.grid < 20.0)]
    exact = -0.5 * ROOT_HALF_PI * np.sqrt(t) * np.exp(-t)
    assert np.max(np.abs(w1(t) - exact)) <= 1e-4 * np.max(np.abs(exact))
    assert w1.level == 1
    assert weighted_flux_limit(w1, 0.5) == pytest.approx(-0.5 * ROOT_HALF_PI, rel=1e-4)
    assert flux_from_source(0.5, bessel_profile(0.5)) == pytest.approx(-0.5 * ROOT_HALF_PI, rel=1e-4)
    assert ode_residual(w1) < 1e-3


@pytest.mark.parametrize("s", [0.3, 0.7])
def test_flux_oracle_agrees_with_richardson(s):
    source = bessel_profile(s)
    w1 = solve_inhomogeneous(s, source)
    assert weighted_flux_limit(w1, s) == pytest.approx(flux_from_source(s, source), rel=1e-3)


def test_zero_source_gives_zero_profile():
    w = bessel_profile(0.4)
    zero = w.scaled(0.0)
    out = solve_inhomogeneous(0.4, zero)
    assert out.is_zero
    assert weighted_flux_limit(out, 0.4) == 0.0
    assert flux_from_source(0.4, zero) == 0.0


def test_profile_algebra():
    w = bessel_profile(0.3)
    both = w + w.scaled(2.0)
    assert both.values == pytest.approx(3.0 * w.values)
    with pytest.raises(DomainError):
        w + homogeneous_profile(0.3, 1.0)


def test_rejected_inputs():
    with pytest.raises(DomainError):
        homogeneous_profile(0.5, 0.0)
    with pytest.raises(DomainError):
        solve_inhomogeneous(0.5, homogeneous_profile(0.5, 1.0))
    with pytest.raises(DomainError):
        ode_residual(homogeneous_profile(0.5, 1.0))


@pytest.mark.parametrize("s", [0.3, 0.7])
def test_inhomogeneous_solve_is_linear(s):
    v1 = bessel_profile(s)
    v2 = solve_inhomogeneous(s, v1)
    w1 = solve_inhomogeneous(s, v1)
    w2 = solve_inhomogeneous(s, v2)
    both = solve_inhomogeneous(s, v1 + v2)
    expected = w1 + w2
    assert np.max(np.abs(both.values - expected.values)) <= 1e-8 * np.max(np.abs(expected.values))
    assert np.max(np.abs(both.d_values - expected.d_values)) <= 1e-8 * np.max(np.abs(expected.d_values))
    scaled = solve_inhomogeneous(s, v1.scaled(-2.5))
    assert scaled.values == pytest.approx(-2.5 * w1.values, rel=1e-10, abs=1e-300)


@pytest.mark.parametrize("s", [0.3, 0.5, 0.7])
def test_iterates_vanish_at_the_first_node(s):
    source = bessel_profile(s, ProfileGridSpec().refine())
    w1 = solve_inhomogeneous(s, source)
    w2 = solve_inhomogeneous(s, w1)
    for w in (w1, w2):
        assert abs(w.grid[0] ** s * w.values[0]) <= 1e-3
        assert w.zero_exponent == s


@pytest.mark.parametrize("s", [0.3, 0.7])
def test_homogeneous_profile_is_not_normalized(s):
    h = homogeneous_profile(s, 2.0)
    assert h.trace_value == pytest.approx(2.0 ** (s - 1.0) * special.gamma(s))
    t = h.grid[(h.grid > 1e-3) & (h.grid < 5.0)]
    assert h(t) == pytest.approx((2.0 * t) ** s * special.kv(s, 2.0 * t), rel=1e-6)
