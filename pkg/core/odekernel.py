"""
Normal-direction profiles of the extension problem.

Two kinds of profile are produced:

* extended profiles h(t) = (At)^s K_s(At), the homogeneous solutions of
  (t^{1-2s} h')' = A^2 t^{1-2s} h that decay at infinity, and
* Bessel-kind profiles w(tau) on the natural scale, with the power tau^s
  implied, solving tau^2 w'' + tau w' - (s^2 + tau^2) w = tau^2 v.

The inhomogeneous solver uses variation of parameters with the particular
solution that is o(tau^{-s}) at zero and decays at infinity:

    w = -I_s(t) int_t^inf K_s v tau dtau - K_s(t) int_0^t I_s v tau dtau

Both integrals are evaluated with exponentially scaled Bessel functions so
that no cancellation occurs in the tail.
"""

from dataclasses import dataclass, field, replace

import numpy as np
from numpy.typing import ArrayLike
from scipy import interpolate, special

from logger import get_logger, log_performance

from .constants import (
    PROFILE_GAUSS_POINTS,
    PROFILE_RATIO,
    PROFILE_T_MAX,
    PROFILE_T_MIN,
    PROFILE_T_SWITCH,
    PROFILE_UNIFORM_STEP,
)
from .errors import DomainError, ExtrapolationError
from .types import Order, ProfileKind

log = get_logger(__name__)


@dataclass(frozen=True)
class ProfileGridSpec:
    t_min: float = PROFILE_T_MIN
    t_switch: float = PROFILE_T_SWITCH
    t_max: float = PROFILE_T_MAX
    ratio: float = PROFILE_RATIO
    step: float = PROFILE_UNIFORM_STEP

    def build(self) -> np.ndarray:
        count = int(np.ceil(np.log(self.t_switch / self.t_min) / np.log(self.ratio)))
        geometric = self.t_switch * self.ratio ** (-np.arange(count, 0, -1, dtype=float))
        geometric[0] = max(geometric[0], self.t_min * (1 - 1e-12))
        uniform = np.arange(self.t_switch, self.t_max + 0.5 * self.step, self.step)
        return np.concatenate([geometric, uniform])

    def refine(self) -> "ProfileGridSpec":
        return replace(self, ratio=float(np.sqrt(self.ratio)), step=self.step / 2.0)


@dataclass(frozen=True, eq=False)
class RadialProfile:
    grid: np.ndarray
    values: np.ndarray
    d_values: np.ndarray
    zero_exponent: float
    decay_power: float
    tail_cut: float
    s: float
    kind: ProfileKind = ProfileKind.BESSEL
    rate: float = 1.0  # w = O(t^decay_power e^{-rate t})
    level: int = 0
    trace_value: float = 0.0  # lim t^s w (Bessel kind) or lim h (extended)
    source_values: np.ndarray | None = field(default=None, repr=False)
    _spline: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        grid = np.asarray(self.grid, float)
        if grid.ndim != 1 or grid.size < 4 or np.any(np.diff(grid) <= 0) or grid[0] <= 0:
            raise DomainError("profile grid must be positive and strictly increasing", module="odekernel")
        if not (np.all(np.isfinite(self.values)) and np.all(np.isfinite(self.d_values))):
            raise DomainError("profile values must be finite", module="odekernel")

    @property
    def is_zero(self) -> bool:
        return not np.any(self.values) and not np.any(self.d_values)

    def _hermite(self):
        if self._spline is None:
            object.__setattr__(
                self, "_spline", interpolate.CubicHermiteSpline(self.grid, self.values, self.d_values)
            )
        return self._spline

    def __call__(self, t: ArrayLike) -> np.ndarray:
        t = np.asarray(t, float)
        out = np.empty_like(t)
        lo, hi = self.grid[0], self.grid[-1]
        inside = (t >= lo) & (t <= hi)
        out[inside] = self._hermite()(t[inside])
        below = t < lo
        out[below] = self.values[0] * (t[below] / lo) ** self.zero_exponent
        above = t > hi
        out[above] = self.values[-1] * (t[above] / hi) ** self.decay_power * np.exp(-self.rate * (t[above] - hi))
        return out

    def derivative(self, t: ArrayLike) -> np.ndarray:
        """Derivative consistent with the power laws used outside the grid."""
        t = np.asarray(t, float)
        out = np.empty_like(t)
        lo, hi = self.grid[0], self.grid[-1]
        inside = (t >= lo) & (t <= hi)
        out[inside] = self._hermite().derivative()(t[inside])
        below = t < lo
        out[below] = self.zero_exponent * self(t[below]) / t[below]
        above = t > hi
        out[above] = self(t[above]) * (self.decay_power / t[above] - self.rate)
        return out

    def scaled(self, factor: float) -> "RadialProfile":
        src = None if self.source_values is None else factor * self.source_values
        return replace(
            self,
            values=factor * self.values,
            d_values=factor * self.d_values,
            trace_value=factor * self.trace_value,
            source_values=src,
            _spline=None,
        )

    def __add__(self, other: "RadialProfile") -> "RadialProfile":
        if other.kind is not self.kind or other.grid.shape != self.grid.shape or not np.allclose(other.grid, self.grid):
            raise DomainError("profiles live on different grids or kinds", module="odekernel")
        src = None
        if self.source_values is not None and other.source_values is not None:
            src = self.source_values + other.source_values
        return replace(
            self,
            values=self.values + other.values,
            d_values=self.d_values + other.d_values,
            zero_exponent=min(self.zero_exponent, other.zero_exponent),
            decay_power=max(self.decay_power, other.decay_power),
            trace_value=self.trace_value + other.trace_value,
            source_values=src,
            _spline=None,
        )

    def tail_consistent(self) -> bool:
        """Ratio of the last two nodes agrees with the recorded asymptotic law."""
        if abs(self.values[-1]) < 1e-300 or abs(self.values[-2]) < 1e-300:
            return True
        t0, t1 = self.grid[-2], self.grid[-1]
        law = (t1 / t0) ** self.decay_power * np.exp(-self.rate * (t1 - t0))
        ratio = self.values[-1] / self.values[-2]
        return bool(abs(ratio / law - 1.0) <= 0.1)


def bessel_profile(s: float | Order, grid_spec: ProfileGridSpec | None = None) -> RadialProfile:
    """K_s on the natural scale, the root of every hierarchy profile."""
    nu = Order.of(s).s
    t = (grid_spec or ProfileGridSpec()).build()
    k = special.kv(nu, t)
    dk = -(special.kv(1.0 - nu, t) + nu / t * k)
    return RadialProfile(
        grid=t,
        values=k,
        d_values=dk,
        zero_exponent=-nu,
        decay_power=-0.5,
        tail_cut=float(t[-1]),
        s=nu,
        kind=ProfileKind.BESSEL,
        level=0,
        trace_value=2.0 ** (nu - 1.0) * special.gamma(nu),
        source_values=np.zeros_like(t),
    )


def homogeneous_profile(s: float | Order, A: float, grid_spec: ProfileGridSpec | None = None) -> RadialProfile:
    """h(t) = (At)^s K_s(At) with h'(t) = -A (At)^s K_{1-s}(At)."""
    nu = Order.of(s).s
    if not A > 0:
        raise DomainError("scale A must be positive", module="odekernel", A=A)
    t = (grid_spec or ProfileGridSpec()).build()
    tau = A * t
    decay = np.exp(-tau)
    values = tau**nu * special.kve(nu, tau) * decay
    d_values = -A * tau**nu * special.kve(1.0 - nu, tau) * decay
    return RadialProfile(
        grid=t,
        values=values,
        d_values=d_values,
        zero_exponent=0.0,
        decay_power=nu - 0.5,
        tail_cut=float(t[-1]),
        s=nu,
        kind=ProfileKind.EXTENDED,
        rate=float(A),
        trace_value=2.0 ** (nu - 1.0) * special.gamma(nu),
    )


def _local_exponent(t: np.ndarray, g: np.ndarray, i: int, j: int) -> float:
    if g[i] == 0.0 or g[j] == 0.0 or np.sign(g[i]) != np.sign(g[j]):
        return 0.0
    return float(np.log(g[j] / g[i]) / np.log(t[j] / t[i]))


def _interval_integrals(t: np.ndarray, g: np.ndarray, decay_rate: float) -> np.ndarray:
    """
    int_{t_i}^{t_{i+1}} exp(-decay_rate (tau - t_i)) g(tau) dtau for every interval.

    g is interpolated by a cubic spline of g(tau)*tau in u = log(tau), which is
    smooth for the power laws met at the singular endpoint.
    """
    u = np.log(t)
    spline = interpolate.CubicSpline(u, g * t)
    nodes, weights = np.polynomial.legendre.leggauss(PROFILE_GAUSS_POINTS)
    half = 0.5 * np.diff(u)
    mid = 0.5 * (u[1:] + u[:-1])
    uq = mid[:, None] + half[:, None] * nodes[None, :]
    tq = np.exp(uq)
    integrand = spline(uq) * np.exp(-decay_rate * (tq - t[:-1, None]))
    return np.sum(integrand * weights[None, :], axis=1) * half


def _check_source(order: Order, source: RadialProfile) -> None:
    if source.kind is not ProfileKind.BESSEL or source.rate != 1.0:
        raise DomainError("source must be a Bessel-kind profile on the natural scale", module="odekernel",
                          kind=source.kind.value, rate=source.rate)
    if source.zero_exponent < -order.s - 1e-12:
        raise DomainError("source grows faster than t^-s at zero", module="odekernel",
                          zero_exponent=source.zero_exponent)
    if source.decay_power < -0.5 - 1e-12:
        raise DomainError("source decay power must be >= -1/2", module="odekernel",
                          decay_power=source.decay_power)


def _variation_integrals(nu: float, source: RadialProfile) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Scaled tail integral R = e^{2t} int_t^inf K v tau, head integral B = int_0^t I v tau."""
    t = source.grid
    scaled_source = source.values * np.exp(t)
    g_tail = special.kve(nu, t) * scaled_source * t  # K v tau = e^{-2 tau} g_tail
    g_head = special.ive(nu, t) * scaled_source * t  # I v tau = g_head

    head_pieces = _interval_integrals(t, g_head, 0.0)
    p = _local_exponent(t, g_head, 0, 1)
    start = g_head[0] * t[0] / (p + 1.0) if p > -1.0 else 0.0
    B = start + np.concatenate([[0.0], np.cumsum(head_pieces)])

    tail_pieces = _interval_integrals(t, g_tail, 2.0)
    q = _local_exponent(t, g_tail, -2, -1)
    R = np.empty_like(t)
    R[-1] = g_tail[-1] / (2.0 - q / t[-1])
    shrink = np.exp(-2.0 * np.diff(t))
    for i in range(t.size - 2, -1, -1):
        R[i] = shrink[i] * R[i + 1] + tail_pieces[i]
    return R, B, scaled_source


@log_performance
def solve_inhomogeneous(s: float | Order, source: RadialProfile) -> RadialProfile:
    order = Order.of(s)
    nu = order.s
    _check_source(order, source)
    t = source.grid
    if source.is_zero:
        zeros = np.zeros_like(t)
        return replace(source, values=zeros, d_values=zeros.copy(), zero_exponent=nu,
                       decay_power=source.decay_power + 1.0, level=source.level + 1,
                       trace_value=0.0, source_values=zeros.copy(), _spline=None)

    R, B, _ = _variation_integrals(nu, source)
    scaled_w = -special.ive(nu, t) * R - special.kve(nu, t) * B
    scaled_dw = -special.ive(nu - 1.0, t) * R + special.kve(1.0 - nu, t) * B - nu / t * scaled_w
    decay = np.exp(-t)
    return RadialProfile(
        grid=t,
        values=scaled_w * decay,
        d_values=scaled_dw * decay,
        zero_exponent=nu,
        decay_power=source.decay_power + 1.0,
        tail_cut=source.tail_cut,
        s=nu,
        kind=ProfileKind.BESSEL,
        level=source.level + 1,
        trace_value=0.0,
        source_values=np.array(source.values, copy=True),
    )


def flux_from_source(s: float | Order, source: RadialProfile) -> float:
    """Closed-form weighted flux of solve_inhomogeneous(s, source): -(1/c_bar) int K_s v tau."""
    order = Order.of(s)
    _check_source(order, source)
    if source.is_zero:
        return 0.0
    R, _, _ = _variation_integrals(order.s, source)
    total = R[0] * np.exp(-2.0 * source.grid[0])
    # add the head piece below the first node, K v tau ~ tau^{q}
    t = source.grid
    g = special.kv(order.s, t[:2]) * source.values[:2] * t[:2]
    q = _local_exponent(t, g, 0, 1)
    if q > -1.0:
        total += g[0] * t[0] / (q + 1.0)
    c_bar = 2.0 ** (order.s - 1.0) * special.gamma(order.s)
    return float(-total / c_bar)


def _richardson_nodes(grid: np.ndarray) -> np.ndarray:
    """Three smallest nodes of the geometric subsequence with ratio close to 2."""
    stride = max(1, int(np.argmin(np.abs(grid[:64] / grid[0] - 2.0))))
    return np.array([0, stride, 2 * stride])


def _correction_exponents(nu: float) -> tuple[float, float]:
    first = 2.0 - 2.0 * nu
    second = min(2.0 * first, 2.0)
    if second - first < 0.2:
        second = first + 2.0
    return first, second


def _weighted_flux_samples(profile: RadialProfile, nu: float) -> tuple[np.ndarray, np.ndarray]:
    idx = _richardson_nodes(profile.grid)
    t = profile.grid[idx]
    w = profile.values[idx]
    dw = profile.d_values[idx]
    if profile.kind is ProfileKind.EXTENDED:
        return t, t ** (1.0 - 2.0 * nu) * dw
    # tau^{1-2s} d/dtau (tau^s w) = tau^{1-s} (s w / tau + w')
    return t, t ** (1.0 - nu) * (nu * w / t + dw)


def weighted_flux_limit(profile: RadialProfile, s: float | Order, A: float = 1.0) -> float:
    """
    lim_{t->0} t^{1-2s} d/dt((At)^s w(At)) by Richardson extrapolation over the
    three smallest nodes of the graded grid spaced by a factor of about 2. The
    leading correction is O(t^{2-2s}); the second is its square or O(t^2).

    Extended profiles already contain the scale and the power factor, so for
    them the limit of t^{1-2s} h'(t) is returned and A is ignored.
    """
    nu = Order.of(s).s
    if not A > 0:
        raise DomainError("scale A must be positive", module="odekernel", A=A)
    if profile.is_zero:
        return 0.0
    t, F = _weighted_flux_samples(profile, nu)
    scale = np.max(np.abs(F))
    steps = np.diff(F)
    if np.sign(steps[0]) * np.sign(steps[1]) < 0 and np.min(np.abs(steps)) > 1e-10 * scale:
        raise ExtrapolationError("oscillating flux estimates near t = 0", module="odekernel",
                                 estimates=F.tolist())
    exponents = _correction_exponents(nu)
    lhs = np.stack([np.ones(3), t ** exponents[0], t ** exponents[1]], axis=1)
    limit = np.linalg.solve(lhs, F)[0]
    if not np.isfinite(limit):
        raise ExtrapolationError("flux extrapolation produced a non-finite value", module="odekernel")
    if profile.kind is ProfileKind.EXTENDED:
        return float(limit)
    return float(A ** (2.0 * nu) * limit)


def ode_residual(profile: RadialProfile, interior_only: bool = True) -> float:
    """
    Max-norm residual of t^2 w'' + t w' - (s^2 + t^2) w - t^2 v on the grid.

    The term t^2 w'' + t w' = t (t w')' is formed from the stored derivative
    and a quintic interpolating spline of t w'.
    """
    if profile.kind is not ProfileKind.BESSEL or profile.source_values is None:
        raise DomainError("residual needs a Bessel-kind profile with its source", module="odekernel")
    t = profile.grid
    nu = profile.s
    y = t * profile.d_values
    dy = interpolate.make_interp_spline(t, y, k=5).derivative()(t)
    residual = t * dy - (nu**2 + t**2) * profile.values - t**2 * profile.source_values
    if interior_only:
        residual = residual[3:-3]
    return float(np.max(np.abs(residual)))
