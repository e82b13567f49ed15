"""
Modified Bessel functions of real order s in (0, 1) and the limit constants
c_s, c_hat_s, c_bar_s, c1, c2 that appear in the DtN/NtD asymptotics.

Evaluation is delegated to scipy.special (AMOS), which already switches
between series, uniform asymptotics and continued fractions internally.
The half-integer closed forms K_{1/2}(t) = sqrt(pi/(2t)) e^{-t} and
I_{1/2}(t) = sqrt(2/(pi t)) sinh t are used by the test suite as oracles.
"""

from dataclasses import asdict, dataclass

import numpy as np
from numpy.typing import ArrayLike
from scipy import integrate, special

from logger import get_logger

from .constants import FD_RELATIVE_STEP, QUAD_CUTOFF, QUAD_SPLIT, QUAD_TOL_DEFAULT, QUAD_TOL_MAX
from .errors import BesselOverflowError, DomainError, QuadratureError
from .types import Order

log = get_logger(__name__)


def _positive_argument(t: ArrayLike) -> np.ndarray:
    arr = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
        raise DomainError("Bessel argument must be positive and finite", module="specfun")
    return arr


def _scalar_or_array(arr: np.ndarray, like: ArrayLike):
    return float(arr) if np.ndim(like) == 0 else arr


def eval_K(s: float | Order, t: ArrayLike, scaled: bool = False):
    """K_s(t), or e^t K_s(t) when ``scaled``."""
    nu = Order.of(s).s
    arr = _positive_argument(t)
    if scaled:
        return _scalar_or_array(special.kve(nu, arr), t)
    with np.errstate(over="ignore", under="ignore"):
        out = special.kv(nu, arr)
    if np.any(~np.isfinite(out)) or np.any(out == 0.0):
        raise BesselOverflowError(
            "K_s(t) not representable in unscaled mode, use scaled=True",
            t_max=float(np.max(arr)),
        )
    return _scalar_or_array(out, t)


def eval_I(s: float | Order, t: ArrayLike, scaled: bool = False):
    """I_s(t), or e^{-t} I_s(t) when ``scaled``."""
    nu = Order.of(s).s
    arr = _positive_argument(t)
    if scaled:
        return _scalar_or_array(special.ive(nu, arr), t)
    with np.errstate(over="ignore"):
        out = special.iv(nu, arr)
    if np.any(~np.isfinite(out)):
        raise BesselOverflowError(
            "I_s(t) not representable in unscaled mode, use scaled=True",
            t_max=float(np.max(arr)),
        )
    return _scalar_or_array(out, t)


def eval_I_negative(s: float | Order, t: ArrayLike, scaled: bool = False):
    """I_{-s}(t) through the connection formula I_{-s} = I_s + (2/pi) sin(s pi) K_s."""
    nu = Order.of(s).s
    arr = _positive_argument(t)
    weight = 2.0 / np.pi * np.sin(nu * np.pi)
    if scaled:
        out = special.ive(nu, arr) + weight * special.kve(nu, arr) * np.exp(-2.0 * arr)
    else:
        out = np.asarray(eval_I(nu, arr)) + weight * special.kv(nu, arr)
    return _scalar_or_array(out, t)


@dataclass(frozen=True)
class LimitConstants:
    s: float
    c_s: float
    c_hat_s: float
    c_bar_s: float
    c1: float
    c2: float
    quad_error: float
    closed_form_sum: float

    @property
    def c_sum(self) -> float:
        return self.c1 + self.c2

    @property
    def closed_form_deviation(self) -> float:
        return abs(self.c_sum - self.closed_form_sum) / self.closed_form_sum

    @property
    def dtn_unit_limit(self) -> float:
        """Scaled DtN limit for a unit quadratic form."""
        return self.c_sum

    @property
    def ntd_unit_limit(self) -> float:
        """Scaled NtD limit for a unit quadratic form."""
        return self.c_sum / self.c_hat_s**2

    def as_dict(self) -> dict:
        out = asdict(self)
        out["c_sum"] = self.c_sum
        return out


def _bessel_moment(nu: float, quad_tol: float) -> tuple[float, float]:
    """int_0^inf t K_nu(t)^2 dt with its quadrature error estimate."""
    # t K_nu^2 = t^{1-2nu} (t^nu K_nu)^2, the algebraic weight absorbs the endpoint law
    head, head_err = integrate.quad(
        lambda t: (t**nu * special.kv(nu, t)) ** 2 if t > 0 else (2.0 ** (nu - 1.0) * special.gamma(nu)) ** 2,
        0.0,
        QUAD_SPLIT,
        weight="alg",
        wvar=(1.0 - 2.0 * nu, 0.0),
        epsabs=quad_tol / 4.0,
        epsrel=0.0,
        limit=200,
    )
    body, body_err = integrate.quad(
        lambda t: t * special.kve(nu, t) ** 2 * np.exp(-2.0 * t),
        QUAD_SPLIT,
        QUAD_CUTOFF,
        epsabs=quad_tol / 4.0,
        epsrel=0.0,
        limit=200,
    )
    # K_nu(t)^2 t <= (pi/2) e^{-2t} (1 + 1/t)^2 beyond the cutoff
    tail = np.pi / 4.0 * np.exp(-2.0 * QUAD_CUTOFF) * (1.0 + 1.0 / QUAD_CUTOFF) ** 2
    return head + body, head_err + body_err + tail


def limit_constants(s: float | Order, quad_tol: float = QUAD_TOL_DEFAULT) -> LimitConstants:
    order = Order.of(s)
    if not 0.0 < quad_tol <= QUAD_TOL_MAX:
        raise DomainError(f"quad_tol must lie in (0, {QUAD_TOL_MAX}]", module="specfun", quad_tol=quad_tol)
    nu = order.s
    c_s = -(2.0 ** (2.0 * nu - 1.0)) * special.gamma(nu) / special.gamma(1.0 - nu)
    c_hat = 2.0 ** (-nu) * special.gamma(1.0 - nu)
    c_bar = 2.0 ** (nu - 1.0) * special.gamma(nu)

    c1, err1 = _bessel_moment(nu, quad_tol)
    c2, err2 = _bessel_moment(1.0 - nu, quad_tol)
    achieved = err1 + err2
    if not (np.isfinite(c1) and np.isfinite(c2)) or achieved > quad_tol:
        raise QuadratureError(
            "Bessel moment quadrature did not converge",
            module="specfun",
            achieved=achieved,
            requested=quad_tol,
        )
    constants = LimitConstants(
        s=nu,
        c_s=float(c_s),
        c_hat_s=float(c_hat),
        c_bar_s=float(c_bar),
        c1=float(c1),
        c2=float(c2),
        quad_error=float(achieved),
        closed_form_sum=float(np.pi / (2.0 * np.sin(np.pi * nu))),
    )
    log.debug(f"constants s={nu}: c1={c1:.12g}, c2={c2:.12g}, err={achieved:.2e}")
    return constants


@dataclass(frozen=True)
class IdentityReport:
    s: float
    grid: tuple[float, ...]
    wronskian: float
    recurrence: float
    weighted_derivative: float
    weighted_derivative_sign: int

    def passed(self, tol: float = 1e-8) -> bool:
        return max(self.wronskian, self.recurrence, self.weighted_derivative) <= tol

    def as_dict(self) -> dict:
        return asdict(self)


def _central_derivative(func, t: np.ndarray) -> np.ndarray:
    h = FD_RELATIVE_STEP * t
    return (func(t - 2 * h) - 8 * func(t - h) + 8 * func(t + h) - func(t + 2 * h)) / (12 * h)


def check_bessel_identities(s: float | Order, grid: ArrayLike) -> IdentityReport:
    """
    Check the Wronskian, the derivative recurrence and the weighted derivative
    law on ``grid``.

    The recurrence and weighted-derivative deviations are relative to the
    magnitude of K_{s+1}(t) and t^s K_{1-s}(t) respectively, so they are
    comparable across the whole range of t.
    """
    nu = Order.of(s).s
    t = _positive_argument(np.atleast_1d(grid))
    if np.any(t > 50.0):
        raise DomainError("identity grid must lie in (0, 50]", module="specfun")

    wronskian = t * (special.ivp(nu, t) * special.kv(nu, t) - special.iv(nu, t) * special.kvp(nu, t)) - 1.0

    dk = _central_derivative(lambda x: special.kv(nu, x), t)
    k_next = special.kv(nu + 1.0, t)
    recurrence = (dk - nu / t * special.kv(nu, t) + k_next) / k_next

    dweighted = _central_derivative(lambda x: x**nu * special.kv(nu, x), t)
    target = t**nu * special.kv(1.0 - nu, t)
    weighted = (np.abs(dweighted) - target) / target
    sign = int(np.sign(np.median(dweighted)))

    return IdentityReport(
        s=nu,
        grid=tuple(float(x) for x in t),
        wronskian=float(np.max(np.abs(wronskian))),
        recurrence=float(np.max(np.abs(recurrence))),
        weighted_derivative=float(np.max(np.abs(weighted))),
        weighted_derivative_sign=sign,
    )
