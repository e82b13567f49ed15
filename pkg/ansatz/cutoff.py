"""
Tangential cut-off functions eta.

``mollified_box`` is the tensor product of rho_eps * chi_[-1/2, 1/2], so its
Fourier transform factors into rho_hat(eps k) sin(k/2)/(k/2) per axis and
vanishes on the known zero set of the box factor. ``radial_bump`` is the
smoother choice for Dirichlet probes.
"""

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike
from scipy import integrate, interpolate, special

from core.constants import CUTOFF_GRID_STEP, CUTOFF_MASS_TOL, CUTOFF_SUPPORT_TOL, NORMALIZATION_TOL
from core.errors import DomainError, NumericalError
from core.types import CutoffKind, TangentialGrid
from logger import get_logger

log = get_logger(__name__)

_TABLE_POINTS = 2001


def _bump(x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(x, dtype=float)
    inside = np.abs(x) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - x[inside] ** 2))
    return out


_BUMP_MASS = integrate.quad(lambda x: float(_bump(np.array(x))), -1.0, 1.0, epsabs=1e-14, epsrel=1e-13)[0]


def _mollifier_cdf():
    """Antiderivative of the normalized standard mollifier, exact 0 and 1 outside [-1, 1]."""
    x = np.linspace(-1.0, 1.0, _TABLE_POINTS)
    spline = interpolate.make_interp_spline(x, _bump(x) / _BUMP_MASS, k=5)
    antiderivative = spline.antiderivative()
    total = float(antiderivative(1.0))

    def cdf(y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, float)
        return np.where(y <= -1.0, 0.0, np.where(y >= 1.0, 1.0, antiderivative(np.clip(y, -1.0, 1.0)) / total))

    return cdf


_CDF = _mollifier_cdf()


def _mollifier_hat(k: np.ndarray) -> np.ndarray:
    """Fourier transform of the normalized standard mollifier (real, even)."""
    k = np.abs(np.asarray(k, float))
    flat = k.ravel()
    unique, inverse = np.unique(flat, return_inverse=True)
    values = np.array([
        integrate.quad(lambda x: float(_bump(np.array(x))), -1.0, 1.0, weight="cos", wvar=w, epsabs=1e-14)[0]
        if w > 0 else _BUMP_MASS
        for w in unique
    ]) / _BUMP_MASS
    return values[inverse].reshape(k.shape)


def _sinc_half(k: np.ndarray) -> np.ndarray:
    """sin(k/2)/(k/2)."""
    return np.sinc(np.asarray(k, float) / (2.0 * np.pi))


def normal_cutoff(t: ArrayLike) -> np.ndarray:
    """C^2 quintic step: 1 on [0, 1/2], 0 beyond 1."""
    t = np.asarray(t, float)
    x = np.clip((t - 0.5) / 0.5, 0.0, 1.0)
    return 1.0 - x**3 * (10.0 - 15.0 * x + 6.0 * x**2)


@dataclass(frozen=True, eq=False)
class CutoffProfile:
    kind: CutoffKind
    epsilon: float
    n: int
    amplitude: float
    scale: float  # sigma, eta(z) = amplitude * prod eta1(z / sigma)
    bound: float
    sample_grid: TangentialGrid = field(repr=False)
    samples: np.ndarray = field(repr=False)

    @property
    def radius(self) -> float:
        if self.kind is CutoffKind.RADIAL_BUMP:
            return 1.0 - self.epsilon
        return self.scale * np.sqrt(self.n) * (0.5 + self.epsilon)

    def _box_factor(self, x: np.ndarray) -> np.ndarray:
        return np.maximum(_CDF((x + 0.5) / self.epsilon) - _CDF((x - 0.5) / self.epsilon), 0.0)

    def evaluate(self, z: ArrayLike) -> np.ndarray:
        """eta at points z of shape (..., n)."""
        z = np.asarray(z, float)
        if z.shape[-1] != self.n:
            raise DomainError(f"points must have trailing dimension {self.n}", module="ansatz")
        if self.kind is CutoffKind.MOLLIFIED_BOX:
            out = np.full(z.shape[:-1], self.amplitude)
            for j in range(self.n):
                out = out * self._box_factor(z[..., j] / self.scale)
            return out
        r = np.linalg.norm(z, axis=-1) / (1.0 - self.epsilon)
        out = np.zeros(z.shape[:-1])
        inside = r < 1.0
        out[inside] = self.amplitude * np.exp(1.0 - 1.0 / (1.0 - r[inside] ** 2))
        return out

    def fourier(self, zeta: ArrayLike) -> np.ndarray:
        """Real Fourier transform int eta(z) e^{-i zeta.z} dz at points of shape (..., n)."""
        zeta = np.asarray(zeta, float)
        if self.kind is CutoffKind.MOLLIFIED_BOX:
            out = np.full(zeta.shape[:-1], self.amplitude * self.scale**self.n)
            for j in range(self.n):
                k = self.scale * zeta[..., j]
                out = out * _mollifier_hat(self.epsilon * k) * _sinc_half(k)
            return out
        radius = 1.0 - self.epsilon
        kk = np.linalg.norm(zeta, axis=-1) * radius
        half = self.n / 2.0
        flat = kk.ravel()
        values = np.empty_like(flat)
        profile = lambda rho: np.exp(1.0 - 1.0 / (1.0 - rho**2)) if rho < 1.0 else 0.0
        sphere = 2.0 * np.pi**half / special.gamma(half)
        for i, k in enumerate(flat):
            if k < 1e-12:
                values[i] = sphere * integrate.quad(lambda rho: profile(rho) * rho ** (self.n - 1), 0.0, 1.0)[0]
            else:
                integral = integrate.quad(
                    lambda rho: profile(rho) * special.jv(half - 1.0, k * rho) * rho**half, 0.0, 1.0, limit=200
                )[0]
                values[i] = (2.0 * np.pi) ** half * k ** (1.0 - half) * integral
        return self.amplitude * radius**self.n * values.reshape(kk.shape)

    def fourier_along(self, alpha: ArrayLike, r: ArrayLike) -> np.ndarray:
        """eta_hat(alpha r) for scalar or array r."""
        alpha = np.asarray(alpha, float)
        r = np.asarray(r, float)
        return self.fourier(r[..., None] * alpha)

    def box_zero_spacing(self, alpha_j: float) -> float:
        """Spacing of the zeros in r of the j-th box factor along alpha."""
        return 2.0 * np.pi / (self.scale * abs(alpha_j))


def make_cutoff(
    kind: CutoffKind | str,
    epsilon: float,
    n: int = 2,
    step: float = CUTOFF_GRID_STEP,
) -> CutoffProfile:
    kind = CutoffKind(kind)
    if not 0.0 < epsilon < 0.25:
        raise DomainError("mollifier width epsilon must lie in (0, 1/4)", module="ansatz", epsilon=epsilon)
    if n < 1:
        raise DomainError("dimension must be positive", module="ansatz", n=n)

    if kind is CutoffKind.MOLLIFIED_BOX:
        corner = np.sqrt(n) * (0.5 + epsilon)
        scale = 1.0 if corner < 0.999 else 0.999 / corner
        one_d = integrate.quad(
            lambda x: float(np.maximum(_CDF((x + 0.5) / epsilon) - _CDF((x - 0.5) / epsilon), 0.0) ** 2),
            -0.5 - epsilon,
            0.5 + epsilon,
            points=[-0.5 + epsilon, 0.5 - epsilon],
            epsabs=1e-14,
            epsrel=1e-13,
            limit=200,
        )[0]
        amplitude = 1.0 / np.sqrt((scale * one_d) ** n)
        peak = float(np.maximum(_CDF(0.5 / epsilon) - _CDF(-0.5 / epsilon), 0.0))
        bound = amplitude * peak**n
    else:
        scale = 1.0
        radius = 1.0 - epsilon
        half = n / 2.0
        sphere = 2.0 * np.pi**half / special.gamma(half)
        radial = integrate.quad(
            lambda r: np.exp(2.0 - 2.0 / (1.0 - r**2)) * r ** (n - 1) if r < 1.0 else 0.0,
            0.0, 1.0, epsabs=1e-14, epsrel=1e-13,
        )[0]
        amplitude = 1.0 / np.sqrt(sphere * radius**n * radial)
        bound = amplitude

    grid = TangentialGrid.centered(np.zeros(n), int(round(1.0 / step)), step)
    profile = CutoffProfile(
        kind=kind, epsilon=float(epsilon), n=n, amplitude=float(amplitude), scale=float(scale),
        bound=float(bound), sample_grid=grid, samples=np.empty(0),
    )
    samples = profile.evaluate(grid.points())
    object.__setattr__(profile, "samples", samples)

    radius_sq = np.sum(grid.points() ** 2, axis=-1)
    if np.max(np.abs(samples[radius_sq >= 1.0]), initial=0.0) > CUTOFF_SUPPORT_TOL:
        raise NumericalError("cut-off support leaks out of the unit ball", module="ansatz")
    mass = float(grid.integrate(samples**2))
    if abs(mass - 1.0) > CUTOFF_MASS_TOL:
        raise DomainError("cut-off L2 mass deviates from 1 on the sample grid, use a finer step",
                          module="ansatz", mass=mass, step=step)
    # unit mass on the sample grid itself
    factor = 1.0 / np.sqrt(mass)
    object.__setattr__(profile, "amplitude", float(amplitude * factor))
    object.__setattr__(profile, "bound", float(bound * factor))
    object.__setattr__(profile, "samples", samples * factor)
    mass = float(grid.integrate(profile.samples**2))
    if abs(mass - 1.0) > NORMALIZATION_TOL:
        raise NumericalError("cut-off L2 mass is not 1 after normalization", module="ansatz", mass=mass)
    log.debug(f"cut-off {kind.value} eps={epsilon} n={n}: amplitude={profile.amplitude:.6g}, bound={profile.bound:.6g}")
    return profile
