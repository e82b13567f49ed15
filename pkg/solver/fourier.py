"""
Constant-coefficient reference solutions and the spectral fast path.

For gamma = gamma0 and c = c0 every tangential Fourier mode e^{i xi.x}
extends as e^{i xi.x} (Qz)^s K_s(Qz) / c_bar_s with Q = sqrt(xi.gamma0 xi),
so the Dirichlet-to-Neumann map is the multiplier
c0 (c_hat_s / c_bar_s) (xi.gamma0 xi)^s.
"""

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike
from scipy import special

from ansatz.data import BoundaryData
from core.errors import DomainError
from core.types import Order, TangentialGrid
from logger import get_logger

log = get_logger(__name__)


def _c_hat(s: float) -> float:
    return 2.0 ** (-s) * special.gamma(1.0 - s)


def _c_bar(s: float) -> float:
    return 2.0 ** (s - 1.0) * special.gamma(s)


def _check_gamma(gamma0: ArrayLike, c0: float) -> np.ndarray:
    g = np.atleast_2d(np.asarray(gamma0, float))
    if g.shape[0] != g.shape[1] or not np.allclose(g, g.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(g).max())):
        raise DomainError("gamma0 must be a symmetric matrix", module="extsolver")
    if np.linalg.eigvalsh(g)[0] <= 0.0:
        raise DomainError("gamma0 must be positive definite", module="extsolver")
    if not c0 > 0.0:
        raise DomainError("c0 must be positive", module="extsolver", c0=c0)
    return g


def dtn_symbol(s: Order | float, xi: ArrayLike, gamma0: ArrayLike, c0: float = 1.0) -> np.ndarray:
    """Multiplier of the constant-coefficient DtN map at wave vectors ``xi`` (..., n)."""
    nu = Order.of(s).s
    g = _check_gamma(gamma0, c0)
    xi = np.asarray(xi, float)
    form = np.einsum("...i,ij,...j->...", xi, g, xi)
    return c0 * _c_hat(nu) / _c_bar(nu) * np.maximum(form, 0.0) ** nu


@dataclass(frozen=True)
class ReferenceSolution:
    s: float
    xi: tuple[float, ...]
    gamma0: np.ndarray = field(repr=False)
    c0: float
    Q: float
    energy_density: float  # energy per unit tangential volume
    flux: float  # c0 lim z^{1-2s} d_z of the profile

    def profile(self, z: ArrayLike) -> np.ndarray:
        z = np.asarray(z, float)
        if self.Q == 0.0:
            return np.ones_like(z)
        t = self.Q * z
        out = np.ones_like(t)
        pos = t > 0
        # (Qz)^s K_s(Qz) / c_bar with the scaled Bessel function for large Qz
        out[pos] = t[pos] ** self.s * special.kve(self.s, t[pos]) * np.exp(-t[pos]) / _c_bar(self.s)
        return out

    def values(self, x: ArrayLike, z: ArrayLike) -> np.ndarray:
        """e^{i xi.x} profile(z) on the tensor product of points x (..., n) and heights z."""
        x = np.asarray(x, float)
        phase = np.exp(1j * (x @ np.asarray(self.xi)))
        return phase[..., None] * self.profile(z)

    def energy(self, volume: float) -> float:
        return self.energy_density * volume


def fourier_reference(s: Order | float, xi: ArrayLike, gamma0: ArrayLike, c0: float = 1.0) -> ReferenceSolution:
    nu = Order.of(s).s
    g = _check_gamma(gamma0, c0)
    xi = np.atleast_1d(np.asarray(xi, float))
    if xi.shape != (g.shape[0],):
        raise DomainError("xi and gamma0 dimensions differ", module="extsolver")
    Q = float(np.sqrt(xi @ g @ xi))
    density = c0 * Q ** (2 * nu) * _c_hat(nu) / _c_bar(nu) if Q > 0 else 0.0
    return ReferenceSolution(
        s=nu, xi=tuple(xi.tolist()), gamma0=g, c0=float(c0), Q=Q, energy_density=float(density),
        flux=-float(density),
    )


def _periodic_samples(grid: TangentialGrid, values: np.ndarray) -> np.ndarray:
    if grid.periodic:
        return values
    # the closing node of each axis duplicates the opening one (both carry zero data)
    return values[tuple(slice(0, -1) for _ in range(grid.n))]


def spectral_coefficients(data: BoundaryData) -> tuple[np.ndarray, np.ndarray, float]:
    """Fourier coefficients c_k, wave vectors xi_k (..., n) and the period volume."""
    grid = data.grid
    samples = _periodic_samples(grid, np.asarray(data.field))
    shape = samples.shape
    coeffs = np.fft.fftn(samples) / samples.size
    axes = [2.0 * np.pi * np.fft.fftfreq(m, d=grid.h) for m in shape]
    xi = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    volume = float(np.prod([m * grid.h for m in shape]))
    return coeffs, xi, volume


def fast_dtn_pairing(gamma0: ArrayLike, c0: float, s: Order | float, phi: BoundaryData) -> float:
    coeffs, xi, volume = spectral_coefficients(phi)
    symbol = dtn_symbol(s, xi, gamma0, c0)
    return float(volume * np.sum(np.abs(coeffs) ** 2 * symbol))


def fast_ntd_pairing(gamma0: ArrayLike, c0: float, s: Order | float, f: BoundaryData) -> float:
    coeffs, xi, volume = spectral_coefficients(f)
    symbol = dtn_symbol(s, xi, gamma0, c0)
    nonzero = symbol > 0.0
    if abs(coeffs.flat[0]) > 1e-10 * np.abs(coeffs).sum():
        log.warning(f"mean mode {abs(coeffs.flat[0]):.2e} dropped from the NtD pairing")
    return float(volume * np.sum(np.abs(coeffs[nonzero]) ** 2 / symbol[nonzero]))


def hs_proxy_norm_sq(data: BoundaryData, s: Order | float) -> float:
    """sum (1 + |xi|^2)^s |phi_hat(xi)|^2, the squared H^s proxy norm."""
    nu = Order.of(s).s
    coeffs, xi, volume = spectral_coefficients(data)
    weight = (1.0 + np.sum(xi**2, axis=-1)) ** nu
    return float(volume * np.sum(weight * np.abs(coeffs) ** 2))
