"""
Approximate solutions u_N = e^{i N alpha.(x - x0)} sum_r N^{-r/2} v_r.

In the rescaled variables z = sqrt(N)(x - x0), t = N x_{n+1} the extension
operator splits as N^2 [D_t - C0^2 + sum_m N^{-m/2} L_m], where L_m collects
the Taylor terms of gamma and of the drift b of total degree m. Every v_r is a
finite sum of tangential factors P_{r,l}(z) times radial profiles
(C0 t)^s w_l(C0 t), with w_0 = K_s and w_{l+1} = S(w_l) from
``solve_inhomogeneous``, so that

    (D_t - C0^2)(P tau^s w_{l+1}) = C0^2 P tau^s w_l.

Tangential factors are grid functions on the rescaled ball; L_m acts on them
through fourth-order centred differences.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from numpy.typing import ArrayLike
from scipy import interpolate, special

from core.constants import (
    ANSATZ_GRID_HALF_WIDTH,
    CUTOFF_GRID_STEP,
)
from core.errors import DomainError
from core.odekernel import RadialProfile, bessel_profile, solve_inhomogeneous, weighted_flux_limit
from core.types import PairingMode, ProbeMode, TangentialGrid
from logger import get_logger, log_function_call, log_performance

from .cutoff import normal_cutoff
from .data import ProbeSpec
from .taylor import TaylorJet, drift_field, monomial, taylor_jet

log = get_logger(__name__)

MAX_DEPTH = 3
_TAU_LOWER = 1e-12
_TAU_UPPER = 60.0
_TAU_PANELS = 48
_TAU_NODES = 10
_RESIDUAL_TAUS = np.geomspace(1e-3, 30.0, 160)


@lru_cache(maxsize=32)
def profile_chain(s: float, levels: int) -> tuple[RadialProfile, ...]:
    """w_0 = K_s, w_1 = S(w_0), ..., w_levels."""
    chain = [bessel_profile(s)]
    for _ in range(levels):
        chain.append(solve_inhomogeneous(s, chain[-1]))
    return tuple(chain)


@lru_cache(maxsize=32)
def flux_constants(s: float, levels: int) -> tuple[float, ...]:
    """kappa_l = lim tau^{1-2s} d/dtau (tau^s w_l); kappa_0 = -c_hat_s exactly."""
    chain = profile_chain(s, levels)
    c_hat = 2.0 ** (-s) * special.gamma(1.0 - s)
    return (-c_hat, *(weighted_flux_limit(w, s) for w in chain[1:]))


def _shift(f: np.ndarray, k: int, axis: int) -> np.ndarray:
    """g[i] = f[i + k] along ``axis`` with zero padding."""
    if k == 0:
        return f
    out = np.zeros_like(f)
    size = f.shape[axis]
    src = [slice(None)] * f.ndim
    dst = [slice(None)] * f.ndim
    if k > 0:
        src[axis], dst[axis] = slice(k, size), slice(0, size - k)
    else:
        src[axis], dst[axis] = slice(0, size + k), slice(-k, size)
    out[tuple(dst)] = f[tuple(src)]
    return out


def _d1(f: np.ndarray, h: float, axis: int) -> np.ndarray:
    return (-_shift(f, 2, axis) + 8 * _shift(f, 1, axis) - 8 * _shift(f, -1, axis) + _shift(f, -2, axis)) / (12 * h)


def _d2(f: np.ndarray, h: float, axis: int) -> np.ndarray:
    return (
        -_shift(f, 2, axis) + 16 * _shift(f, 1, axis) - 30 * f + 16 * _shift(f, -1, axis) - _shift(f, -2, axis)
    ) / (12 * h * h)


@dataclass(frozen=True, eq=False)
class _Derivatives:
    value: np.ndarray
    grad: tuple[np.ndarray, ...]
    hess: tuple[tuple[np.ndarray, ...], ...]


def _derivatives(P: np.ndarray, h: float, mask: np.ndarray) -> _Derivatives:
    n = P.ndim
    raw = [_d1(P, h, j) for j in range(n)]
    hess = tuple(
        tuple((_d2(P, h, j) if j == l else _d1(raw[l], h, j)) * mask for l in range(n)) for j in range(n)
    )
    return _Derivatives(value=P, grad=tuple(g * mask for g in raw), hess=hess)


def _apply_layer(m: int, d: _Derivatives, jet: TaylorJet, alpha: np.ndarray, z: np.ndarray) -> np.ndarray:
    """L_m P for the Taylor coefficients in ``jet``."""
    n = alpha.size
    out = np.zeros(d.value.shape, complex)
    for beta, g in jet.gamma_terms(m):
        out -= float(alpha @ g @ alpha) * monomial(z, beta) * d.value
    for beta, g in jet.gamma_terms(m - 1):
        ga = g @ alpha
        out += 2j * monomial(z, beta) * sum(ga[l] * d.grad[l] for l in range(n))
    for beta, g in jet.gamma_terms(m - 2):
        out += monomial(z, beta) * sum(g[j, l] * d.hess[j][l] for j in range(n) for l in range(n))
    for beta, b in jet.drift_terms(m - 2):
        out += 1j * float(b @ alpha) * monomial(z, beta) * d.value
    for beta, b in jet.drift_terms(m - 3):
        out += monomial(z, beta) * sum(b[l] * d.grad[l] for l in range(n))
    return out


@dataclass(frozen=True, eq=False)
class AnsatzTerm:
    r: int
    level: int
    factor: np.ndarray = field(repr=False)

    @property
    def peak(self) -> float:
        return float(np.max(np.abs(self.factor), initial=0.0))


@dataclass(frozen=True, eq=False)
class AnsatzPairing:
    mode: PairingMode
    total: float
    near: float
    tail: float
    scaled: float


@dataclass(frozen=True, eq=False)
class AnsatzSolution:
    spec: ProbeSpec
    C0: float
    c0: float
    terms: tuple[AnsatzTerm, ...] = field(repr=False)
    profiles: tuple[RadialProfile, ...] = field(repr=False)
    kappa: tuple[float, ...]
    normalization: float
    z_grid: TangentialGrid = field(repr=False)
    level_factors: np.ndarray = field(repr=False)  # Q_l = normalization * sum_r N^{-r/2} P_{r,l}
    level_gradients: np.ndarray = field(repr=False)
    leading: np.ndarray = field(repr=False)  # eta on the ansatz grid
    mask: np.ndarray = field(repr=False)
    jet: TaylorJet = field(repr=False)
    gamma_field: Callable = field(repr=False)
    c_field: Callable = field(repr=False)

    @property
    def n(self) -> int:
        return self.spec.n

    @property
    def s(self) -> float:
        return self.spec.s.s

    @property
    def N(self) -> float:
        return self.spec.N

    @property
    def levels(self) -> int:
        return len(self.profiles)

    def tangential_grid(self) -> TangentialGrid:
        """The ansatz grid in physical coordinates, x = x0 + z / sqrt(N)."""
        root = np.sqrt(self.N)
        axes = tuple(x0 + a / root for x0, a in zip(self.spec.x0, self.z_grid.axes))
        return TangentialGrid(axes=axes, h=self.z_grid.h / root)

    def factor(self, r: int, level: int) -> np.ndarray:
        for term in self.terms:
            if term.r == r and term.level == level:
                return term.factor
        return np.zeros(self.z_grid.shape)

    def _points(self, x) -> np.ndarray:
        if isinstance(x, TangentialGrid):
            return x.points()
        x = np.asarray(x, float)
        if x.shape[-1] != self.n:
            raise DomainError(f"points must have trailing dimension {self.n}", module="ansatz")
        return x

    def _rescaled(self, x: np.ndarray) -> np.ndarray:
        return np.sqrt(self.N) * (x - np.asarray(self.spec.x0))

    def _phase(self, x: np.ndarray) -> np.ndarray:
        return np.exp(1j * self.N * ((x - np.asarray(self.spec.x0)) @ np.asarray(self.spec.alpha)))

    def _interpolate(self, values: np.ndarray, z: np.ndarray) -> np.ndarray:
        if not np.any(values):
            return np.zeros(z.shape[:-1], complex)
        flat = z.reshape(-1, self.n)

        def sample(part: np.ndarray) -> np.ndarray:
            interp = interpolate.RegularGridInterpolator(
                self.z_grid.axes, part, method="cubic", bounds_error=False, fill_value=0.0
            )
            return interp(flat)

        return (sample(values.real) + 1j * sample(values.imag)).reshape(z.shape[:-1])

    def _level_values(self, level: int, z: np.ndarray) -> np.ndarray:
        """Q_level at z, with the leading cut-off evaluated exactly."""
        if level == 0:
            exact = self.normalization * self.spec.eta.evaluate(z)
            rest = self.level_factors[0] - self.normalization * self.leading
            return exact + self._interpolate(rest, z)
        return self._interpolate(self.level_factors[level], z)

    def radial(self, level: int, tau: ArrayLike) -> np.ndarray:
        """g_l(tau) = tau^s w_l(tau), with its limit at tau = 0."""
        tau = np.asarray(tau, float)
        out = np.zeros_like(tau)
        positive = tau > 0
        t = tau[positive]
        if level == 0:
            out[positive] = t**self.s * special.kv(self.s, t)
            out[~positive] = self.profiles[0].trace_value
        else:
            out[positive] = t**self.s * self.profiles[level](t)
        return out

    def radial_derivative(self, level: int, tau: ArrayLike) -> np.ndarray:
        tau = np.asarray(tau, float)
        if np.any(tau <= 0):
            raise DomainError("normal derivative is singular at the boundary", module="ansatz")
        if level == 0:
            return -(tau**self.s) * special.kv(1.0 - self.s, tau)
        w = self.profiles[level]
        return self.s * tau ** (self.s - 1.0) * w(tau) + tau**self.s * w.derivative(tau)

    def trace(self, x) -> np.ndarray:
        """u_N(x, 0)."""
        x = self._points(x)
        z = self._rescaled(x)
        return self._phase(x) * self.profiles[0].trace_value * self._level_values(0, z)

    def weighted_flux(self, x) -> np.ndarray:
        """-c(x) lim x_{n+1}^{1-2s} d/dx_{n+1} u_N, the outward weighted flux."""
        x = self._points(x)
        z = self._rescaled(x)
        combined = sum(k * q for k, q in zip(self.kappa, self.level_factors))
        leading = self.normalization * self.kappa[0] * self.leading
        inner = self.normalization * self.kappa[0] * self.spec.eta.evaluate(z) + self._interpolate(combined - leading, z)
        scale = self.N ** (2 * self.s) * self.C0 ** (2 * self.s)
        return -np.asarray(self.c_field(x)) * scale * self._phase(x) * inner

    def values(self, x, y: ArrayLike) -> np.ndarray:
        x = self._points(x)
        z = self._rescaled(x)
        tau = self.C0 * self.N * np.asarray(y, float)
        total = sum(self._level_values(l, z) * self.radial(l, tau) for l in range(self.levels))
        return self._phase(x) * total

    def gradient(self, x, y: ArrayLike) -> np.ndarray:
        """(grad_x u_N, d_{x_{n+1}} u_N) at points with y > 0, shape (..., n + 1)."""
        x = self._points(x)
        z = self._rescaled(x)
        tau = self.C0 * self.N * np.asarray(y, float)
        alpha = np.asarray(self.spec.alpha)
        root = np.sqrt(self.N)
        out = np.zeros((*np.broadcast_shapes(z.shape[:-1], tau.shape), self.n + 1), complex)
        for l in range(self.levels):
            q = self._level_values(l, z)
            g = self.radial(l, tau)
            dg = self.radial_derivative(l, tau)
            for j in range(self.n):
                dq = self._interpolate(self.level_gradients[l, j], z)
                out[..., j] += (1j * self.N * alpha[j] * q + root * dq) * g
            out[..., self.n] += q * self.N * self.C0 * dg
        return self._phase(x)[..., None] * out


def _validated_point(jet: TaylorJet, alpha: np.ndarray) -> float:
    g0 = jet.gamma0
    if np.linalg.norm(g0 - g0.T) > 1e-12 * max(1.0, np.linalg.norm(g0)):
        raise DomainError("gamma(x0) is not symmetric", module="ansatz")
    if np.min(np.linalg.eigvalsh(g0)) <= 0.0:
        raise DomainError("gamma(x0) is not positive definite", module="ansatz")
    if not jet.c0 > 0.0:
        raise DomainError("c(x0) must be positive", module="ansatz", c0=jet.c0)
    C0_sq = float(alpha @ g0 @ alpha)
    if not C0_sq > 0.0:
        raise DomainError("C0 must be positive", module="ansatz", C0_sq=C0_sq)
    return float(np.sqrt(C0_sq))


@log_function_call("DEBUG")
@log_performance
def build_ansatz(spec: ProbeSpec, gamma_field: Callable, c_field: Callable) -> AnsatzSolution:
    if spec.depth_k > MAX_DEPTH:
        raise DomainError(f"depth_k above {MAX_DEPTH} needs derivatives that are not sampled", module="ansatz",
                          depth_k=spec.depth_k)
    s = spec.s.s
    depth = 2 * spec.depth_k
    alpha = np.asarray(spec.alpha)
    jet = taylor_jet(gamma_field, c_field, spec.x0, depth)
    C0 = _validated_point(jet, alpha)
    C0_sq = C0 * C0

    eta = spec.eta
    h = CUTOFF_GRID_STEP
    z_grid = TangentialGrid.centered(np.zeros(spec.n), int(round(ANSATZ_GRID_HALF_WIDTH / h)), h)
    z = z_grid.points()
    mask = (np.linalg.norm(z, axis=-1) < eta.radius + 1e-12).astype(float)
    eta_values = eta.evaluate(z)

    profiles = profile_chain(s, depth)
    kappa = flux_constants(s, depth)
    neumann = spec.mode is ProbeMode.NEUMANN

    factors: dict[tuple[int, int], np.ndarray] = {(0, 0): eta_values.astype(complex)}
    derivs: dict[tuple[int, int], _Derivatives] = {}

    def derivatives(key: tuple[int, int]) -> _Derivatives:
        if key not in derivs:
            derivs[key] = _derivatives(factors[key], h, mask)
        return derivs[key]

    for r in range(1, depth + 1):
        acc: dict[int, np.ndarray] = {}
        for m in range(1, r + 1):
            for (rr, level) in [key for key in factors if key[0] == r - m]:
                rhs = _apply_layer(m, derivatives((rr, level)), jet, alpha, z)
                acc[level + 1] = acc.get(level + 1, 0.0) - rhs / C0_sq
        if neumann:
            flux = sum(kappa[level] * value for level, value in acc.items())
            acc[0] = acc.get(0, 0.0) - flux / kappa[0]
        for level, value in acc.items():
            factors[(r, level)] = np.asarray(value, complex) * mask

    if neumann:
        normalization = 1.0 / (jet.c0 * (-kappa[0]) * spec.N ** (2 * s) * C0 ** (2 * s))
    else:
        normalization = 1.0

    levels = depth + 1
    level_factors = np.zeros((levels, *z_grid.shape), complex)
    for (r, level), value in factors.items():
        level_factors[level] += spec.N ** (-r / 2.0) * value
    level_factors *= normalization
    level_gradients = np.stack(
        [np.stack([_d1(level_factors[l], h, j) * mask for j in range(spec.n)]) for l in range(levels)]
    )

    terms = tuple(AnsatzTerm(r=r, level=level, factor=value) for (r, level), value in sorted(factors.items()))
    log.debug(
        f"ansatz {spec.mode.value} N={spec.N:.6g} depth={spec.depth_k}: C0={C0:.6g}, {len(terms)} terms"
    )
    return AnsatzSolution(
        spec=spec, C0=C0, c0=jet.c0, terms=terms, profiles=profiles, kappa=kappa,
        normalization=normalization, z_grid=z_grid, level_factors=level_factors,
        level_gradients=level_gradients, leading=eta_values, mask=mask, jet=jet,
        gamma_field=gamma_field, c_field=c_field,
    )


def ansatz_residual(ansatz: AnsatzSolution, gamma_field: Callable, c_field: Callable) -> float:
    """
    sup |div(x_{n+1}^{1-2s} gamma~ grad u_N)| / x_{n+1}^{1-2s} over the probe
    support, scaled by N^{2s-1}, with the exact coefficients of the fields.
    """
    N, s, C0 = ansatz.N, ansatz.s, ansatz.C0
    alpha = np.asarray(ansatz.spec.alpha)
    n = ansatz.n
    h = ansatz.z_grid.h
    z = ansatz.z_grid.points()
    x = np.asarray(ansatz.spec.x0) + z / np.sqrt(N)
    inside = ansatz.mask > 0

    gam = np.asarray(gamma_field(x))[inside]
    cc = np.asarray(c_field(x))[inside]
    drift = drift_field(gamma_field, c_field)(x)[inside]
    a = np.einsum("i,pij,j->p", alpha, gam, alpha)
    ga = gam @ alpha
    b_alpha = drift @ alpha

    taus = _RESIDUAL_TAUS
    bracket = np.zeros((int(inside.sum()), taus.size), complex)
    for level in range(ansatz.levels):
        P = ansatz.level_factors[level] / ansatz.normalization
        if not np.any(P):
            continue
        d = _derivatives(P, h, ansatz.mask)
        value = P[inside]
        grad = np.stack([g[inside] for g in d.grad], axis=-1)
        hess = np.stack([np.stack([d.hess[j][l][inside] for l in range(n)], axis=-1) for j in range(n)], axis=-2)
        rest = (
            2j * N**1.5 * np.sum(ga * grad, axis=-1)
            + N * (np.sum(gam * hess, axis=(-2, -1)) + 1j * b_alpha * value)
            + N**0.5 * np.sum(drift * grad, axis=-1)
            - N**2 * a * value
        )
        w = ansatz.profiles[level](taus)
        source = ansatz.profiles[level - 1](taus) if level > 0 else 0.0
        bracket += (N**2 * C0 * C0 * value)[:, None] * (taus**s * (w + source))[None, :]
        bracket += rest[:, None] * (taus**s * w)[None, :]
    residual = N ** (2 * s - 1) * ansatz.normalization * np.max(np.abs(cc[:, None] * bracket), initial=0.0)
    log.debug(f"ansatz residual N={N:.6g} depth={ansatz.spec.depth_k}: {residual:.6e}")
    return float(residual)


def _log_quadrature(func: Callable[[np.ndarray], np.ndarray]) -> float:
    """int_0^inf func(tau) dtau by panel Gauss-Legendre in log tau plus a power-law head."""
    edges = np.linspace(np.log(_TAU_LOWER), np.log(_TAU_UPPER), _TAU_PANELS + 1)
    nodes, weights = np.polynomial.legendre.leggauss(_TAU_NODES)
    half = 0.5 * np.diff(edges)
    u = 0.5 * (edges[1:] + edges[:-1])[:, None] + half[:, None] * nodes[None, :]
    tau = np.exp(u).ravel()
    values = func(tau)
    body = float(np.sum((values * tau).reshape(u.shape) * weights[None, :] * half[:, None]))
    t0, t1 = _TAU_LOWER, 2.0 * _TAU_LOWER
    f0, f1 = func(np.array([t0, t1]))
    if f0 == 0.0 or f1 == 0.0 or np.sign(f0) != np.sign(f1):
        return body
    p = np.log(f1 / f0) / np.log(t1 / t0)
    head = f0 * t0 / (p + 1.0) if p > -1.0 else 0.0
    return body + head


def pairing_decomposition(ansatz: AnsatzSolution) -> AnsatzPairing:
    """Energy of u_N by tensor quadrature, split by the normal cut-off zeta(sqrt(N) x_{n+1})."""
    N, s, C0 = ansatz.N, ansatz.s, ansatz.C0
    n = ansatz.n
    alpha = np.asarray(ansatz.spec.alpha)
    z = ansatz.z_grid.points()
    x = np.asarray(ansatz.spec.x0) + z / np.sqrt(N)
    dx = ansatz.z_grid.cell_volume * N ** (-n / 2.0)
    gam = np.asarray(ansatz.gamma_field(x))
    cc = np.asarray(ansatz.c_field(x))

    # tangential factors of grad_x u_N per level, trailing vector axis
    Q = ansatz.level_factors
    G = 1j * N * np.multiply.outer(Q, alpha) + np.sqrt(N) * np.moveaxis(ansatz.level_gradients, 1, -1)
    L = ansatz.levels
    A = np.zeros((L, L), complex)
    B = np.zeros((L, L), complex)
    for l in range(L):
        gG = np.einsum("...ij,...j->...i", gam, G[l])
        for m in range(L):
            A[l, m] = np.sum(cc * np.sum(gG * np.conj(G[m]), axis=-1)) * dx
            B[l, m] = np.sum(cc * Q[l] * np.conj(Q[m])) * dx

    split = C0 * np.sqrt(N)
    weights = {
        "total": lambda t: np.ones_like(t),
        "near": lambda t: normal_cutoff(t / split),
    }
    energies = {}
    for name, weight in weights.items():
        value = 0.0
        for l in range(L):
            for m in range(L):
                if A[l, m] == 0 and B[l, m] == 0:
                    continue
                T = _log_quadrature(
                    lambda t: t ** (1 - 2 * s) * ansatz.radial(l, t) * ansatz.radial(m, t) * weight(t)
                )
                dT = _log_quadrature(
                    lambda t: t ** (1 - 2 * s) * ansatz.radial_derivative(l, t) * ansatz.radial_derivative(m, t)
                    * weight(t)
                )
                value += (A[l, m] * T + N**2 * C0 * C0 * B[l, m] * dT).real
        energies[name] = (C0 * N) ** (2 * s - 2) * value

    mode = PairingMode.DTN if ansatz.spec.mode is ProbeMode.DIRICHLET else PairingMode.NTD
    exponent = -2 * s + n / 2.0 if mode is PairingMode.DTN else 2 * s + n / 2.0
    total, near = energies["total"], energies["near"]
    return AnsatzPairing(mode=mode, total=total, near=near, tail=total - near, scaled=N**exponent * total)


def ansatz_pairing(ansatz: AnsatzSolution) -> float:
    """Solver-free estimate of the probe pairing: the energy of u_N."""
    return pairing_decomposition(ansatz).total
