"""
Taylor coefficients of the conductivity at the probe point.

gamma_beta = d^beta gamma(x0) / beta! and the drift b_l = sum_j d_j(c gamma_jl) / c
are obtained from central finite differences of the user fields, so any
vectorized callable x -> gamma(x) of shape (..., n, n) can be probed.
"""

from dataclasses import dataclass, field
from itertools import combinations_with_replacement, product
from math import factorial
from typing import Callable

import numpy as np

from core.constants import TAYLOR_STEP
from core.errors import DomainError

MatrixField = Callable[[np.ndarray], np.ndarray]
ScalarField = Callable[[np.ndarray], np.ndarray]

MAX_TAYLOR_ORDER = 6
DRIFT_STEP = 1e-5
DRIFT_NOISE = 1e-11

# second-order central stencils for d^k/dx^k, offsets in units of h
_STENCILS: dict[int, tuple[np.ndarray, np.ndarray]] = {
    0: (np.array([0]), np.array([1.0])),
    1: (np.arange(-1, 2), np.array([-0.5, 0.0, 0.5])),
    2: (np.arange(-1, 2), np.array([1.0, -2.0, 1.0])),
    3: (np.arange(-2, 3), np.array([-0.5, 1.0, 0.0, -1.0, 0.5])),
    4: (np.arange(-2, 3), np.array([1.0, -4.0, 6.0, -4.0, 1.0])),
    5: (np.arange(-3, 4), np.array([-0.5, 2.0, -2.5, 0.0, 2.5, -2.0, 0.5])),
    6: (np.arange(-3, 4), np.array([1.0, -6.0, 15.0, -20.0, 15.0, -6.0, 1.0])),
}


def multi_indices(n: int, order: int) -> list[tuple[int, ...]]:
    """All beta in N^n with |beta| = order."""
    out = []
    for combo in combinations_with_replacement(range(n), order):
        beta = [0] * n
        for j in combo:
            beta[j] += 1
        out.append(tuple(beta))
    return out


def monomial(z: np.ndarray, beta: tuple[int, ...]) -> np.ndarray:
    out = np.ones(z.shape[:-1])
    for j, p in enumerate(beta):
        if p:
            out = out * z[..., j] ** p
    return out


def taylor_step(order: int, noise: float = np.finfo(float).eps) -> float:
    return max(TAYLOR_STEP, noise ** (1.0 / (order + 2)))


def partial_derivative(f: Callable, x0: np.ndarray, beta: tuple[int, ...], noise: float) -> np.ndarray:
    """d^beta f(x0) from the tensor product of the one-dimensional stencils."""
    order = sum(beta)
    if order > MAX_TAYLOR_ORDER:
        raise DomainError(f"derivatives above order {MAX_TAYLOR_ORDER} are not available", module="ansatz")
    h = taylor_step(order, noise)
    offsets = [_STENCILS[p][0] for p in beta]
    weights = [_STENCILS[p][1] for p in beta]
    shifts = np.array(list(product(*offsets)), float)
    coeffs = np.array([np.prod(w) for w in product(*weights)])
    keep = coeffs != 0.0
    values = np.asarray(f(x0[None, :] + h * shifts[keep]))
    return np.tensordot(coeffs[keep], values, axes=(0, 0)) / h**order


def drift_field(gamma: MatrixField, c: ScalarField, step: float = DRIFT_STEP) -> Callable[[np.ndarray], np.ndarray]:
    """x -> b(x) with b_l = sum_j d_j(c gamma_jl)(x) / c(x), fourth-order differences."""

    def flux(x: np.ndarray) -> np.ndarray:
        return np.asarray(c(x))[..., None, None] * np.asarray(gamma(x))

    def b(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, float)
        n = x.shape[-1]
        out = np.zeros(x.shape)
        for j in range(n):
            e = np.zeros(n)
            e[j] = step
            d = (-flux(x + 2 * e) + 8 * flux(x + e) - 8 * flux(x - e) + flux(x - 2 * e)) / (12 * step)
            out += d[..., j, :]
        return out / np.asarray(c(x))[..., None]

    return b


@dataclass(frozen=True, eq=False)
class TaylorJet:
    """Scaled derivatives gamma_beta, b_beta at x0 up to the stored order."""

    x0: np.ndarray
    order: int
    gamma: dict[tuple[int, ...], np.ndarray] = field(repr=False)
    drift: dict[tuple[int, ...], np.ndarray] = field(repr=False)
    c0: float = 1.0

    @property
    def n(self) -> int:
        return self.x0.size

    @property
    def gamma0(self) -> np.ndarray:
        return self.gamma[(0,) * self.n]

    def gamma_terms(self, degree: int):
        if degree < 0 or degree > self.order:
            return []
        return [(beta, self.gamma[beta]) for beta in multi_indices(self.n, degree)]

    def drift_terms(self, degree: int):
        if degree < 0 or degree > self.order - 2:
            return []
        return [(beta, self.drift[beta]) for beta in multi_indices(self.n, degree)]


def taylor_jet(gamma: MatrixField, c: ScalarField, x0, order: int) -> TaylorJet:
    x0 = np.asarray(x0, float)
    n = x0.size
    g0 = np.asarray(gamma(x0[None, :]))[0]
    c0 = float(np.asarray(c(x0[None, :]))[0])
    if g0.shape != (n, n):
        raise DomainError("gamma field must return n x n matrices", module="ansatz", shape=g0.shape)
    b = drift_field(gamma, c)
    gammas: dict[tuple[int, ...], np.ndarray] = {(0,) * n: g0}
    drifts: dict[tuple[int, ...], np.ndarray] = {}
    for degree in range(1, order + 1):
        for beta in multi_indices(n, degree):
            scale = np.prod([factorial(p) for p in beta])
            d = partial_derivative(gamma, x0, beta, np.finfo(float).eps) / scale
            gammas[beta] = 0.5 * (d + d.T)
    for degree in range(0, order - 1):
        for beta in multi_indices(n, degree):
            scale = np.prod([factorial(p) for p in beta])
            drifts[beta] = partial_derivative(b, x0, beta, DRIFT_NOISE) / scale
    return TaylorJet(x0=x0, order=order, gamma=gammas, drift=drifts, c0=c0)
