"""
Tensor-product finite element matrices.

The bilinear form int z^{1-2s} c (gamma grad_x u . grad_x v + u_z v_z) splits into
Kx(c gamma) (x) Mz(w) + Mx(c) (x) Kz(w) with w = z^{1-2s}. Tangential factors
use Q1 elements on the uniform grid, integrated with an equal blend of the
two-point Gauss rule and the vertex rule in every direction. The normal
factors use P1 elements on the graded mesh with the weight moments in closed
form.
"""

from dataclasses import dataclass, field
from itertools import product
from typing import Callable

import numpy as np
from scipy import sparse

from logger import log_performance

from .grid import WeightedGrid

_GAUSS = 0.5 / np.sqrt(3.0)
# blended rule on [0, 1]: vertex rule and two-point Gauss rule with weight 1/2 each
_POINTS_1D = np.array([0.0, 1.0, 0.5 - _GAUSS, 0.5 + _GAUSS])
_WEIGHTS_1D = np.full(4, 0.25)


@dataclass(frozen=True, eq=False)
class TangentialMatrices:
    stiffness: sparse.csr_matrix = field(repr=False)  # Kx with c gamma
    mass_c: sparse.csr_matrix = field(repr=False)  # Mx with c
    mass: sparse.csr_matrix = field(repr=False)  # Mx with weight 1
    interior: np.ndarray = field(repr=False)  # flat indices of the unknown nodes

    @property
    def size(self) -> int:
        return self.interior.size


@dataclass(frozen=True, eq=False)
class NormalMatrices:
    stiffness: sparse.csr_matrix = field(repr=False)
    mass: sparse.csr_matrix = field(repr=False)


def _reference_element(n: int, h: float):
    corners = np.array(list(product((0, 1), repeat=n)))
    qpoints = np.array(list(product(_POINTS_1D, repeat=n)))
    qweights = np.array([np.prod(w) for w in product(_WEIGHTS_1D, repeat=n)])
    # phi_0 = 1 - xi, phi_1 = xi per axis
    per_axis = np.where(corners[None, :, :] == 1, qpoints[:, None, :], 1.0 - qpoints[:, None, :])
    dper_axis = np.where(corners[None, :, :] == 1, 1.0, -1.0) / h
    values = np.prod(per_axis, axis=-1)  # (Q, L)
    grads = np.empty((*values.shape, n))
    for j in range(n):
        others = np.prod(np.delete(per_axis, j, axis=-1), axis=-1) if n > 1 else 1.0
        grads[..., j] = dper_axis[..., j] * others
    return corners, qpoints, qweights, values, grads


def _element_nodes(shape: tuple[int, ...], periodic: bool, corners: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    cells = tuple(m if periodic else m - 1 for m in shape)
    origin = np.stack(np.meshgrid(*[np.arange(c) for c in cells], indexing="ij"), axis=-1).reshape(-1, len(shape))
    nodes = origin[:, None, :] + corners[None, :, :]
    if periodic:
        nodes = nodes % np.asarray(shape)
    flat = np.ravel_multi_index(tuple(np.moveaxis(nodes, -1, 0)), shape)
    return origin, flat


@log_performance
def tangential_matrices(
    grid: WeightedGrid,
    gamma: Callable[[np.ndarray], np.ndarray],
    c: Callable[[np.ndarray], np.ndarray],
) -> TangentialMatrices:
    tg = grid.tangential
    n, h = tg.n, tg.h
    corners, qpoints, qweights, values, grads = _reference_element(n, h)
    origin, nodes = _element_nodes(tg.shape, tg.periodic, corners)

    x = tg.lower[None, None, :] + h * (origin[:, None, :] + qpoints[None, :, :])  # (E, Q, n)
    cq = np.asarray(c(x), float)
    A = cq[..., None, None] * np.asarray(gamma(x), float)
    volume = h**n

    local_k = volume * np.einsum("q,qai,eqij,qbj->eab", qweights, grads, A, grads, optimize=True)
    local_mc = volume * np.einsum("q,eq,qa,qb->eab", qweights, cq, values, values, optimize=True)
    local_m = volume * np.einsum("q,qa,qb->ab", qweights, values, values)

    rows = np.repeat(nodes, nodes.shape[1], axis=1).ravel()
    cols = np.tile(nodes, (1, nodes.shape[1])).ravel()
    size = tg.size

    def build(local: np.ndarray) -> sparse.csr_matrix:
        data = np.broadcast_to(local, (nodes.shape[0], *local.shape[-2:])).ravel()
        return sparse.coo_matrix((data, (rows, cols)), shape=(size, size)).tocsr()

    interior = np.flatnonzero(grid.interior_tangential().ravel())
    restrict = lambda m: m[interior][:, interior].tocsr()
    return TangentialMatrices(
        stiffness=restrict(build(local_k)),
        mass_c=restrict(build(local_mc)),
        mass=restrict(build(local_m)),
        interior=interior,
    )


def _moments(a: np.ndarray, b: np.ndarray, s: float, p: int) -> np.ndarray:
    q = p + 2.0 - 2.0 * s
    return (b**q - a**q) / q


def normal_matrices(grid: WeightedGrid) -> NormalMatrices:
    z = grid.z
    s = grid.s.s
    a, b = z[:-1], z[1:]
    d = b - a
    mu0, mu1, mu2 = (_moments(a, b, s, p) for p in (0, 1, 2))
    m_aa = (b * b * mu0 - 2 * b * mu1 + mu2) / d**2
    m_ab = (-a * b * mu0 + (a + b) * mu1 - mu2) / d**2
    m_bb = (a * a * mu0 - 2 * a * mu1 + mu2) / d**2
    k = mu0 / d**2

    size = z.size
    cells = np.arange(size - 1)
    rows = np.concatenate([cells, cells, cells + 1, cells + 1])
    cols = np.concatenate([cells, cells + 1, cells, cells + 1])
    mass = sparse.coo_matrix((np.concatenate([m_aa, m_ab, m_ab, m_bb]), (rows, cols)), shape=(size, size))
    stiff = sparse.coo_matrix((np.concatenate([k, -k, -k, k]), (rows, cols)), shape=(size, size))
    return NormalMatrices(stiffness=stiff.tocsr(), mass=mass.tocsr())


def apply_operator(tm: TangentialMatrices, nm: NormalMatrices, U: np.ndarray) -> np.ndarray:
    """(Kx (x) Mz + Mx_c (x) Kz) vec(U) for U of shape (tangential unknowns, normal nodes)."""
    return tm.stiffness @ U @ nm.mass + tm.mass_c @ U @ nm.stiffness
