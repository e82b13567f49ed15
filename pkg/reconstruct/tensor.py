"""Quadratic forms from limits, polarization and metric recovery."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from numpy.typing import ArrayLike

from core.constants import CUTOFF_EPSILON_DEFAULT, DEFAULT_FIT_POWERS
from core.errors import DomainError
from core.specfun import LimitConstants
from core.types import Order, PairingMode
from logger import get_logger
from solver.field import ConductivityField

from .probe import GridChoice, PairingSeries, admissible_schedule, default_cutoff, probe_direction

log = get_logger(__name__)

DirectionKey = str | tuple[float, ...]


def quadratic_form_from_limit(limit: float, s: Order | float, mode: PairingMode | str, constants: LimitConstants) -> float:
    """
    Invert the limit formulas for q = c^{1/s} alpha.gamma alpha:

        dtn: q = (limit / (c1 + c2))^{1/s}
        ntd: q = (c_hat^{-2} (c1 + c2) / limit)^{1/s}
    """
    nu = Order.of(s).s
    mode = PairingMode(mode)
    if not limit > 0.0:
        raise DomainError("limit must be positive", module="reconstruct", limit=limit)
    if abs(constants.s - nu) > 1e-14:
        raise DomainError("constants belong to another order", module="reconstruct", s=nu, constants_s=constants.s)
    if mode is PairingMode.DTN:
        return float((limit / constants.c_sum) ** (1.0 / nu))
    return float((constants.c_sum / constants.c_hat_s**2 / limit) ** (1.0 / nu))


def polarization_directions(n: int) -> dict[str, np.ndarray]:
    """e_j and (e_j + e_l) / sqrt(2) for j < l, labelled "e1", "e1+e2", ..."""
    eye = np.eye(n)
    out = {f"e{j + 1}": eye[j] for j in range(n)}
    for j in range(n):
        for l in range(j + 1, n):
            out[f"e{j + 1}+e{l + 1}"] = (eye[j] + eye[l]) / np.sqrt(2.0)
    return out


def _normalized(q_values: Mapping[DirectionKey, float], n: int) -> list[tuple[np.ndarray, float]]:
    labelled = polarization_directions(n)
    items = []
    for key, value in q_values.items():
        if isinstance(key, str):
            if key not in labelled:
                raise DomainError(f"unknown direction label {key!r}", module="reconstruct")
            vector = labelled[key]
        else:
            vector = np.asarray(key, float)
            if vector.shape != (n,) or abs(np.linalg.norm(vector) - 1.0) > 1e-9:
                raise DomainError("directions must be unit vectors of the tensor dimension", module="reconstruct",
                                  direction=tuple(vector.tolist()))
        items.append((vector, float(value)))
    return items


def _lookup(items: list[tuple[np.ndarray, float]], vector: np.ndarray) -> float | None:
    for v, q in items:
        if np.allclose(v, vector, atol=1e-9) or np.allclose(v, -vector, atol=1e-9):
            return q
    return None


@dataclass(frozen=True, eq=False)
class RecoveredTensor:
    x0: tuple[float, ...]
    matrix: np.ndarray = field(repr=False)
    q_values: dict[str, float]
    residuals: dict[str, float]
    min_eigenvalue: float
    condition: float
    method: str = "polarization"

    @property
    def spd(self) -> bool:
        return self.min_eigenvalue > 0.0

    def as_dict(self) -> dict:
        return {
            "x0": list(self.x0),
            "matrix": self.matrix.tolist(),
            "q_values": dict(self.q_values),
            "residuals": dict(self.residuals),
            "min_eigenvalue": self.min_eigenvalue,
            "condition": self.condition,
            "method": self.method,
        }


def _label(vector: np.ndarray) -> str:
    return "(" + ",".join(f"{v:.6g}" for v in vector) + ")"


def _finish(x0: ArrayLike, G: np.ndarray, items: list[tuple[np.ndarray, float]], method: str) -> RecoveredTensor:
    G = 0.5 * (G + G.T)
    eig = np.linalg.eigvalsh(G)
    residuals = {_label(v): float(v @ G @ v - q) for v, q in items}
    condition = float(eig[-1] / eig[0]) if eig[0] > 0 else float("inf")
    if eig[0] <= 0.0:
        log.warning(f"assembled tensor is not positive definite (min eigenvalue {eig[0]:.3e}), limits may be noisy")
    return RecoveredTensor(
        x0=tuple(float(x) for x in np.asarray(x0, float)),
        matrix=G,
        q_values={_label(v): q for v, q in items},
        residuals=residuals,
        min_eigenvalue=float(eig[0]),
        condition=condition,
        method=method,
    )


def assemble_tensor(x0: ArrayLike, q_values: Mapping[DirectionKey, float], n: int | None = None) -> RecoveredTensor:
    """
    Polarization: gamma_jj = q(e_j) and
    gamma_jl = q((e_j + e_l) / sqrt(2)) - (q(e_j) + q(e_l)) / 2.
    """
    n = len(np.atleast_1d(x0)) if n is None else n
    items = _normalized(q_values, n)
    required = polarization_directions(n)
    found = {label: _lookup(items, vector) for label, vector in required.items()}
    missing = sorted(label for label, q in found.items() if q is None)
    if missing:
        raise DomainError("missing polarization directions", module="reconstruct", missing=missing)
    nonpositive = sorted(label for label, q in found.items() if not q > 0.0)
    if nonpositive:
        raise DomainError("quadratic form values must be positive", module="reconstruct", directions=nonpositive)

    G = np.diag([found[f"e{j + 1}"] for j in range(n)])
    for j in range(n):
        for l in range(j + 1, n):
            G[j, l] = G[l, j] = found[f"e{j + 1}+e{l + 1}"] - 0.5 * (G[j, j] + G[l, l])
    return _finish(x0, G, items, "polarization")


def _symmetric_basis(n: int) -> list[tuple[int, int]]:
    return [(j, l) for j in range(n) for l in range(j, n)]


def assemble_tensor_lstsq(x0: ArrayLike, q_values: Mapping[DirectionKey, float], n: int | None = None) -> RecoveredTensor:
    """Least-squares G from alpha.G alpha = q over any spanning direction set, projected onto SPD."""
    n = len(np.atleast_1d(x0)) if n is None else n
    items = _normalized(q_values, n)
    basis = _symmetric_basis(n)
    if len(items) < len(basis):
        raise DomainError("too few directions for a symmetric tensor", module="reconstruct",
                          directions=len(items), required=len(basis))
    design = np.array([[v[j] * v[l] * (1.0 if j == l else 2.0) for j, l in basis] for v, _ in items])
    rhs = np.array([q for _, q in items])
    if np.linalg.matrix_rank(design) < len(basis):
        raise DomainError("directions do not determine the tensor", module="reconstruct")
    coeffs, *_ = np.linalg.lstsq(design, rhs, rcond=None)
    G = np.zeros((n, n))
    for (j, l), value in zip(basis, coeffs):
        G[j, l] = G[l, j] = value
    eig, vec = np.linalg.eigh(G)
    floor = 1e-12 * max(abs(eig[-1]), 1e-300)
    if eig[0] < floor:
        log.warning(f"least-squares tensor projected onto the SPD cone (min eigenvalue {eig[0]:.3e})")
        G = (vec * np.maximum(eig, floor)) @ vec.T
    return _finish(x0, G, items, "least_squares")


def _check_spd(matrix: ArrayLike, name: str) -> np.ndarray:
    M = np.atleast_2d(np.asarray(matrix, float))
    if M.shape[0] != M.shape[1]:
        raise DomainError(f"{name} must be square", module="reconstruct")
    if not np.allclose(M, M.T, rtol=1e-12, atol=1e-12 * max(1.0, np.abs(M).max())):
        raise DomainError(f"{name} must be symmetric", module="reconstruct")
    if np.linalg.eigvalsh(M)[0] <= 0.0:
        raise DomainError(f"{name} must be positive definite", module="reconstruct")
    return 0.5 * (M + M.T)


def weighted_tensor_from_metric(g: ArrayLike, s: Order | float) -> np.ndarray:
    """B = det(g)^{1/(2s)} g^{-1}, the weighted tensor c^{1/s} gamma of a metric."""
    nu = Order.of(s).s
    G = _check_spd(g, "g")
    return np.linalg.det(G) ** (1.0 / (2.0 * nu)) * np.linalg.inv(G)


def recover_metric_from_weighted(B: ArrayLike, s: Order | float, n: int | None = None) -> np.ndarray:
    """Invert B = det(g)^{1/(2s)} g^{-1}: det g = det(B)^{2s/(n-2s)}, g^{-1} = B det(g)^{-1/(2s)}."""
    nu = Order.of(s).s
    M = _check_spd(B, "B")
    n = M.shape[0] if n is None else n
    if n != M.shape[0]:
        raise DomainError("n does not match B", module="reconstruct", n=n, shape=M.shape)
    exponent = n - 2.0 * nu
    if abs(exponent) < 1e-12:
        raise DomainError("n = 2s leaves the determinant undetermined", module="reconstruct")
    # log-determinants keep the powers stable for badly scaled B
    _, logdet_B = np.linalg.slogdet(M)
    logdet_g = 2.0 * nu / exponent * logdet_B
    g_inv = M * np.exp(-logdet_g / (2.0 * nu))
    g = np.linalg.inv(g_inv)
    return 0.5 * (g + g.T)


def analytic_q_values(matrix: ArrayLike, directions: Sequence[ArrayLike] | None = None) -> dict[DirectionKey, float]:
    """alpha.M alpha for the polarization directions, or for ``directions`` keyed by their tuples."""
    M = np.asarray(matrix, float)
    if directions is None:
        return {label: float(v @ M @ v) for label, v in polarization_directions(M.shape[0]).items()}
    out = {}
    for d in directions:
        v = np.asarray(d, float)
        v = v / np.linalg.norm(v)
        out[tuple(v.tolist())] = float(v @ M @ v)
    return out


@dataclass(frozen=True, eq=False)
class PointReconstruction:
    tensor: RecoveredTensor
    series: tuple[PairingSeries, ...] = field(repr=False)
    metric: np.ndarray | None = None


def reconstruct_point(
    field_: ConductivityField,
    grid: GridChoice,
    s: Order | float,
    x0: ArrayLike,
    mode: PairingMode | str,
    targets: Sequence[float],
    *,
    constants: LimitConstants,
    extra_directions: Sequence[ArrayLike] = (),
    fit_powers: Sequence[float] | None = None,
    epsilon: float | None = None,
    cutoff_kind: str | None = None,
    recover_metric: bool = False,
    threads: int = 1,
) -> PointReconstruction:
    """Probe every polarization direction (plus ``extra_directions``) at x0 and assemble the tensor."""
    nu = Order.of(s).s
    mode = PairingMode(mode)
    x0 = np.asarray(x0, float)
    n = x0.size
    eta = default_cutoff(mode, n, epsilon or CUTOFF_EPSILON_DEFAULT, cutoff_kind)
    directions = list(polarization_directions(n).values())
    directions += [np.asarray(d, float) / np.linalg.norm(d) for d in extra_directions]

    def one(alpha: np.ndarray) -> PairingSeries:
        schedule = list(targets) if mode is PairingMode.DTN else admissible_schedule(eta, alpha, targets)
        return probe_direction(field_, grid, nu, x0, alpha, schedule, mode, cutoff=eta,
                               fit_powers=fit_powers or DEFAULT_FIT_POWERS)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        series = tuple(pool.map(one, directions))

    q_values = {
        tuple(alpha.tolist()): quadratic_form_from_limit(ser.limit, nu, mode, constants)
        for alpha, ser in zip(directions, series)
    }
    tensor = assemble_tensor_lstsq(x0, q_values, n) if extra_directions else assemble_tensor(x0, q_values, n)
    metric = recover_metric_from_weighted(tensor.matrix, nu, n) if recover_metric and tensor.spd else None
    return PointReconstruction(tensor=tensor, series=series, metric=metric)
