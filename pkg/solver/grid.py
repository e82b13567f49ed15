"""Tensor grids for the truncated half-space R^n x (0, L_z)."""

from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from core.constants import (
    BOX_FACTOR_DEFAULT,
    DEPTH_FACTOR_DEFAULT,
    DIRECT_SOLVE_LIMIT,
    GRADING_DEFAULT,
    MEMORY_CAP_MB,
    MIN_DEPTH_FACTOR,
    MIN_NORMAL_NODES,
    MIN_POINTS_PER_WAVELENGTH,
    NORMAL_NODES_DEFAULT,
    POINTS_PER_WAVELENGTH_DEFAULT,
    SOLVER_MAX_ITER,
    SOLVER_RTOL,
    TANGENTIAL_CELL_MULTIPLE,
)
from core.errors import DomainError, ResolutionError
from core.types import LateralBC, Order, TangentialGrid
from logger import get_logger

from .field import ConductivityField

log = get_logger(__name__)


class ResolutionSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    points_per_wavelength: float = Field(POINTS_PER_WAVELENGTH_DEFAULT, ge=MIN_POINTS_PER_WAVELENGTH)
    normal_nodes: int = Field(NORMAL_NODES_DEFAULT, ge=MIN_NORMAL_NODES)
    grading: float = Field(GRADING_DEFAULT, ge=1.0, le=4.0)
    box_factor: float = Field(BOX_FACTOR_DEFAULT, gt=1.0)
    depth_factor: float = Field(DEPTH_FACTOR_DEFAULT, ge=MIN_DEPTH_FACTOR)
    lateral: LateralBC = LateralBC.DIRICHLET_ZERO
    memory_cap_mb: float = Field(MEMORY_CAP_MB, gt=0.0)
    method: Literal["modal", "cg", "direct"] = "modal"
    rtol: float = Field(SOLVER_RTOL, gt=0.0, lt=1e-3)
    max_iter: int = Field(SOLVER_MAX_ITER, ge=1)
    cell_multiple: int = Field(TANGENTIAL_CELL_MULTIPLE, ge=1)

    def refined(self) -> "ResolutionSpec":
        return self.model_copy(
            update={
                "points_per_wavelength": 2 * self.points_per_wavelength,
                "normal_nodes": 2 * self.normal_nodes,
            }
        )


def normal_nodes(depth: float, count: int, grading: float) -> np.ndarray:
    """z_j = depth (j / M)^grading, j = 0..M with M = count - 1."""
    return depth * (np.arange(count) / (count - 1)) ** grading


@dataclass(frozen=True, eq=False)
class WeightedGrid:
    tangential: TangentialGrid = field(repr=False)
    z: np.ndarray = field(repr=False)
    s: Order
    lateral: LateralBC
    grading: float
    half_width: float  # L_x
    depth: float  # L_z
    spec: ResolutionSpec = field(default_factory=ResolutionSpec, repr=False)

    def __post_init__(self):
        z = np.asarray(self.z, float)
        if z[0] != 0.0 or np.any(np.diff(z) <= 0.0):
            raise DomainError("normal nodes must start at 0 and increase strictly", module="extsolver")
        if self.lateral is LateralBC.PERIODIC and not self.tangential.periodic:
            raise DomainError("periodic laterals need a periodic tangential grid", module="extsolver")

    @property
    def n(self) -> int:
        return self.tangential.n

    @property
    def normal_count(self) -> int:
        return self.z.size

    @property
    def shape(self) -> tuple[int, ...]:
        return (*self.tangential.shape, self.normal_count)

    @property
    def h(self) -> float:
        return self.tangential.h

    def weight_integrals(self) -> np.ndarray:
        """int_{z_j}^{z_{j+1}} z^{1-2s} dz per normal cell, in closed form."""
        p = 2.0 - 2.0 * self.s.s
        return np.diff(self.z**p) / p

    def interior_tangential(self) -> np.ndarray:
        """Mask of tangential nodes that carry unknowns."""
        mask = np.ones(self.tangential.shape, bool)
        if self.lateral is LateralBC.DIRICHLET_ZERO:
            for axis in range(self.n):
                index = [slice(None)] * self.n
                index[axis] = 0
                mask[tuple(index)] = False
                index[axis] = -1
                mask[tuple(index)] = False
        return mask

    @property
    def unknowns(self) -> int:
        return int(self.interior_tangential().sum()) * (self.normal_count - 1)

    def memory_estimate_mb(self) -> float:
        nodes = self.tangential.size * self.normal_count
        elements = self.tangential.size
        quad = 4**self.n
        stiffness = self.tangential.size * 3**self.n * 16
        assembly = elements * quad * (self.n**2 + 1) * 8
        fields = nodes * 16 * 6
        modal = self.normal_count**2 * 8 + 10 * stiffness
        if self.spec.method == "modal":
            solver = modal
        else:
            solver = nodes * 3**self.n * 2 * 16 * (4 if self.spec.method == "direct" else 1)
        return (stiffness + assembly + fields + solver) / 2**20

    def describe(self) -> dict:
        return {
            "tangential": self.tangential.describe(),
            "normal_nodes": self.normal_count,
            "depth": self.depth,
            "half_width": self.half_width,
            "grading": self.grading,
            "lateral": self.lateral.value,
            "s": self.s.s,
            "method": self.spec.method,
        }


def _snapped_spacing(N_max: float, ppw: float, alignment: float) -> float:
    """Largest h <= 2 pi / (ppw N_max) with sqrt(N_max) h = alignment / K, K integer."""
    root = np.sqrt(N_max)
    target = 2.0 * np.pi / (ppw * N_max)
    K = int(np.ceil(alignment / (root * target) - 1e-12))
    return alignment / (K * root)


def build_domain(
    field_: ConductivityField,
    probe_N_max: float,
    resolution_spec: ResolutionSpec | None = None,
    s: Order | float = 0.5,
    *,
    N_min: float | None = None,
    center=None,
    alignment: float = 1.0,
) -> WeightedGrid:
    """
    Grid for probes up to frequency ``probe_N_max``.

    The tangential spacing resolves the probe wavelength 2 pi / N_max with the
    requested points per wavelength and is snapped to the cut-off lattice. The
    box half-width is box_factor support radii of the widest probe, the depth
    is depth_factor / (sqrt(C1) N_min).
    """
    spec = resolution_spec or ResolutionSpec()
    order = Order.of(s)
    if not probe_N_max > 0:
        raise DomainError("probe_N_max must be positive", module="extsolver")
    N_min = probe_N_max if N_min is None else float(N_min)
    if not 0 < N_min <= probe_N_max:
        raise DomainError("N_min must lie in (0, probe_N_max]", module="extsolver")
    n = field_.n
    center = np.zeros(n) if center is None else np.asarray(center, float)

    h = _snapped_spacing(probe_N_max, spec.points_per_wavelength, alignment)
    half_width = spec.box_factor / np.sqrt(N_min)
    half_cells = int(np.ceil(half_width / h))
    step = max(1, spec.cell_multiple // 2)
    half_cells = step * int(np.ceil(half_cells / step))
    periodic = spec.lateral is LateralBC.PERIODIC
    lower = center - half_cells * h
    tangential = TangentialGrid.box(lower, 2 * half_cells, h, periodic=periodic)

    depth = spec.depth_factor / (np.sqrt(field_.C1) * N_min)
    z = normal_nodes(depth, spec.normal_nodes, spec.grading)
    grid = WeightedGrid(
        tangential=tangential, z=z, s=order, lateral=spec.lateral, grading=spec.grading,
        half_width=half_cells * h, depth=depth, spec=spec,
    )

    estimate = grid.memory_estimate_mb()
    if estimate > spec.memory_cap_mb:
        ratio = (spec.memory_cap_mb / estimate) ** (1.0 / n)
        suggested = max(MIN_POINTS_PER_WAVELENGTH, spec.points_per_wavelength * ratio)
        raise ResolutionError(
            "grid exceeds the memory cap",
            module="extsolver",
            estimate_mb=round(estimate, 1),
            cap_mb=spec.memory_cap_mb,
            suggested_points_per_wavelength=round(suggested, 2),
        )
    if spec.method == "direct" and grid.unknowns > DIRECT_SOLVE_LIMIT:
        raise ResolutionError("direct factorization limited to smaller systems", module="extsolver",
                              unknowns=grid.unknowns, limit=DIRECT_SOLVE_LIMIT)
    log.debug(
        f"domain N_max={probe_N_max:g}: {tangential.shape} x {z.size}, h={h:.4g}, "
        f"L_x={grid.half_width:.4g}, L_z={depth:.4g}, ~{estimate:.0f} MB"
    )
    return grid


def periodic_domain(
    lower, period: float, cells: int, depth: float, s: Order | float,
    resolution_spec: ResolutionSpec | None = None,
) -> WeightedGrid:
    """Periodic tangential box [lower, lower + period)^n, for single-mode checks."""
    spec = (resolution_spec or ResolutionSpec()).model_copy(update={"lateral": LateralBC.PERIODIC})
    h = period / cells
    tangential = TangentialGrid.box(np.asarray(lower, float), cells, h, periodic=True)
    z = normal_nodes(depth, spec.normal_nodes, spec.grading)
    return WeightedGrid(
        tangential=tangential, z=z, s=Order.of(s), lateral=LateralBC.PERIODIC, grading=spec.grading,
        half_width=period / 2.0, depth=depth, spec=spec,
    )
