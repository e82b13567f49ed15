"""Oscillatory boundary data phi_N (Dirichlet) and f_N (Neumann)."""

from dataclasses import dataclass, field as dc_field
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike
from scipy import optimize, special

from core.constants import (
    ADMISSIBLE_ZERO_TOL,
    FAST_PATH_BOX,
    FAST_PATH_POINTS_PER_UNIT,
    FREQUENCY_CEILING,
    MEAN_ZERO_TOL,
    MIN_POINTS_PER_WAVELENGTH,
)
from core.errors import AdmissibilityError, DomainError, ResolutionError
from core.types import CutoffKind, Order, ProbeMode, TangentialGrid
from logger import get_logger

from .cutoff import CutoffProfile

log = get_logger(__name__)


def unit_direction(vector: ArrayLike) -> tuple[float, ...]:
    v = np.asarray(vector, float)
    norm = np.linalg.norm(v)
    if not norm > 0:
        raise DomainError("direction must be nonzero", module="ansatz")
    return tuple(float(x) for x in v / norm)


@dataclass(frozen=True, eq=False)
class ProbeSpec:
    s: Order
    x0: tuple[float, ...]
    alpha: tuple[float, ...]
    N: float
    mode: ProbeMode
    depth_k: int
    eta: CutoffProfile = dc_field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "s", Order.of(self.s))
        object.__setattr__(self, "mode", ProbeMode(self.mode))
        object.__setattr__(self, "x0", tuple(float(x) for x in self.x0))
        object.__setattr__(self, "alpha", tuple(float(a) for a in self.alpha))
        if len(self.x0) != len(self.alpha) or len(self.alpha) != self.eta.n:
            raise DomainError("x0, alpha and the cut-off must share the dimension", module="ansatz")
        if abs(np.linalg.norm(self.alpha) - 1.0) > 1e-12:
            raise DomainError("alpha must be a unit vector", module="ansatz", alpha=self.alpha)
        if not self.N > 0:
            raise DomainError("frequency N must be positive", module="ansatz", N=self.N)
        if self.depth_k < 0:
            raise DomainError("depth_k must be nonnegative", module="ansatz", depth_k=self.depth_k)

    @property
    def n(self) -> int:
        return len(self.x0)

    @property
    def support_radius(self) -> float:
        return self.N ** -0.5

    def with_frequency(self, N: float) -> "ProbeSpec":
        return ProbeSpec(self.s, self.x0, self.alpha, float(N), self.mode, self.depth_k, self.eta)


@dataclass(frozen=True, eq=False)
class BoundaryData:
    field: np.ndarray = dc_field(repr=False)
    grid: TangentialGrid = dc_field(repr=False)
    support_radius: float
    mean: complex
    kind: ProbeMode
    N: float
    x0: tuple[float, ...]
    alpha: tuple[float, ...]
    metadata: dict = dc_field(default_factory=dict)

    @classmethod
    def from_field(cls, values: np.ndarray, grid: TangentialGrid, kind: ProbeMode, **metadata) -> "BoundaryData":
        """Wrap an arbitrary grid function, e.g. a single Fourier mode or a recomputed flux."""
        values = np.asarray(values, complex)
        if values.shape != grid.shape:
            raise DomainError("field does not match the grid", module="ansatz")
        return cls(
            field=values,
            grid=grid,
            support_radius=float(np.max(grid.upper - grid.lower)),
            mean=complex(grid.integrate(values)),
            kind=ProbeMode(kind),
            N=0.0,
            x0=tuple(float(x) for x in 0.5 * (grid.lower + grid.upper)),
            alpha=tuple(0.0 for _ in range(grid.n)),
            metadata=metadata,
        )

    @property
    def l1_norm(self) -> float:
        return self.grid.norm_l1(self.field)

    @property
    def l2_norm(self) -> float:
        return self.grid.norm_l2(self.field)

    def conjugate(self) -> "BoundaryData":
        return BoundaryData(
            field=np.conj(self.field), grid=self.grid, support_radius=self.support_radius,
            mean=complex(np.conj(self.mean)), kind=self.kind, N=self.N, x0=self.x0,
            alpha=tuple(-a for a in self.alpha), metadata=dict(self.metadata),
        )


def _box_zeros(eta: CutoffProfile, alpha: np.ndarray, r_min: float, r_max: float) -> list[float]:
    zeros: list[float] = []
    for a in alpha:
        if abs(a) < 1e-14:
            continue
        spacing = eta.box_zero_spacing(a)
        factor = lambda r, a=a: np.sin(0.5 * eta.scale * a * r)
        k = max(1, int(np.ceil(r_min / spacing - 1e-12)))
        while k * spacing <= r_max:
            centre = k * spacing
            lo, hi = centre - 0.25 * spacing, centre + 0.25 * spacing
            zeros.append(optimize.brentq(factor, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps))
            k += 1
            if len(zeros) > 10_000:
                break
    return zeros


def _scanned_zeros(eta: CutoffProfile, alpha: np.ndarray, r_min: float, r_max: float, count: int) -> list[float]:
    zeros: list[float] = []
    step = 0.05
    r_lo = r_min
    g_lo = float(eta.fourier_along(alpha, r_lo))
    while r_lo < r_max and len(zeros) < count:
        r_hi = r_lo + step
        g_hi = float(eta.fourier_along(alpha, r_hi))
        if g_lo == 0.0:
            zeros.append(r_lo)
        elif g_lo * g_hi < 0.0:
            zeros.append(optimize.brentq(lambda r: float(eta.fourier_along(alpha, r)), r_lo, r_hi, xtol=1e-14))
        r_lo, g_lo = r_hi, g_hi
    return zeros


def admissible_frequencies(
    eta: CutoffProfile,
    alpha: Sequence[float],
    count: int,
    N_min: float = 1.0,
) -> list[float]:
    """
    Frequencies N >= N_min with eta_hat(alpha sqrt(N)) = 0, in increasing order.

    For the mollified box the zeros are the sign changes of the individual
    box factors sin(sigma alpha_j r / 2); other cut-offs are scanned along
    the ray.
    """
    if count < 1:
        raise DomainError("count must be at least 1", module="ansatz")
    alpha = np.asarray(alpha, float)
    if abs(np.linalg.norm(alpha) - 1.0) > 1e-12:
        raise DomainError("alpha must be a unit vector", module="ansatz")
    r_min = np.sqrt(max(N_min, 0.0))
    r_max = np.sqrt(FREQUENCY_CEILING)

    if eta.kind is CutoffKind.MOLLIFIED_BOX:
        spacing = min(eta.box_zero_spacing(a) for a in alpha if abs(a) > 1e-14)
        r_stop = min(r_max, r_min + (count + 1) * spacing)
        raw = sorted(_box_zeros(eta, alpha, r_min, r_stop))
    else:
        raw = _scanned_zeros(eta, alpha, max(r_min, 1e-3), r_max, count)

    peak = abs(float(eta.fourier(np.zeros(eta.n))))
    found: list[float] = []
    for r in raw:
        if found and abs(r * r - found[-1]) <= 1e-9 * r * r:
            continue
        if abs(float(eta.fourier_along(alpha, r))) > ADMISSIBLE_ZERO_TOL * peak:
            continue
        found.append(float(r * r))
        if len(found) == count:
            break
    if len(found) < count:
        log.warning(f"only {len(found)} of {count} admissible frequencies found below N={FREQUENCY_CEILING:g}")
    return found


def nearest_admissible(eta: CutoffProfile, alpha: Sequence[float], N: float) -> float:
    candidates = admissible_frequencies(eta, alpha, 2, N_min=max(1.0, N / 4.0))
    below = admissible_frequencies(eta, alpha, 1, N_min=1.0)
    options = candidates + below
    return min(options, key=lambda M: abs(M - N)) if options else float("nan")


def aligned_grid(
    x0: Sequence[float],
    N: float,
    eta: CutoffProfile,
    half_width: float = FAST_PATH_BOX,
    points_per_unit: int = FAST_PATH_POINTS_PER_UNIT,
    points_per_wavelength: int = 16,
    periodic: bool = True,
) -> TangentialGrid:
    """
    Tangential grid around x0 whose spacing h satisfies sqrt(N) h = sigma / K
    for an integer K, so that discrete sums of admissible Neumann data vanish
    to round-off. ``half_width`` is measured in support radii.
    """
    root = np.sqrt(N)
    K = max(points_per_unit, int(np.ceil(points_per_wavelength * eta.scale * root / (2.0 * np.pi))))
    h = eta.scale / (K * root)
    half_cells = int(np.ceil(half_width * K / eta.scale))
    lower = [float(c) - half_cells * h for c in x0]
    return TangentialGrid.box(lower, 2 * half_cells, h, periodic=periodic)


def _check_resolution(grid: TangentialGrid, spec: ProbeSpec) -> None:
    wavelength = 2.0 * np.pi / spec.N
    if grid.h > wavelength / MIN_POINTS_PER_WAVELENGTH:
        raise ResolutionError(
            "tangential grid too coarse for the probe oscillation",
            module="ansatz",
            h=grid.h,
            required_h=wavelength / MIN_POINTS_PER_WAVELENGTH,
        )
    if not grid.periodic:
        radius = spec.support_radius * spec.eta.radius
        x0 = np.asarray(spec.x0)
        if np.any(x0 - radius <= grid.lower) or np.any(x0 + radius >= grid.upper):
            raise ResolutionError("probe support leaves the tangential box", module="ansatz",
                                  support_radius=radius)


def _sample(spec: ProbeSpec, grid: TangentialGrid) -> np.ndarray:
    offsets = grid.points() - np.asarray(spec.x0)
    if grid.periodic:
        period = grid.h * np.array(grid.shape)
        offsets = (offsets + 0.5 * period) % period - 0.5 * period
    rescaled = np.sqrt(spec.N) * offsets
    phase = np.exp(1j * spec.N * (offsets @ np.asarray(spec.alpha)))
    return phase * spec.eta.evaluate(rescaled)


def dirichlet_data(spec: ProbeSpec, grid: TangentialGrid | None = None) -> BoundaryData:
    """phi_N = c_bar_s e^{i N alpha.(x - x0)} eta(sqrt(N)(x - x0))."""
    if spec.mode is not ProbeMode.DIRICHLET:
        raise DomainError("dirichlet_data needs a Dirichlet probe", module="ansatz")
    if grid is None:
        grid = aligned_grid(spec.x0, spec.N, spec.eta)
    _check_resolution(grid, spec)
    c_bar = 2.0 ** (spec.s.s - 1.0) * special.gamma(spec.s.s)
    values = c_bar * _sample(spec, grid)
    return BoundaryData(
        field=values,
        grid=grid,
        support_radius=spec.support_radius,
        mean=complex(grid.integrate(values)),
        kind=ProbeMode.DIRICHLET,
        N=spec.N,
        x0=spec.x0,
        alpha=spec.alpha,
        metadata={"cutoff": spec.eta.kind.value, "epsilon": spec.eta.epsilon, "c_bar_s": c_bar},
    )


def neumann_data(spec: ProbeSpec, grid: TangentialGrid | None = None) -> BoundaryData:
    """f_N = e^{i N alpha.(x - x0)} eta(sqrt(N)(x - x0)), required to have zero mean."""
    if spec.mode is not ProbeMode.NEUMANN:
        raise DomainError("neumann_data needs a Neumann probe", module="ansatz")
    if grid is None:
        grid = aligned_grid(spec.x0, spec.N, spec.eta)
    _check_resolution(grid, spec)
    values = _sample(spec, grid)
    mean = complex(grid.integrate(values))
    l1 = grid.norm_l1(values)
    if abs(mean) > MEAN_ZERO_TOL * l1:
        raise AdmissibilityError(
            "Neumann datum has nonzero mean, N is not admissible",
            N=spec.N,
            relative_mean=abs(mean) / l1,
            nearest_admissible=nearest_admissible(spec.eta, spec.alpha, spec.N),
        )
    return BoundaryData(
        field=values,
        grid=grid,
        support_radius=spec.support_radius,
        mean=mean,
        kind=ProbeMode.NEUMANN,
        N=spec.N,
        x0=spec.x0,
        alpha=spec.alpha,
        metadata={"cutoff": spec.eta.kind.value, "epsilon": spec.eta.epsilon},
    )
