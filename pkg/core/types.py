"""Shared value types."""

from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .constants import ORDER_MARGIN
from .errors import DomainError


class ProbeMode(Enum):
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"


class PairingMode(Enum):
    DTN = "dtn"
    NTD = "ntd"

    @property
    def boundary(self) -> ProbeMode:
        return ProbeMode.DIRICHLET if self is PairingMode.DTN else ProbeMode.NEUMANN


class CutoffKind(Enum):
    MOLLIFIED_BOX = "mollified_box"
    RADIAL_BUMP = "radial_bump"


class LateralBC(Enum):
    DIRICHLET_ZERO = "dirichlet_zero"
    PERIODIC = "periodic"


class ProfileKind(Enum):
    EXTENDED = "extended"  # stores (At)^s w(At) directly
    BESSEL = "bessel"  # stores w, the t^s factor is implied


@dataclass(frozen=True)
class Order:
    s: float

    def __post_init__(self):
        s = float(self.s)
        if not np.isfinite(s) or s <= ORDER_MARGIN or s >= 1.0 - ORDER_MARGIN:
            raise DomainError(f"order s must lie in (0, 1), got {self.s}", module="specfun")
        object.__setattr__(self, "s", s)

    @classmethod
    def of(cls, value: "float | Order") -> "Order":
        return value if isinstance(value, Order) else cls(float(value))

    def __float__(self) -> float:
        return self.s


@dataclass(frozen=True, eq=False)
class TangentialGrid:
    """Uniform tensor grid on a box in R^n.

    For periodic grids the last node of each axis is dropped (it coincides
    with the first); otherwise both ends are nodes and carry zero data.
    """

    axes: tuple[np.ndarray, ...]
    h: float
    periodic: bool = False
    _points: np.ndarray | None = field(default=None, repr=False, compare=False)

    @classmethod
    def box(cls, lower: Sequence[float], cells: int, h: float, periodic: bool = False) -> "TangentialGrid":
        count = cells if periodic else cells + 1
        axes = tuple(np.asarray(a, float) + h * np.arange(count) for a in lower)
        return cls(axes=axes, h=float(h), periodic=periodic)

    @classmethod
    def centered(cls, center: Sequence[float], half_cells: int, h: float) -> "TangentialGrid":
        lower = [float(c) - half_cells * h for c in center]
        return cls.box(lower, 2 * half_cells, h)

    @property
    def n(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(a.size for a in self.axes)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def cell_volume(self) -> float:
        return self.h ** self.n

    @property
    def lower(self) -> np.ndarray:
        return np.array([a[0] for a in self.axes])

    @property
    def upper(self) -> np.ndarray:
        return np.array([a[-1] for a in self.axes])

    def points(self) -> np.ndarray:
        """Node coordinates, shape (*shape, n)."""
        if self._points is None:
            mesh = np.meshgrid(*self.axes, indexing="ij")
            object.__setattr__(self, "_points", np.stack(mesh, axis=-1))
        return self._points

    def integrate(self, values: np.ndarray) -> complex | float:
        # boundary nodes of non-periodic grids hold zero data, so the
        # trapezoidal rule reduces to a plain sum
        return np.sum(values) * self.cell_volume

    def norm_l2(self, values: np.ndarray) -> float:
        return float(np.sqrt(np.sum(np.abs(values) ** 2) * self.cell_volume))

    def norm_l1(self, values: np.ndarray) -> float:
        return float(np.sum(np.abs(values)) * self.cell_volume)

    def frequencies(self) -> tuple[np.ndarray, ...]:
        """Angular FFT frequencies per axis."""
        return tuple(2.0 * np.pi * np.fft.fftfreq(a.size, d=self.h) for a in self.axes)

    def describe(self) -> dict:
        return {
            "n": self.n,
            "h": self.h,
            "shape": list(self.shape),
            "lower": self.lower.tolist(),
            "periodic": self.periodic,
        }
