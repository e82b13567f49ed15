"""
Conductivity fields gamma(x) (SPD, tangential block) and c(x) > 0.

A field is either built from callables or from a ``FieldSpec`` that names an
analytic family:

* ``constant``: gamma = scale * gamma0, c = c0
* ``bump``: gamma = scale * (gamma0 + amplitude * bump(|x - center| / width) * direction)
* ``metric``: a metric g(x) of the bump form, with gamma = g^{-1} and
  c = c0 * sqrt(det g), the weighted geometric setting

where bump(r) = exp(1 - 1 / (1 - r^2)) for r < 1, so bump(0) = 1.
"""

import hashlib
import json
import tomllib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Literal

import numpy as np
from numpy.typing import ArrayLike
from pydantic import BaseModel, ConfigDict, ValidationError, model_validator

from core.errors import ConfigError, DomainError
from logger import get_logger

log = get_logger(__name__)

_SPOT_CHECK_POINTS = 64


def bump(r: np.ndarray) -> np.ndarray:
    r = np.asarray(r, float)
    out = np.zeros_like(r)
    inside = r < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - r[inside] ** 2))
    return out


def _matrix(rows: list[list[float]] | None, n: int, default: np.ndarray) -> np.ndarray:
    if rows is None:
        return default
    m = np.asarray(rows, float)
    if m.shape != (n, n):
        raise ValueError(f"matrix must be {n} x {n}, got shape {m.shape}")
    if not np.allclose(m, m.T, rtol=0.0, atol=1e-12):
        raise ValueError("matrix must be symmetric")
    return m


class FieldSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    family: Literal["constant", "bump", "metric"] = "constant"
    n: int = 2
    gamma: list[list[float]] | None = None  # gamma0, identity when omitted
    amplitude: float = 0.0
    width: float = 0.5
    center: list[float] | None = None
    direction: list[list[float]] | None = None
    metric: list[list[float]] | None = None  # base metric of the metric family
    c: float = 1.0
    scale: float = 1.0

    @model_validator(mode="after")
    def _check(self) -> "FieldSpec":
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.c <= 0.0 or self.scale <= 0.0:
            raise ValueError("c and scale must be positive")
        if self.width <= 0.0:
            raise ValueError("bump width must be positive")
        if self.center is not None and len(self.center) != self.n:
            raise ValueError(f"center must have {self.n} entries")
        base = self.base_matrix()
        if np.min(np.linalg.eigvalsh(base)) <= 0.0:
            raise ValueError("base matrix must be positive definite")
        _matrix(self.direction, self.n, np.zeros((self.n, self.n)))
        if self.family == "constant" and self.amplitude != 0.0:
            raise ValueError("the constant family takes no bump amplitude")
        if self.family == "metric" and self.gamma is not None:
            raise ValueError("the metric family is given by 'metric', not 'gamma'")
        if self.family != "metric" and self.metric is not None:
            raise ValueError("'metric' is only used by the metric family")
        return self

    def base_matrix(self) -> np.ndarray:
        rows = self.metric if self.family == "metric" else self.gamma
        return _matrix(rows, self.n, np.eye(self.n))

    def direction_matrix(self) -> np.ndarray:
        return _matrix(self.direction, self.n, np.eye(self.n))

    def center_point(self) -> np.ndarray:
        return np.zeros(self.n) if self.center is None else np.asarray(self.center, float)

    def canonical_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))

    def digest(self) -> str:
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()

    def scaled(self, factor: float) -> "FieldSpec":
        return self.model_copy(update={"scale": self.scale * factor})


@dataclass(frozen=True, eq=False)
class ConductivityField:
    n: int
    gamma_fn: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    c_fn: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    bounds: tuple[float, float]  # C1 |xi|^2 <= xi.gamma xi <= C2 |xi|^2
    c_bounds: tuple[float, float]
    is_constant: bool = False
    smoothness: int = 6
    spec: FieldSpec | None = None
    label: str = "custom"

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("dimension must be positive", module="extsolver")
        if not 0.0 < self.bounds[0] <= self.bounds[1]:
            raise DomainError("ellipticity bounds must satisfy 0 < C1 <= C2", module="extsolver",
                              bounds=self.bounds)
        if not 0.0 < self.c_bounds[0] <= self.c_bounds[1]:
            raise DomainError("c bounds must satisfy 0 < c1 <= c2", module="extsolver", c_bounds=self.c_bounds)

    def gamma(self, x: ArrayLike) -> np.ndarray:
        """gamma at points of shape (..., n), returns (..., n, n)."""
        x = np.asarray(x, float)
        return np.asarray(self.gamma_fn(x), float).reshape(*x.shape[:-1], self.n, self.n)

    def c(self, x: ArrayLike) -> np.ndarray:
        x = np.asarray(x, float)
        return np.broadcast_to(np.asarray(self.c_fn(x), float), x.shape[:-1]).copy()

    def weighted_tensor(self, x: ArrayLike, s: float) -> np.ndarray:
        """B = c^{1/s} gamma, the tensor seen by the weighted limits."""
        return self.c(x)[..., None, None] ** (1.0 / s) * self.gamma(x)

    def quadratic_form(self, x0: ArrayLike, alpha: ArrayLike) -> float:
        alpha = np.asarray(alpha, float)
        return float(alpha @ self.gamma(np.asarray(x0, float)[None, :])[0] @ alpha)

    @property
    def C1(self) -> float:
        return self.bounds[0]

    @property
    def C2(self) -> float:
        return self.bounds[1]

    @property
    def digest(self) -> str:
        return self.spec.digest() if self.spec is not None else "custom"

    def constant_coefficients(self) -> tuple[np.ndarray, float]:
        if not self.is_constant:
            raise DomainError("field is not constant", module="extsolver")
        x = np.zeros((1, self.n))
        return self.gamma(x)[0], float(self.c(x)[0])

    def check(self, points: ArrayLike | None = None, seed: int = 0) -> None:
        """Spot-check symmetry, ellipticity and the bounds of c."""
        if points is None:
            rng = np.random.default_rng(seed)
            points = rng.uniform(-1.0, 1.0, size=(_SPOT_CHECK_POINTS, self.n))
        x = np.asarray(points, float).reshape(-1, self.n)
        g = self.gamma(x)
        asym = np.max(np.abs(g - np.swapaxes(g, -1, -2)))
        if asym > 1e-12:
            raise DomainError("gamma is not symmetric", module="extsolver", asymmetry=float(asym))
        eig = np.linalg.eigvalsh(g)
        tol = 1e-10 * self.C2
        if np.min(eig) < self.C1 - tol or np.max(eig) > self.C2 + tol:
            raise DomainError("gamma violates its ellipticity bounds", module="extsolver",
                              min_eig=float(np.min(eig)), max_eig=float(np.max(eig)), bounds=self.bounds)
        cv = self.c(x)
        if np.min(cv) < self.c_bounds[0] * (1 - 1e-12) or np.max(cv) > self.c_bounds[1] * (1 + 1e-12):
            raise DomainError("c violates its bounds", module="extsolver", c_bounds=self.c_bounds)

    @classmethod
    def constant(cls, gamma0: ArrayLike, c0: float = 1.0) -> "ConductivityField":
        g = np.asarray(gamma0, float)
        n = g.shape[0]
        if g.shape != (n, n) or np.linalg.norm(g - g.T) > 1e-12 * max(1.0, np.linalg.norm(g)):
            raise DomainError("gamma0 must be a symmetric matrix", module="extsolver")
        eig = np.linalg.eigvalsh(g)
        if eig[0] <= 0.0:
            raise DomainError("gamma0 must be positive definite", module="extsolver")
        if not c0 > 0.0:
            raise DomainError("c0 must be positive", module="extsolver")
        return cls(
            n=n,
            gamma_fn=lambda x: np.broadcast_to(g, (*np.shape(x)[:-1], n, n)),
            c_fn=lambda x: np.full(np.shape(x)[:-1], float(c0)),
            bounds=(float(eig[0]), float(eig[-1])),
            c_bounds=(float(c0), float(c0)),
            is_constant=True,
            label="constant",
        )

    @classmethod
    def from_spec(cls, spec: FieldSpec) -> "ConductivityField":
        n = spec.n
        base = spec.base_matrix()
        direction = spec.direction_matrix()
        center = spec.center_point()
        constant = spec.family == "constant" or spec.amplitude == 0.0

        def profile(x: np.ndarray) -> np.ndarray:
            return bump(np.linalg.norm(x - center, axis=-1) / spec.width)

        def matrix(x: np.ndarray) -> np.ndarray:
            x = np.asarray(x, float)
            return base + spec.amplitude * profile(x)[..., None, None] * direction

        # extreme eigenvalues of base + t * amplitude * direction are attained at t in {0, 1}
        ends = [np.linalg.eigvalsh(base), np.linalg.eigvalsh(base + spec.amplitude * direction)]
        lo = min(e[0] for e in ends)
        hi = max(e[-1] for e in ends)
        if lo <= 0.0:
            raise ConfigError("field family is not positive definite over the bump", lo=float(lo))

        if spec.family == "metric":

            def gamma_fn(x):
                return spec.scale * np.linalg.inv(matrix(x))

            def c_fn(x):
                return spec.c * np.sqrt(np.linalg.det(matrix(x)))

            # eigenvalues of g stay in [lo, hi], so det g stays in [lo^n, hi^n]
            c_lo = spec.c * np.sqrt(lo**n)
            c_hi = spec.c * np.sqrt(hi**n)
            bounds = (spec.scale / hi, spec.scale / lo)
        else:

            def gamma_fn(x):
                return spec.scale * matrix(x)

            def c_fn(x):
                return np.full(np.shape(x)[:-1], spec.c)

            c_lo = c_hi = spec.c
            bounds = (spec.scale * lo, spec.scale * hi)

        if constant:
            g0 = gamma_fn(center[None, :])[0]
            c0 = float(c_fn(center[None, :])[0])
            built = cls.constant(g0, c0)
            return cls(
                n=n, gamma_fn=built.gamma_fn, c_fn=built.c_fn, bounds=built.bounds, c_bounds=built.c_bounds,
                is_constant=True, spec=spec, label=spec.family,
            )
        return cls(
            n=n, gamma_fn=gamma_fn, c_fn=c_fn, bounds=(float(bounds[0]), float(bounds[1])),
            c_bounds=(float(c_lo), float(c_hi)), is_constant=False, spec=spec, label=spec.family,
        )

    def scaled(self, factor: float) -> "ConductivityField":
        """gamma -> factor * gamma with c unchanged."""
        if not factor > 0.0:
            raise DomainError("scale factor must be positive", module="extsolver")
        if self.spec is not None:
            return ConductivityField.from_spec(self.spec.scaled(factor))
        return ConductivityField(
            n=self.n,
            gamma_fn=lambda x: factor * self.gamma_fn(x),
            c_fn=self.c_fn,
            bounds=(factor * self.C1, factor * self.C2),
            c_bounds=self.c_bounds,
            is_constant=self.is_constant,
            smoothness=self.smoothness,
            label=f"{self.label}*{factor:g}",
        )


def load_field(path: str | Path) -> ConductivityField:
    """Read a FieldSpec from a TOML or JSON file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read field spec {path}: {exc}") from exc
    try:
        raw = json.loads(text) if path.suffix == ".json" else tomllib.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    raw = raw.get("field", raw)
    try:
        spec = FieldSpec.model_validate(raw)
    except ValidationError as exc:
        first = exc.errors()[0]
        where = ".".join(str(p) for p in first["loc"]) or "field"
        raise ConfigError(f"{path}: field.{where}: {first['msg']}") from exc
    return ConductivityField.from_spec(spec)
