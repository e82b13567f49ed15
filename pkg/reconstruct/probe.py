"""
Probe families and extrapolation of the scaled pairings.

For Dirichlet probes the pairing grows like N^{2s - n/2}, for Neumann probes
it decays like N^{-2s - n/2}; the rescaled sequences converge to the limits
(c1 + c2) q^s and c_hat^{-2} (c1 + c2) q^{-s} with q = c^{1/s} alpha.gamma alpha.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ansatz.cutoff import CutoffProfile, make_cutoff
from ansatz.data import BoundaryData, ProbeSpec, admissible_frequencies, dirichlet_data, nearest_admissible, neumann_data
from core.constants import (
    CUTOFF_EPSILON_DEFAULT,
    DEFAULT_DEPTH_DIRICHLET,
    DEFAULT_DEPTH_NEUMANN,
    DEFAULT_FIT_POWERS,
    MIN_POINTS_PER_WAVELENGTH,
    MONOTONE_TOL,
    HALF_FIT_POWERS,
)
from core.errors import DomainError, ExtrapolationError, ResolutionError
from core.specfun import LimitConstants, limit_constants
from core.types import CutoffKind, Order, PairingMode, ProbeMode
from logger import get_logger, log_probe_event
from solver.extension import dtn_pairing, ntd_pairing
from solver.field import ConductivityField
from solver.grid import ResolutionSpec, WeightedGrid, build_domain

log = get_logger(__name__)

GridChoice = WeightedGrid | ResolutionSpec | None


@dataclass(frozen=True)
class FitResult:
    """Least-squares fit of scaled(N) by a + sum_p b_p N^{-p}."""

    powers: tuple[float, ...]
    limit: float
    slopes: tuple[float, ...]
    residual: float  # relative rms misfit

    def predict(self, N: float | np.ndarray) -> np.ndarray:
        N = np.asarray(N, float)
        return self.limit + sum(b * N ** (-p) for b, p in zip(self.slopes, self.powers))

    def as_dict(self) -> dict:
        return {"powers": list(self.powers), "limit": self.limit, "slopes": list(self.slopes),
                "residual": self.residual}


def fit_limit(schedule: Sequence[float], values: Sequence[float], powers: Sequence[float] = DEFAULT_FIT_POWERS) -> FitResult:
    N = np.asarray(schedule, float)
    y = np.asarray(values, float)
    powers = tuple(float(p) for p in powers)
    if N.size != y.size:
        raise DomainError("schedule and values differ in length", module="reconstruct")
    if N.size < len(powers) + 1:
        raise DomainError("not enough schedule points for the fit model", module="reconstruct",
                          points=N.size, parameters=len(powers) + 1)
    if not np.all(np.isfinite(y)):
        raise ExtrapolationError("scaled pairings are not finite", module="reconstruct")
    design = np.column_stack([np.ones_like(N)] + [N ** (-p) for p in powers])
    coeffs, *_ = np.linalg.lstsq(design, y, rcond=None)
    misfit = y - design @ coeffs
    scale = max(abs(coeffs[0]), np.max(np.abs(y)), 1e-300)
    residual = float(np.sqrt(np.mean(misfit**2)) / scale)
    return FitResult(powers=powers, limit=float(coeffs[0]), slopes=tuple(float(b) for b in coeffs[1:]),
                     residual=residual)


def scaling_exponent(mode: PairingMode, s: float, n: int) -> float:
    return (-2.0 * s if mode is PairingMode.DTN else 2.0 * s) + n / 2.0


def expected_limit(mode: PairingMode, constants: LimitConstants, q: float) -> float:
    """Limit of the scaled pairing for the weighted quadratic form value q."""
    s = constants.s
    if mode is PairingMode.DTN:
        return constants.c_sum * q**s
    return constants.c_sum / constants.c_hat_s**2 * q ** (-s)


@dataclass(frozen=True, eq=False)
class PairingSeries:
    mode: PairingMode
    alpha: tuple[float, ...]
    x0: tuple[float, ...]
    s: float
    n: int
    schedule: tuple[float, ...]
    raw: tuple[float, ...]
    scaled: tuple[float, ...]
    fit: FitResult
    fit_half: FitResult
    monotone: bool
    cutoff: str
    frequency_cap: float | None = None
    target: float | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def limit(self) -> float:
        return self.fit.limit

    def rows(self) -> list[dict]:
        return [
            {
                "mode": self.mode.value,
                "alpha": " ".join(f"{a:.12g}" for a in self.alpha),
                "N": N,
                "raw": raw,
                "scaled": scaled,
                "fit": float(self.fit.predict(N)),
            }
            for N, raw, scaled in zip(self.schedule, self.raw, self.scaled)
        ]


def default_cutoff(mode: PairingMode, n: int, epsilon: float = CUTOFF_EPSILON_DEFAULT,
                   kind: CutoffKind | str | None = None) -> CutoffProfile:
    if kind is None:
        kind = CutoffKind.RADIAL_BUMP if mode is PairingMode.DTN else CutoffKind.MOLLIFIED_BOX
    return make_cutoff(kind, epsilon, n=n)


def admissible_schedule(eta: CutoffProfile, alpha: Sequence[float], targets: Sequence[float], minimum: int = 3) -> list[float]:
    """Admissible frequencies nearest to ``targets``, deduplicated and padded to ``minimum`` entries."""
    chosen = sorted({round(nearest_admissible(eta, alpha, float(N)), 9) for N in targets})
    chosen = [N for N in chosen if np.isfinite(N)]
    if len(chosen) < minimum:
        start = chosen[-1] * (1.0 + 1e-9) if chosen else 1.0
        chosen += admissible_frequencies(eta, alpha, minimum - len(chosen), N_min=start)
    if len(chosen) < minimum:
        raise DomainError("not enough admissible frequencies for the schedule", module="reconstruct",
                          found=chosen)
    return chosen


def _check_schedule(schedule: Sequence[float]) -> tuple[float, ...]:
    out = tuple(float(N) for N in schedule)
    if len(out) < 3:
        raise DomainError("schedule needs at least 3 frequencies", module="reconstruct", schedule=out)
    if any(b <= a for a, b in zip(out, out[1:])):
        raise DomainError("schedule must be strictly increasing", module="reconstruct", schedule=out)
    return out


def frequency_cap(grid: GridChoice) -> float | None:
    """Largest N with at least the minimum number of points per wavelength."""
    if isinstance(grid, WeightedGrid):
        return 2.0 * np.pi / (MIN_POINTS_PER_WAVELENGTH * grid.h)
    return None


def probe_data(field_: ConductivityField, grid: GridChoice, probe: ProbeSpec,
               fields: Sequence[ConductivityField] = ()) -> tuple[BoundaryData, WeightedGrid | None]:
    """
    Sample the probe datum and pick the solver grid.

    ``None`` keeps the aligned periodic box of the spectral fast path; a
    ResolutionSpec builds a domain for this frequency alone, sized for the
    least elliptic of ``field_`` and ``fields``.
    """
    if isinstance(grid, ResolutionSpec):
        sizing = min((field_, *fields), key=lambda f: f.C1)
        grid = build_domain(sizing, probe.N, grid, probe.s, N_min=probe.N, center=probe.x0,
                            alignment=probe.eta.scale)
    tangential = grid.tangential if isinstance(grid, WeightedGrid) else None
    make = dirichlet_data if probe.mode is ProbeMode.DIRICHLET else neumann_data
    return make(probe, tangential), grid


def probe_pairing(field_: ConductivityField, grid: WeightedGrid | None, probe: ProbeSpec, data: BoundaryData) -> float:
    if probe.mode is ProbeMode.DIRICHLET:
        return dtn_pairing(field_, grid, probe.s, data)
    return ntd_pairing(field_, grid, probe.s, data)


def _is_monotone(values: np.ndarray) -> bool:
    steps = np.diff(values) / max(np.max(np.abs(values)), 1e-300)
    return bool(np.all(steps >= -MONOTONE_TOL) or np.all(steps <= MONOTONE_TOL))


def _analytic_target(field_: ConductivityField, mode: PairingMode, constants: LimitConstants,
                     x0: np.ndarray, alpha: np.ndarray) -> float | None:
    if not field_.is_constant:
        return None
    B = field_.weighted_tensor(x0[None, :], constants.s)[0]
    return expected_limit(mode, constants, float(alpha @ B @ alpha))


def probe_direction(
    field_: ConductivityField,
    grid: GridChoice,
    s: Order | float,
    x0: Sequence[float],
    alpha: Sequence[float],
    schedule: Sequence[float],
    mode: PairingMode | str,
    *,
    cutoff: CutoffProfile | None = None,
    depth_k: int | None = None,
    fit_powers: Sequence[float] = DEFAULT_FIT_POWERS,
    threads: int = 1,
) -> PairingSeries:
    """
    Run the probe family along ``alpha`` at ``x0`` over ``schedule``.

    ``grid`` is a fixed WeightedGrid, a ResolutionSpec (one domain per
    frequency), or None for the spectral fast path on constant fields.
    """
    order = Order.of(s)
    mode = PairingMode(mode)
    x0 = np.asarray(x0, float)
    alpha = np.asarray(alpha, float)
    n = field_.n
    if x0.shape != (n,) or alpha.shape != (n,):
        raise DomainError("x0 and alpha must match the field dimension", module="reconstruct")
    schedule = _check_schedule(schedule)
    eta = cutoff or default_cutoff(mode, n)
    if depth_k is None:
        depth_k = DEFAULT_DEPTH_DIRICHLET if mode is PairingMode.DTN else DEFAULT_DEPTH_NEUMANN

    cap = frequency_cap(grid)
    if cap is not None and schedule[-1] > cap:
        raise ResolutionError("schedule exceeds the grid's frequency cap", module="reconstruct",
                              N_max=schedule[-1], cap=cap)

    base = ProbeSpec(order, tuple(x0), tuple(alpha), schedule[0], mode.boundary, depth_k, eta)

    def one(N: float) -> float:
        probe = base.with_frequency(N)
        data, solver_grid = probe_data(field_, grid, probe)
        value = probe_pairing(field_, solver_grid, probe, data)
        log.debug(f"{mode.value} probe N={N:g}: pairing={value:.12g}")
        return value

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        raw = np.array(list(pool.map(one, schedule)))

    N = np.asarray(schedule)
    scaled = raw * N ** scaling_exponent(mode, order.s, n)
    fit = fit_limit(N, scaled, fit_powers)
    fit_half = fit_limit(N, scaled, HALF_FIT_POWERS)
    monotone = _is_monotone(scaled)
    constants = limit_constants(order)
    target = _analytic_target(field_, mode, constants, x0, alpha)
    diagnostics = {"fit_residual": fit.residual, "fit_half_limit": fit_half.limit}
    if not monotone:
        diagnostics["non_monotone"] = scaled.tolist()
        log_probe_event(log, "scaled pairings are not monotone, the grid may be under-resolved", "WARNING",
                        mode=mode.value, alpha=alpha.tolist(), scaled=scaled.tolist())
    if fit.limit <= 0.0:
        raise ExtrapolationError("extrapolated limit is not positive", module="reconstruct", limit=fit.limit,
                                 scaled=scaled.tolist())
    if target is not None:
        diagnostics["relative_error"] = abs(fit.limit - target) / target
    log_probe_event(log, f"{mode.value} alpha={np.round(alpha, 6).tolist()} limit={fit.limit:.8g}", "INFO",
                    target=target, schedule=list(schedule))
    return PairingSeries(
        mode=mode, alpha=tuple(alpha.tolist()), x0=tuple(x0.tolist()), s=order.s, n=n,
        schedule=schedule, raw=tuple(raw.tolist()), scaled=tuple(scaled.tolist()), fit=fit, fit_half=fit_half,
        monotone=monotone, cutoff=eta.kind.value, frequency_cap=cap, target=target, diagnostics=diagnostics,
    )
