"""Empirical stability constant between two conductivities."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ansatz.data import ProbeSpec
from core.types import Order, PairingMode, ProbeMode
from logger import get_logger, log_probe_event
from solver.field import ConductivityField
from solver.fourier import hs_proxy_norm_sq

from .probe import GridChoice, probe_data, probe_pairing, scaling_exponent

log = get_logger(__name__)


@dataclass(frozen=True)
class ProbeGap:
    x0: tuple[float, ...]
    alpha: tuple[float, ...]
    N: float
    mode: str
    pairing1: float
    pairing2: float
    scaled_gap: float  # N^{-2s+n/2} |p1 - p2| (dtn) or N^{2s+n/2} |p1 - p2| (ntd)
    hs_norm_sq: float
    coefficient_gap: float  # max entrywise |gamma1 - gamma2| at x0
    mass: float  # N^{n/2} ||phi||_{L2}^2, independent of N

    @property
    def normalized_gap(self) -> float:
        return self.scaled_gap / self.mass if self.mass > 0 else 0.0

    @property
    def operator_gap(self) -> float:
        return abs(self.pairing1 - self.pairing2) / self.hs_norm_sq if self.hs_norm_sq > 0 else 0.0


@dataclass(frozen=True, eq=False)
class GapReport:
    s: float
    gap_proxy: float
    coefficient_gap: float
    ratio: float | None
    exact_equality: bool
    probes: tuple[ProbeGap, ...] = field(repr=False)

    def as_dict(self) -> dict:
        return {
            "s": self.s,
            "gap_proxy": self.gap_proxy,
            "coefficient_gap": self.coefficient_gap,
            "ratio": self.ratio,
            "exact_equality": self.exact_equality,
            "probes": [
                {
                    "x0": list(p.x0), "alpha": list(p.alpha), "N": p.N, "mode": p.mode,
                    "pairing1": p.pairing1, "pairing2": p.pairing2, "scaled_gap": p.scaled_gap,
                    "normalized_gap": p.normalized_gap, "mass": p.mass, "operator_gap": p.operator_gap,
                    "coefficient_gap": p.coefficient_gap,
                }
                for p in self.probes
            ],
        }


def coefficient_gap(field1: ConductivityField, field2: ConductivityField, x: np.ndarray) -> float:
    x = np.atleast_2d(np.asarray(x, float))
    return float(np.max(np.abs(field1.gamma(x) - field2.gamma(x))))


def stability_gap(
    field1: ConductivityField,
    field2: ConductivityField,
    grid: GridChoice,
    s: Order | float,
    probe_set: Sequence[ProbeSpec],
    *,
    threads: int = 1,
) -> GapReport:
    """
    Compare the probe pairings of two fields on a shared grid and probe set.

    The operator-gap proxy is the largest frequency-scaled pairing gap
    N^{-2s+n/2} |p1 - p2| (N^{2s+n/2} for ntd) divided by the scaled data
    mass N^{n/2} ||phi||_{L2}^2. The coefficient gap is max |gamma1 - gamma2|
    at the probe centers and their ratio is the empirical stability constant.
    The unscaled |p1 - p2| / ||phi||_{H^s}^2 is kept per probe as
    ``operator_gap``.
    """
    order = Order.of(s)

    def one(probe: ProbeSpec) -> ProbeGap:
        data, solver_grid = probe_data(field1, grid, probe, fields=(field2,))
        p1 = probe_pairing(field1, solver_grid, probe, data)
        p2 = probe_pairing(field2, solver_grid, probe, data)
        mode = PairingMode.DTN if probe.mode is ProbeMode.DIRICHLET else PairingMode.NTD
        scale = probe.N ** scaling_exponent(mode, order.s, probe.n)
        return ProbeGap(
            x0=probe.x0, alpha=probe.alpha, N=probe.N, mode=mode.value, pairing1=p1, pairing2=p2,
            scaled_gap=scale * abs(p1 - p2), hs_norm_sq=hs_proxy_norm_sq(data, order),
            coefficient_gap=coefficient_gap(field1, field2, np.asarray(probe.x0)),
            mass=probe.N ** (probe.n / 2.0) * data.l2_norm**2,
        )

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        gaps = tuple(pool.map(one, probe_set))

    proxy = max((g.normalized_gap for g in gaps), default=0.0)
    coeff = max((g.coefficient_gap for g in gaps), default=0.0)
    exact = proxy == 0.0
    ratio = None if exact else coeff / proxy
    if exact:
        log_probe_event(log, "pairings agree exactly on the probe set", "INFO", probes=len(gaps))
    else:
        log_probe_event(log, f"stability ratio {ratio:.6g}", "INFO", gap_proxy=proxy, coefficient_gap=coeff)
    return GapReport(s=order.s, gap_proxy=proxy, coefficient_gap=coeff, ratio=ratio, exact_equality=exact,
                     probes=gaps)
