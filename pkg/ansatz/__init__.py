"""Probe boundary data and approximate oscillatory solutions."""

from .cutoff import CutoffProfile, make_cutoff, normal_cutoff
from .data import (
    BoundaryData,
    ProbeSpec,
    admissible_frequencies,
    aligned_grid,
    dirichlet_data,
    nearest_admissible,
    neumann_data,
    unit_direction,
)
from .taylor import TaylorJet, drift_field, taylor_jet
from .hierarchy import (
    AnsatzPairing,
    AnsatzSolution,
    AnsatzTerm,
    ansatz_pairing,
    ansatz_residual,
    build_ansatz,
    pairing_decomposition,
    profile_chain,
)

__all__ = [
    "AnsatzPairing",
    "AnsatzSolution",
    "AnsatzTerm",
    "BoundaryData",
    "CutoffProfile",
    "ProbeSpec",
    "TaylorJet",
    "admissible_frequencies",
    "aligned_grid",
    "ansatz_pairing",
    "ansatz_residual",
    "build_ansatz",
    "dirichlet_data",
    "drift_field",
    "make_cutoff",
    "nearest_admissible",
    "neumann_data",
    "normal_cutoff",
    "pairing_decomposition",
    "profile_chain",
    "taylor_jet",
    "unit_direction",
]
