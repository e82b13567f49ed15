"""Forward solver for the weighted extension problem and its boundary pairings."""

from .field import ConductivityField, FieldSpec, bump, load_field
from .grid import ResolutionSpec, WeightedGrid, build_domain, normal_nodes, periodic_domain
from .assembly import NormalMatrices, TangentialMatrices, normal_matrices, tangential_matrices
from .fourier import (
    ReferenceSolution,
    dtn_symbol,
    fast_dtn_pairing,
    fast_ntd_pairing,
    fourier_reference,
    hs_proxy_norm_sq,
    spectral_coefficients,
)
from .extension import (
    DiscreteOperator,
    ExtensionSolution,
    discrete_operator,
    dtn_pairing,
    ntd_pairing,
    solve_dirichlet,
    solve_neumann,
)
from .snapshot import Snapshot, load_snapshot, save_snapshot

__all__ = [
    "ConductivityField",
    "DiscreteOperator",
    "ExtensionSolution",
    "FieldSpec",
    "NormalMatrices",
    "ReferenceSolution",
    "ResolutionSpec",
    "Snapshot",
    "TangentialMatrices",
    "WeightedGrid",
    "build_domain",
    "bump",
    "discrete_operator",
    "dtn_pairing",
    "dtn_symbol",
    "fast_dtn_pairing",
    "fast_ntd_pairing",
    "fourier_reference",
    "hs_proxy_norm_sq",
    "load_field",
    "load_snapshot",
    "normal_matrices",
    "normal_nodes",
    "ntd_pairing",
    "periodic_domain",
    "save_snapshot",
    "solve_dirichlet",
    "solve_neumann",
    "spectral_coefficients",
    "tangential_matrices",
]
