"""Limits of probe pairings, tensor and metric recovery, stability gaps."""

from .probe import (
    FitResult,
    PairingSeries,
    admissible_schedule,
    default_cutoff,
    expected_limit,
    fit_limit,
    probe_direction,
    scaling_exponent,
)
from .tensor import (
    PointReconstruction,
    RecoveredTensor,
    analytic_q_values,
    assemble_tensor,
    assemble_tensor_lstsq,
    polarization_directions,
    quadratic_form_from_limit,
    reconstruct_point,
    recover_metric_from_weighted,
    weighted_tensor_from_metric,
)
from .stability import GapReport, ProbeGap, stability_gap

__all__ = [
    "FitResult",
    "GapReport",
    "PairingSeries",
    "PointReconstruction",
    "ProbeGap",
    "RecoveredTensor",
    "admissible_schedule",
    "analytic_q_values",
    "assemble_tensor",
    "assemble_tensor_lstsq",
    "default_cutoff",
    "expected_limit",
    "fit_limit",
    "polarization_directions",
    "probe_direction",
    "quadratic_form_from_limit",
    "reconstruct_point",
    "recover_metric_from_weighted",
    "scaling_exponent",
    "stability_gap",
    "weighted_tensor_from_metric",
]
