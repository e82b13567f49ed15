import numpy as np
import pytest

from ansatz.data import ProbeSpec
from core.specfun import limit_constants
from core.types import PairingMode, ProbeMode
from reconstruct.probe import default_cutoff
from reconstruct.stability import coefficient_gap, stability_gap
from reconstruct.tensor import polarization_directions
from solver.grid import ResolutionSpec


def _probes(frequencies=(32.0,)):
    eta = default_cutoff(PairingMode.DTN, 2)
    return [
        ProbeSpec(0.5, (0.0, 0.0), tuple(alpha), N, ProbeMode.DIRICHLET, 1, eta)
        for N in frequencies
        for alpha in polarization_directions(2).values()
    ]


def test_coefficient_gap(identity_field, diagonal_field):
    assert coefficient_gap(identity_field, diagonal_field, [0.0, 0.0]) == pytest.approx(3.0)
    assert coefficient_gap(identity_field, identity_field, np.zeros((4, 2))) == 0.0


def test_identical_fields_agree_exactly(diagonal_field):
    report = stability_gap(diagonal_field, diagonal_field, None, 0.5, _probes())
    assert report.exact_equality
    assert report.ratio is None
    assert report.gap_proxy == 0.0
    assert len(report.probes) == 3
    assert report.as_dict()["exact_equality"] is True


def test_ratio_is_stable_under_scaling(identity_field):
    ratios = []
    for delta in (0.05, 0.1, 0.2):
        report = stability_gap(identity_field, identity_field.scaled(1.0 + delta), None, 0.5, _probes(), threads=2)
        assert report.coefficient_gap == pytest.approx(delta)
        assert all(p.pairing2 > p.pairing1 for p in report.probes)
        ratios.append(report.ratio)
    assert max(ratios) / min(ratios) - 1.0 <= 0.25


@pytest.mark.slow
def test_ratio_on_the_finite_element_grid(bump_field):
    ratios = []
    for delta in (0.05, 0.1, 0.2):
        report = stability_gap(bump_field, bump_field.scaled(1.0 + delta), ResolutionSpec(normal_nodes=48), 0.5,
                               _probes((16.0,)))
        ratios.append(report.ratio)
    assert max(ratios) / min(ratios) - 1.0 <= 0.25


def test_gap_proxy_is_the_largest_normalized_scaled_gap(identity_field):
    report = stability_gap(identity_field, identity_field.scaled(1.1), None, 0.5, _probes())
    assert report.gap_proxy == pytest.approx(max(p.scaled_gap / p.mass for p in report.probes))
    for p in report.probes:
        # Dirichlet data carry the factor c_bar_s
        assert p.mass == pytest.approx(limit_constants(0.5).c_bar_s**2, rel=5e-2)
        assert p.operator_gap > 0.0
    row = report.as_dict()["probes"][0]
    assert row["normalized_gap"] == pytest.approx(row["scaled_gap"] / row["mass"])


def test_gap_proxy_follows_the_pairing_scaling(identity_field):
    # gamma -> lambda gamma multiplies the constant-field pairing by lambda^s
    normalized = []
    for delta in (0.05, 0.1, 0.2):
        report = stability_gap(identity_field, identity_field.scaled(1.0 + delta), None, 0.5, _probes())
        normalized.append(report.gap_proxy / ((1.0 + delta) ** 0.5 - 1.0))
    assert normalized[1] == pytest.approx(normalized[0], rel=1e-9)
    assert normalized[2] == pytest.approx(normalized[0], rel=1e-9)
