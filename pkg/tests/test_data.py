import numpy as np
import pytest

from ansatz.data import (
    BoundaryData,
    ProbeSpec,
    admissible_frequencies,
    aligned_grid,
    dirichlet_data,
    nearest_admissible,
    neumann_data,
    unit_direction,
)
from core.errors import AdmissibilityError, DomainError, ResolutionError
from core.types import ProbeMode, TangentialGrid

E1 = (1.0, 0.0)
DIAGONAL = unit_direction([1.0, 1.0])


def _probe(eta, N, mode=ProbeMode.NEUMANN, alpha=E1, s=0.5):
    return ProbeSpec(s, (0.0, 0.0), alpha, N, mode, 1, eta)


@pytest.mark.parametrize("alpha, factor", [(E1, 4.0), (DIAGONAL, 8.0)])
def test_admissible_frequencies_of_the_box(box_cutoff, alpha, factor):
    found = admissible_frequencies(box_cutoff, alpha, 3)
    expected = [factor * np.pi**2 * k**2 for k in (1, 2, 3)]
    assert found == pytest.approx(expected, rel=1e-10)


@pytest.mark.parametrize("alpha", [E1, DIAGONAL])
def test_admissible_neumann_data_has_zero_mean(box_cutoff, alpha):
    for N in admissible_frequencies(box_cutoff, alpha, 3):
        f = neumann_data(_probe(box_cutoff, N, alpha=alpha))
        assert abs(f.mean) <= 1e-10 * f.l1_norm


def test_non_admissible_frequency_is_rejected(box_cutoff):
    with pytest.raises(AdmissibilityError) as info:
        neumann_data(_probe(box_cutoff, 50.0))
    assert info.value.details["nearest_admissible"] == pytest.approx(4 * np.pi**2, rel=1e-10)
    assert nearest_admissible(box_cutoff, E1, 140.0) == pytest.approx(16 * np.pi**2, rel=1e-10)


def test_dirichlet_data_amplitude(radial_cutoff):
    spec = _probe(radial_cutoff, 64.0, mode=ProbeMode.DIRICHLET)
    phi = dirichlet_data(spec)
    c_bar = np.sqrt(np.pi / 2)
    assert phi.kind is ProbeMode.DIRICHLET
    assert np.max(np.abs(phi.field)) == pytest.approx(c_bar * radial_cutoff.bound, rel=1e-12)
    assert phi.support_radius == pytest.approx(64.0**-0.5)
    assert phi.metadata["cutoff"] == "radial_bump"


def test_mode_mismatch(radial_cutoff):
    with pytest.raises(DomainError):
        neumann_data(_probe(radial_cutoff, 64.0, mode=ProbeMode.DIRICHLET))
    with pytest.raises(DomainError):
        dirichlet_data(_probe(radial_cutoff, 64.0, mode=ProbeMode.NEUMANN))


def test_aligned_grid_spacing(box_cutoff):
    grid = aligned_grid((0.0, 0.0), 64.0, box_cutoff)
    K = box_cutoff.scale / (grid.h * 8.0)
    assert K == pytest.approx(round(K), abs=1e-9)
    assert grid.periodic


def test_coarse_grid_is_rejected(radial_cutoff):
    coarse = TangentialGrid.box([-1.0, -1.0], 8, 0.25)
    with pytest.raises(ResolutionError):
        dirichlet_data(_probe(radial_cutoff, 64.0, mode=ProbeMode.DIRICHLET), coarse)


def test_probe_spec_validation(box_cutoff):
    with pytest.raises(DomainError):
        ProbeSpec(0.5, (0.0, 0.0), (1.0, 1.0), 16.0, ProbeMode.DIRICHLET, 1, box_cutoff)
    with pytest.raises(DomainError):
        ProbeSpec(0.5, (0.0,), (1.0,), 16.0, ProbeMode.DIRICHLET, 1, box_cutoff)
    with pytest.raises(DomainError):
        unit_direction([0.0, 0.0])


def test_from_field_shape_check():
    grid = TangentialGrid.box([0.0, 0.0], 4, 0.5, periodic=True)
    with pytest.raises(DomainError):
        BoundaryData.from_field(np.zeros((5, 5)), grid, ProbeMode.DIRICHLET)
    data = BoundaryData.from_field(np.ones((4, 4)), grid, "dirichlet")
    assert data.mean == pytest.approx(4.0)
