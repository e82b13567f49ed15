import numpy as np
import pytest

from core.errors import DomainError, ResolutionError
from core.types import LateralBC
from solver.grid import ResolutionSpec, build_domain, normal_nodes, periodic_domain


def test_default_domain_for_n64(identity_field):
    grid = build_domain(identity_field, 64.0)
    # h snapped to 1 / (8 K) below 2 pi / (16 * 64), box of 3 support radii rounded to 16 cells
    K = 1.0 / (8.0 * grid.h)
    assert K == pytest.approx(21.0)
    assert grid.tangential.shape == (129, 129)
    assert grid.normal_count == 96
    assert grid.depth == pytest.approx(6.0 / 64.0)
    assert grid.z[0] == 0.0 and grid.z[-1] == pytest.approx(grid.depth)
    assert grid.lateral is LateralBC.DIRICHLET_ZERO
    assert grid.memory_estimate_mb() < ResolutionSpec().memory_cap_mb


def test_domain_is_centered_and_aligned(diagonal_field):
    center = np.array([0.25, -0.5])
    grid = build_domain(diagonal_field, 32.0, center=center, alignment=0.9)
    mid = tuple(m // 2 for m in grid.tangential.shape)
    assert grid.tangential.points()[mid] == pytest.approx(center)
    K = 0.9 / (np.sqrt(32.0) * grid.h)
    assert K == pytest.approx(round(K), abs=1e-9)
    # depth follows the smallest ellipticity constant
    assert grid.depth == pytest.approx(6.0 / (1.0 * 32.0))


def test_wide_schedule_uses_smallest_frequency(identity_field):
    grid = build_domain(identity_field, 64.0, N_min=16.0)
    assert grid.half_width >= 3.0 / 4.0
    assert grid.depth == pytest.approx(6.0 / 16.0)


def test_graded_normal_nodes():
    z = normal_nodes(2.0, 11, 2.0)
    assert z == pytest.approx(2.0 * (np.arange(11) / 10.0) ** 2)


def test_weight_integrals_close_form(identity_field):
    grid = build_domain(identity_field, 16.0, s=0.3)
    assert grid.weight_integrals().sum() == pytest.approx(grid.depth**1.4 / 1.4)


def test_memory_cap(identity_field):
    spec = ResolutionSpec(memory_cap_mb=1.0)
    with pytest.raises(ResolutionError) as info:
        build_domain(identity_field, 64.0, spec)
    assert info.value.details["suggested_points_per_wavelength"] >= 8


def test_direct_solver_size_limit(identity_field):
    with pytest.raises(ResolutionError):
        build_domain(identity_field, 64.0, ResolutionSpec(method="direct"))


def test_bad_frequencies(identity_field):
    with pytest.raises(DomainError):
        build_domain(identity_field, 0.0)
    with pytest.raises(DomainError):
        build_domain(identity_field, 16.0, N_min=32.0)


def test_periodic_domain():
    grid = periodic_domain(np.zeros(2), 2 * np.pi, 16, 5.0, 0.5)
    assert grid.tangential.periodic
    assert grid.tangential.shape == (16, 16)
    assert grid.interior_tangential().all()
    assert grid.lateral is LateralBC.PERIODIC


def test_resolution_refinement():
    spec = ResolutionSpec().refined()
    assert spec.points_per_wavelength == 32
    assert spec.normal_nodes == 192
    with pytest.raises(ValueError):
        ResolutionSpec(points_per_wavelength=4)
