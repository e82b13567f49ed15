import numpy as np
import pytest

from core.errors import DomainError, ExtrapolationError, ResolutionError
from core.specfun import limit_constants
from ansatz.data import ProbeSpec
from core.types import PairingMode, ProbeMode
from reconstruct.probe import (
    _check_schedule,
    admissible_schedule,
    expected_limit,
    fit_limit,
    probe_data,
    probe_direction,
    scaling_exponent,
)
from reconstruct.tensor import quadratic_form_from_limit
from solver.field import ConductivityField
from solver.grid import ResolutionSpec, build_domain

SCHEDULE = (16.0, 32.0, 64.0)


def test_fit_recovers_affine_model():
    N = np.array([16.0, 32.0, 64.0, 128.0])
    fit = fit_limit(N, 2.5 - 3.0 / N)
    assert fit.limit == pytest.approx(2.5, rel=1e-12)
    assert fit.slopes == pytest.approx((-3.0,), rel=1e-10)
    assert fit.residual < 1e-12
    assert fit.predict(1e12) == pytest.approx(2.5)


def test_fit_rejects_bad_input():
    with pytest.raises(DomainError):
        fit_limit([16.0, 32.0], [1.0, 2.0], powers=(1.0, 2.0))
    with pytest.raises(DomainError):
        fit_limit([16.0, 32.0, 64.0], [1.0, 2.0])
    with pytest.raises(ExtrapolationError):
        fit_limit([16.0, 32.0, 64.0], [1.0, np.nan, 2.0])


def test_scaling_and_limits():
    assert scaling_exponent(PairingMode.DTN, 0.5, 2) == 0.0
    assert scaling_exponent(PairingMode.NTD, 0.3, 2) == pytest.approx(1.6)
    constants = limit_constants(0.5)
    assert expected_limit(PairingMode.DTN, constants, 4.0) == pytest.approx(2.0 * constants.c_sum)
    assert expected_limit(PairingMode.NTD, constants, 4.0) == pytest.approx(
        constants.c_sum / constants.c_hat_s**2 / 2.0
    )


def test_schedule_checks(box_cutoff):
    with pytest.raises(DomainError):
        _check_schedule([16.0, 32.0])
    with pytest.raises(DomainError):
        _check_schedule([16.0, 64.0, 32.0])
    chosen = admissible_schedule(box_cutoff, [1.0, 0.0], SCHEDULE)
    assert chosen == pytest.approx([4 * np.pi**2, 16 * np.pi**2, 36 * np.pi**2], rel=1e-8)


@pytest.mark.parametrize("gamma0, factor, tol", [(np.eye(2), 1.0, 0.02), (np.diag([4.0, 1.0]), 2.0, 0.03)])
def test_fast_path_dtn_limit(gamma0, factor, tol):
    field_ = ConductivityField.constant(gamma0)
    series = probe_direction(field_, None, 0.5, [0.0, 0.0], [1.0, 0.0], SCHEDULE, "dtn")
    c_sum = limit_constants(0.5).c_sum
    assert series.target == pytest.approx(factor * c_sum)
    assert series.limit == pytest.approx(factor * c_sum, rel=tol)
    assert len(series.rows()) == 3
    assert series.frequency_cap is None
    assert series.cutoff == "radial_bump"


@pytest.mark.parametrize("gamma0, q", [(np.eye(2), 1.0), (np.diag([4.0, 1.0]), 4.0)])
def test_fast_path_ntd_limit(box_cutoff, gamma0, q):
    field_ = ConductivityField.constant(gamma0)
    schedule = admissible_schedule(box_cutoff, [1.0, 0.0], SCHEDULE)
    series = probe_direction(field_, None, 0.5, [0.0, 0.0], [1.0, 0.0], schedule, "ntd", cutoff=box_cutoff)
    constants = limit_constants(0.5)
    expected = constants.c_sum / constants.c_hat_s**2 * q**-0.5
    assert series.limit == pytest.approx(expected, rel=0.05)
    assert series.diagnostics["relative_error"] <= 0.05


def test_probe_input_checks(identity_field):
    with pytest.raises(DomainError):
        probe_direction(identity_field, None, 0.5, [0.0], [1.0, 0.0], SCHEDULE, "dtn")
    grid = build_domain(identity_field, 16.0, ResolutionSpec(normal_nodes=48), 0.5, N_min=16.0)
    with pytest.raises(ResolutionError):
        probe_direction(identity_field, grid, 0.5, [0.0, 0.0], [1.0, 0.0], (16.0, 32.0, 1.0e4), "dtn")


def _q_from_fast_series(field_, mode, schedule, **kwargs):
    series = probe_direction(field_, None, 0.5, [0.0, 0.0], [1.0, 0.0], schedule, mode, fit_powers=(1.0, 2.0),
                             **kwargs)
    return quadratic_form_from_limit(series.limit, 0.5, mode, limit_constants(0.5)), series


@pytest.mark.parametrize("gamma0", [np.eye(2), np.diag([4.0, 1.0]), np.array([[2.0, 0.5], [0.5, 1.0]])])
def test_dtn_and_ntd_recover_the_same_quadratic_form(box_cutoff, gamma0):
    field_ = ConductivityField.constant(gamma0)
    q_dtn, _ = _q_from_fast_series(field_, "dtn", SCHEDULE)
    schedule = admissible_schedule(box_cutoff, [1.0, 0.0], SCHEDULE)
    q_ntd, _ = _q_from_fast_series(field_, "ntd", schedule, cutoff=box_cutoff)
    assert q_ntd == pytest.approx(q_dtn, rel=0.05)
    assert q_dtn == pytest.approx(gamma0[0, 0], rel=0.05)


def test_weight_enters_through_its_1_over_s_power():
    field_ = ConductivityField.constant(np.diag([4.0, 1.0]), c0=2.0)
    q, series = _q_from_fast_series(field_, "dtn", SCHEDULE)
    # c^{1/s} alpha.gamma alpha = 2^2 * 4
    assert q == pytest.approx(16.0, rel=0.05)
    assert series.target == pytest.approx(expected_limit(PairingMode.DTN, limit_constants(0.5), 16.0))


def test_limit_grows_with_the_conductivity_along_alpha():
    limits = [
        _q_from_fast_series(ConductivityField.constant(np.diag([lam, 1.0])), "dtn", SCHEDULE)[0]
        for lam in (1.0, 2.0, 4.0)
    ]
    assert limits[0] < limits[1] < limits[2]
    assert limits == pytest.approx([1.0, 2.0, 4.0], rel=0.05)


def test_boundary_data_ignore_the_conductivity(identity_field, bump_field, radial_cutoff, box_cutoff):
    dirichlet = ProbeSpec(0.5, (0.0, 0.0), (1.0, 0.0), 32.0, ProbeMode.DIRICHLET, 1, radial_cutoff)
    N = admissible_schedule(box_cutoff, [1.0, 0.0], SCHEDULE)[0]
    neumann = ProbeSpec(0.5, (0.0, 0.0), (1.0, 0.0), N, ProbeMode.NEUMANN, 0, box_cutoff)
    grid = build_domain(identity_field, 32.0, ResolutionSpec(normal_nodes=48), 0.5, N_min=32.0, center=(0.0, 0.0),
                        alignment=radial_cutoff.scale)
    for spec, solver_grid in ((dirichlet, None), (neumann, None), (dirichlet, grid)):
        first, _ = probe_data(identity_field, solver_grid, spec)
        second, _ = probe_data(bump_field, solver_grid, spec)
        assert np.array_equal(first.field, second.field)
        assert first.grid.shape == second.grid.shape
