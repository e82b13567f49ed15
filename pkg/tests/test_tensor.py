import numpy as np
import pytest

from core.errors import DomainError
from core.specfun import limit_constants
from core.types import PairingMode
from reconstruct.tensor import (
    analytic_q_values,
    assemble_tensor,
    assemble_tensor_lstsq,
    polarization_directions,
    quadratic_form_from_limit,
    reconstruct_point,
    recover_metric_from_weighted,
    weighted_tensor_from_metric,
)
from solver.field import ConductivityField
from solver.grid import ResolutionSpec
from tests.conftest import random_spd


@pytest.mark.parametrize("s", [0.3, 0.5, 0.7])
def test_metric_round_trip(rng, s):
    for _ in range(100):
        g = random_spd(rng)
        recovered = recover_metric_from_weighted(weighted_tensor_from_metric(g, s), s)
        np.testing.assert_allclose(recovered, g, rtol=1e-10, atol=1e-10 * np.abs(g).max())


def test_metric_recovery_rejects_degenerate_cases():
    with pytest.raises(DomainError):
        recover_metric_from_weighted(np.diag([1.0, -1.0]), 0.5)
    with pytest.raises(DomainError):
        recover_metric_from_weighted(np.array([[2.0]]), 0.5)  # n = 2s
    with pytest.raises(DomainError):
        weighted_tensor_from_metric([[1.0, 2.0], [0.0, 1.0]], 0.5)


def test_polarization_is_exact(rng):
    for n in (2, 3):
        for _ in range(100):
            G = random_spd(rng, n)
            tensor = assemble_tensor(np.zeros(n), analytic_q_values(G))
            np.testing.assert_allclose(tensor.matrix, G, rtol=0.0, atol=1e-13 * np.abs(G).max())
            assert tensor.spd
            assert max(abs(r) for r in tensor.residuals.values()) < 1e-12 * np.abs(G).max()


def test_polarization_labels():
    directions = polarization_directions(3)
    assert list(directions) == ["e1", "e2", "e3", "e1+e2", "e1+e3", "e2+e3"]
    assert np.linalg.norm(directions["e2+e3"]) == pytest.approx(1.0)


def test_least_squares_with_extra_directions(rng):
    G = random_spd(rng)
    directions = [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, -1.0], [2.0, 1.0]]
    tensor = assemble_tensor_lstsq([0.0, 0.0], analytic_q_values(G, directions))
    np.testing.assert_allclose(tensor.matrix, G, atol=1e-12 * np.abs(G).max())
    assert tensor.method == "least_squares"
    with pytest.raises(DomainError):
        assemble_tensor_lstsq([0.0, 0.0], analytic_q_values(G, directions[:2]))


def test_assembly_errors():
    with pytest.raises(DomainError, match="missing"):
        assemble_tensor([0.0, 0.0], {"e1": 1.0, "e2": 1.0})
    with pytest.raises(DomainError, match="positive"):
        assemble_tensor([0.0, 0.0], {"e1": 1.0, "e2": -1.0, "e1+e2": 1.0})
    with pytest.raises(DomainError):
        assemble_tensor([0.0, 0.0], {"e1": 1.0, "e2": 1.0, "e3": 1.0})
    with pytest.raises(DomainError):
        assemble_tensor([0.0, 0.0], {(1.0, 1.0): 1.0, "e1": 1.0, "e2": 1.0})


def test_quadratic_form_from_limit():
    constants = limit_constants(0.3)
    q = 2.7
    dtn = constants.c_sum * q**0.3
    ntd = constants.c_sum / constants.c_hat_s**2 * q**-0.3
    assert quadratic_form_from_limit(dtn, 0.3, PairingMode.DTN, constants) == pytest.approx(q, rel=1e-12)
    assert quadratic_form_from_limit(ntd, 0.3, "ntd", constants) == pytest.approx(q, rel=1e-12)
    with pytest.raises(DomainError):
        quadratic_form_from_limit(0.0, 0.3, "dtn", constants)
    with pytest.raises(DomainError):
        quadratic_form_from_limit(dtn, 0.5, "dtn", constants)


def test_fast_path_reconstruction_of_a_constant_tensor(rng):
    G = random_spd(rng, low=0.5, high=2.0)
    field_ = ConductivityField.constant(G)
    result = reconstruct_point(field_, None, 0.5, [0.0, 0.0], "dtn", (16.0, 32.0, 64.0),
                               constants=limit_constants(0.5), recover_metric=True)
    assert len(result.series) == 3
    error = np.max(np.abs(result.tensor.matrix - G)) / np.max(np.abs(G))
    assert error <= 0.05
    assert result.metric is not None


@pytest.mark.slow
def test_variable_tensor_at_the_bump_center(bump_field):
    truth = bump_field.weighted_tensor(np.zeros((1, 2)), 0.5)[0]
    assert truth == pytest.approx(np.array([[1.5, 0.15], [0.15, 1.25]]))
    result = reconstruct_point(bump_field, ResolutionSpec(), 0.5, [0.0, 0.0], "dtn", (16.0, 32.0, 64.0),
                               constants=limit_constants(0.5), threads=3)
    error = np.max(np.abs(result.tensor.matrix - truth)) / np.max(np.abs(truth))
    assert error <= 0.05
    assert result.tensor.spd
