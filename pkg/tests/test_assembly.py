import numpy as np
import pytest
from scipy import sparse

from solver.assembly import apply_operator, normal_matrices, tangential_matrices
from solver.grid import ResolutionSpec, build_domain, periodic_domain

SMALL = ResolutionSpec(normal_nodes=48)


@pytest.fixture
def grid():
    return periodic_domain(np.zeros(2), 2 * np.pi, 8, 4.0, 0.3, SMALL)


def test_tangential_matrices_on_a_torus(grid, bump_field):
    tm = tangential_matrices(grid, bump_field.gamma, bump_field.c)
    ones = np.ones(tm.size)
    assert tm.mass.sum() == pytest.approx((2 * np.pi) ** 2)
    assert tm.stiffness @ ones == pytest.approx(np.zeros(tm.size), abs=1e-12)
    assert abs(tm.stiffness - tm.stiffness.T).max() < 1e-14
    assert np.all(np.linalg.eigvalsh(tm.stiffness.toarray()) > -1e-12)


def test_blended_mass_in_one_dimension():
    grid = periodic_domain(np.zeros(1), 1.0, 10, 1.0, 0.5, SMALL)
    tm = tangential_matrices(grid, lambda x: np.ones((*x.shape[:-1], 1, 1)), lambda x: np.ones(x.shape[:-1]))
    h = 0.1
    mass = tm.mass.toarray()
    assert mass[3, 3] == pytest.approx(5 * h / 6)
    assert mass[3, 4] == pytest.approx(h / 12)
    assert tm.stiffness.toarray()[3, 3] == pytest.approx(2 / h)


def test_normal_matrices(grid):
    nm = normal_matrices(grid)
    assert nm.stiffness @ np.ones(grid.normal_count) == pytest.approx(np.zeros(grid.normal_count), abs=1e-10)
    assert nm.mass.sum() == pytest.approx(grid.depth**1.4 / 1.4)
    # the weighted mass integrates z exactly
    assert grid.z @ nm.mass @ np.ones(grid.normal_count) == pytest.approx(grid.depth**2.4 / 2.4)


def test_apply_matches_kronecker_form(grid, identity_field, rng):
    tm = tangential_matrices(grid, identity_field.gamma, identity_field.c)
    nm = normal_matrices(grid)
    U = rng.standard_normal((tm.size, grid.normal_count))
    A = sparse.kron(tm.stiffness, nm.mass) + sparse.kron(tm.mass_c, nm.stiffness)
    assert apply_operator(tm, nm, U).ravel() == pytest.approx(A @ U.ravel())


def test_dirichlet_walls_are_removed(identity_field):
    grid = build_domain(identity_field, 16.0, ResolutionSpec(normal_nodes=48))
    tm = tangential_matrices(grid, identity_field.gamma, identity_field.c)
    m = grid.tangential.shape[0]
    assert tm.size == (m - 2) ** 2
