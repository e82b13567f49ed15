import numpy as np
import pytest

from ansatz.data import BoundaryData
from core.errors import DomainError
from core.types import ProbeMode
from solver.extension import solve_dirichlet
from solver.grid import ResolutionSpec, periodic_domain
from solver.snapshot import MAGIC, load_snapshot, save_snapshot


@pytest.fixture
def solution(bump_field):
    grid = periodic_domain(np.zeros(2), 2 * np.pi, 8, 4.0, 0.5, ResolutionSpec(normal_nodes=48))
    phi = BoundaryData.from_field(np.exp(1j * grid.tangential.points()[..., 1]), grid.tangential,
                                  ProbeMode.DIRICHLET)
    return solve_dirichlet(bump_field, grid, 0.5, phi)


def test_save_and_load(solution, bump_spec, tmp_path):
    path = save_snapshot(solution, tmp_path / "u.extsnap")
    raw = path.read_bytes()
    assert raw.startswith(MAGIC)
    snap = load_snapshot(path)
    assert snap.values.shape == (8, 8, 48)
    assert np.array_equal(snap.values, solution.values)
    assert snap.trace == pytest.approx(solution.trace)
    assert snap.z == pytest.approx(solution.grid.z)
    assert snap.header["field_hash"] == bump_spec.digest()
    assert snap.header["kind"] == "dirichlet"
    assert snap.header["lateral"] == "periodic"
    assert snap.header["energy"] == solution.energy


def test_identical_solutions_give_identical_files(solution, tmp_path):
    a = save_snapshot(solution, tmp_path / "a.extsnap").read_bytes()
    b = save_snapshot(solution, tmp_path / "b.extsnap").read_bytes()
    assert a == b


def test_corrupt_files(solution, tmp_path):
    bad = tmp_path / "bad.extsnap"
    bad.write_bytes(b"NOTASNAP" + bytes(16))
    with pytest.raises(DomainError):
        load_snapshot(bad)
    path = save_snapshot(solution, tmp_path / "u.extsnap")
    path.write_bytes(path.read_bytes()[:-16])
    with pytest.raises(DomainError, match="payload"):
        load_snapshot(path)
