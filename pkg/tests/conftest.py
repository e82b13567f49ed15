import os
import tempfile

# file sinks are installed on import of the logger package
os.environ.setdefault("EXTPROBE_LOG_DIR", tempfile.mkdtemp(prefix="extprobe-logs-"))

import numpy as np  # noqa: E402
import pytest  # noqa: E402
from loguru import logger  # noqa: E402

from ansatz.cutoff import make_cutoff  # noqa: E402
from core.types import CutoffKind  # noqa: E402
from solver.field import ConductivityField, FieldSpec  # noqa: E402

BUMP_DIRECTION = [[1.0, 0.3], [0.3, 0.5]]


@pytest.fixture
def log_records():
    """Records emitted through loguru while the test runs."""
    records = []
    sink = logger.add(lambda message: records.append(message.record), level="DEBUG")
    yield records
    logger.remove(sink)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def identity_field():
    return ConductivityField.constant(np.eye(2))


@pytest.fixture
def diagonal_field():
    return ConductivityField.constant(np.diag([4.0, 1.0]))


@pytest.fixture
def bump_spec():
    return FieldSpec(family="bump", n=2, amplitude=0.5, width=0.5, direction=BUMP_DIRECTION)


@pytest.fixture
def bump_field(bump_spec):
    return ConductivityField.from_spec(bump_spec)


@pytest.fixture(scope="session")
def box_cutoff():
    return make_cutoff(CutoffKind.MOLLIFIED_BOX, 0.1, 2)


@pytest.fixture(scope="session")
def radial_cutoff():
    return make_cutoff(CutoffKind.RADIAL_BUMP, 0.1, 2)


def random_spd(rng, n=2, low=0.2, high=5.0):
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    return q @ np.diag(rng.uniform(low, high, n)) @ q.T
