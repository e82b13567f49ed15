"""
Binary snapshots of extension solutions.

Layout, all integers little-endian:

    bytes 0..8     magic b"EXTSNAP1\\n"
    bytes 9..16    uint64 header length L
    next L bytes   UTF-8 JSON header, keys sorted
    remainder      complex128 little-endian nodal values, row-major in
                   header["shape"] = [*tangential shape, normal nodes]

The header carries n, s, the tangential grid descriptor, the normal nodes
z, lateral condition, data kind, energy and the SHA-256 field hash.
"""

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from core.errors import DomainError
from logger import get_logger

from .extension import ExtensionSolution

log = get_logger(__name__)

MAGIC = b"EXTSNAP1\n"
FORMAT_VERSION = 1
_DTYPE = np.dtype("<c16")


@dataclass(frozen=True, eq=False)
class Snapshot:
    header: dict
    values: np.ndarray = field(repr=False)

    @property
    def z(self) -> np.ndarray:
        return np.asarray(self.header["z"], float)

    @property
    def trace(self) -> np.ndarray:
        return self.values[..., 0]


def snapshot_header(solution: ExtensionSolution) -> dict:
    grid = solution.grid
    return {
        "version": FORMAT_VERSION,
        "n": grid.n,
        "s": grid.s.s,
        "shape": list(grid.shape),
        "tangential": grid.tangential.describe(),
        "z": [float(z) for z in grid.z],
        "lateral": grid.lateral.value,
        "kind": solution.kind.value,
        "energy": solution.energy,
        "field_hash": solution.field_hash,
    }


def save_snapshot(solution: ExtensionSolution, path: str | Path) -> Path:
    path = Path(path)
    header = json.dumps(snapshot_header(solution), sort_keys=True, separators=(",", ":")).encode("utf-8")
    values = np.ascontiguousarray(solution.values, dtype=_DTYPE)
    with path.open("wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", len(header)))
        fh.write(header)
        fh.write(values.tobytes(order="C"))
    log.debug(f"snapshot {path.name}: {values.shape}, {path.stat().st_size} bytes")
    return path


def load_snapshot(path: str | Path) -> Snapshot:
    path = Path(path)
    raw = path.read_bytes()
    if not raw.startswith(MAGIC):
        raise DomainError(f"{path} is not a snapshot file", module="extsolver")
    offset = len(MAGIC)
    (length,) = struct.unpack_from("<Q", raw, offset)
    offset += 8
    header = json.loads(raw[offset:offset + length].decode("utf-8"))
    offset += length
    shape = tuple(header["shape"])
    expected = int(np.prod(shape)) * _DTYPE.itemsize
    if len(raw) - offset != expected:
        raise DomainError("snapshot payload does not match its header", module="extsolver",
                          expected=expected, found=len(raw) - offset)
    values = np.frombuffer(raw, dtype=_DTYPE, offset=offset).reshape(shape)
    return Snapshot(header=header, values=values.astype(complex))
