"""Binary multi-field volume files.

Layout (little-endian): magic "DAGMF1", three uint32 extents (unused
trailing extents written as 1), uint32 field count, one uint32 label id
per field, then float32 payload, field-major and row-major within each
field.
"""

from __future__ import annotations

import struct

import numpy as np

from dagmf.lattice import Lattice

MAGIC = b"DAGMF1"


class VolumeFormatError(ValueError):
    """Malformed or truncated volume file."""


def write_volume(path, lattice: Lattice, fields: dict[int, np.ndarray]) -> None:
    """Write fields (label id -> array over the lattice) in given order."""
    dims3 = lattice.shape3
    payload = []
    for lid, arr in fields.items():
        a = np.ascontiguousarray(arr, dtype=np.float32).ravel()
        if a.size != lattice.n_voxels:
            raise VolumeFormatError(f"field {lid} has {a.size} values, "
                                    f"lattice has {lattice.n_voxels}")
        if not np.all(np.isfinite(a)):
            raise VolumeFormatError(f"field {lid} contains non-finite values")
        if not 0 <= lid < 2**32:
            raise VolumeFormatError(f"label id {lid} not representable as uint32")
        payload.append(a)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<3I", *dims3))
        fh.write(struct.pack("<I", len(fields)))
        for lid in fields:
            fh.write(struct.pack("<I", lid))
        for a in payload:
            fh.write(a.astype("<f4").tobytes())


def read_volume(path) -> tuple[Lattice, dict[int, np.ndarray]]:
    """Read a volume file; returns (lattice, label id -> float32 array).

    Trailing unit extents are trimmed from the lattice dimensions; arrays
    come back shaped to the lattice.
    """
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:6] != MAGIC:
        raise VolumeFormatError(f"bad magic {blob[:6]!r}, expected {MAGIC!r}")
    header = struct.calcsize("<3II")
    if len(blob) < 6 + header:
        raise VolumeFormatError("truncated header")
    nx, ny, nz, count = struct.unpack_from("<3II", blob, 6)
    off = 6 + header
    if len(blob) < off + 4 * count:
        raise VolumeFormatError("truncated field id table")
    ids = struct.unpack_from(f"<{count}I", blob, off) if count else ()
    if len(set(ids)) != count:
        raise VolumeFormatError("duplicate field label ids")
    off += 4 * count
    dims = (nx, ny, nz)
    while len(dims) > 1 and dims[-1] == 1:
        dims = dims[:-1]
    lattice = Lattice(dims)
    n = lattice.n_voxels
    expect = count * n * 4
    if len(blob) - off != expect:
        raise VolumeFormatError(f"payload is {len(blob) - off} bytes, "
                                f"expected {expect} ({count} fields x {n} voxels)")
    fields: dict[int, np.ndarray] = {}
    for i, lid in enumerate(ids):
        a = np.frombuffer(blob, dtype="<f4", count=n, offset=off + i * n * 4)
        if not np.all(np.isfinite(a)):
            raise VolumeFormatError(f"field {lid} contains non-finite values")
        fields[int(lid)] = a.reshape(lattice.dims).copy()
    return lattice, fields
