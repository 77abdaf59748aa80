"""Discretized image domain.

Fields are plain numpy arrays. Internally every field is viewed as a 3D
array with unused trailing extents of 1, which lets one set of stencil
kernels serve 1D, 2D, and 3D problems; gradients along unit extents are
identically zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Lattice:
    dims: tuple[int, ...]

    def __post_init__(self):
        if not 1 <= len(self.dims) <= 3:
            raise ValueError("lattice must be 1-3 dimensional")
        if any(int(d) < 1 for d in self.dims):
            raise ValueError(f"non-positive lattice extent in {self.dims}")
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))

    @property
    def n_voxels(self) -> int:
        return int(np.prod(self.dims))

    @property
    def shape3(self) -> tuple[int, int, int]:
        return tuple(self.dims) + (1,) * (3 - len(self.dims))

    @property
    def ndim_effective(self) -> int:
        """Number of axes along which gradients can be nonzero."""
        return max(1, sum(1 for d in self.dims if d > 1))

    def as_field(self, values) -> np.ndarray:
        """Validate and reshape `values` to the padded 3D field layout."""
        arr = np.ascontiguousarray(values, dtype=np.float64)
        if arr.size != self.n_voxels:
            raise ValueError(f"field has {arr.size} values, lattice has {self.n_voxels}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("field contains non-finite values")
        return arr.reshape(self.shape3)

    def zeros(self) -> np.ndarray:
        return np.zeros(self.shape3)

    def zeros_vector(self) -> np.ndarray:
        return np.zeros((3,) + self.shape3)
