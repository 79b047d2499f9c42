from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .dwt import check_sample_indices
from .errors import DataError, DimensionError


@dataclass
class MeasurementSet:
    """Samples of a signal on its dyadic grid.

    ``indices`` are flat (row-major) grid positions and ``values`` holds one
    row per sample, with ``k`` columns for multiple measurement vectors.
    """

    shape: tuple
    indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.shape = tuple(int(s) for s in self.shape)
        self.indices = check_sample_indices(self.indices, int(np.prod(self.shape)))
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape[0] != self.indices.size:
            raise DimensionError(
                f"{self.values.shape[0]} values for {self.indices.size} sample positions"
            )
        if not np.all(np.isfinite(self.values)):
            raise DataError("measurement values must be finite")

    @property
    def m(self) -> int:
        return self.indices.size

    @property
    def grid_size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def k(self) -> int:
        return 1 if self.values.ndim == 1 else self.values.shape[1]

    @property
    def normalized(self) -> np.ndarray:
        """``f / sqrt(m)``, the right-hand side of the least-squares term."""
        return self.values / math.sqrt(self.m)

    @classmethod
    def from_signal(cls, signal, indices, ndim: int | None = None) -> "MeasurementSet":
        x = np.asarray(signal, dtype=float)
        ndim = x.ndim if ndim is None else ndim
        shape = x.shape[:ndim]
        flat = x.reshape((int(np.prod(shape)),) + x.shape[ndim:])
        idx = check_sample_indices(indices, flat.shape[0])
        return cls(shape, idx, flat[idx])

    def column(self, i: int) -> "MeasurementSet":
        if self.values.ndim == 1:
            if i != 0:
                raise DimensionError("single-vector measurement set has only column 0")
            return self
        return MeasurementSet(self.shape, self.indices, self.values[:, i])
