"""Periodized orthonormal wavelet transforms on dyadic grids.

Coefficients are stored in pyramid order. For a 1D signal of length
``N = 2**J`` decomposed to ``depth`` levels the first ``2**(J - depth)``
entries are scaling coefficients and wavelet ``(j, k)`` sits at position
``2**j + k``. Images of size ``2**J x 2**J`` use the Mallat layout
(approximation block top-left, detail bands 1/2/3 to the right, below and
diagonal) flattened row-major, so a wavelet at ``(r, c)`` has its parent at
``(r // 2, c // 2)``.

Trailing axes beyond the signal dimensions are treated as a batch, which is
how multiple measurement vectors are carried through the transforms.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
import math
from typing import Iterator

import numpy as np

from .errors import DimensionError, ParameterError

__all__ = [
    "WaveletFamily",
    "get_family",
    "FAMILY_NAMES",
    "MultiIndex",
    "IndexMap",
    "CoefficientVector",
    "forward_dwt",
    "inverse_dwt",
    "wavedec",
    "waverec",
    "SubsampledWaveletOperator",
    "apply_measurement",
    "adjoint_measurement",
    "check_sample_indices",
]


_SQRT2 = math.sqrt(2.0)


def _db2_taps():
    r3 = math.sqrt(3.0)
    return [(1 + r3), (3 + r3), (3 - r3), (1 - r3)], 4 * _SQRT2


def _db3_taps():
    r10 = math.sqrt(10.0)
    q = math.sqrt(5 + 2 * r10)
    taps = [
        1 + r10 + q,
        5 + r10 + 3 * q,
        10 - 2 * r10 + 2 * q,
        10 - 2 * r10 - 2 * q,
        5 + r10 - 3 * q,
        1 + r10 - q,
    ]
    return taps, 16 * _SQRT2


def _coif1_taps():
    r7 = math.sqrt(7.0)
    taps = [1 - r7, 5 + r7, 14 + 2 * r7, 14 - 2 * r7, 1 - r7, -3 + r7]
    return taps, 16 * _SQRT2


def _haar_taps():
    return [1.0, 1.0], _SQRT2


_TAP_TABLE = {
    "haar": _haar_taps,
    "db2": _db2_taps,
    "db3": _db3_taps,
    "coif": _coif1_taps,
}

FAMILY_NAMES = tuple(_TAP_TABLE)


@dataclass(frozen=True)
class WaveletFamily:
    """Orthonormal two-channel filter bank.

    ``highpass`` follows the quadrature-mirror rule
    ``g[i] = (-1)**i * h[L - 1 - i]``.
    """

    name: str
    lowpass: tuple

    @property
    def highpass(self) -> tuple:
        h = self.lowpass
        n = len(h)
        return tuple(((-1) ** i) * h[n - 1 - i] for i in range(n))

    @property
    def length(self) -> int:
        return len(self.lowpass)

    def arrays(self):
        return np.asarray(self.lowpass, dtype=float), np.asarray(self.highpass, dtype=float)


@lru_cache(maxsize=None)
def get_family(name) -> WaveletFamily:
    """Look up a filter bank by name (``haar``, ``db2``, ``db3``, ``coif``)."""
    if isinstance(name, WaveletFamily):
        return name
    key = str(name).lower()
    if key in ("coif1", "coiflet"):
        key = "coif"
    if key in ("db1",):
        key = "haar"
    if key not in _TAP_TABLE:
        raise ParameterError(f"unknown wavelet family {name!r}; expected one of {FAMILY_NAMES}")
    taps, scale = _TAP_TABLE[key]()
    return WaveletFamily(key, tuple(t / scale for t in taps))


def _as_family(family) -> WaveletFamily:
    return family if isinstance(family, WaveletFamily) else get_family(family)


def _log2_exact(n: int) -> int:
    if n < 1 or n & (n - 1):
        raise DimensionError(f"length {n} is not a power of two")
    return n.bit_length() - 1


# ---------------------------------------------------------------------------
# one-level periodized filter bank along axis 0


@lru_cache(maxsize=None)
def _analysis_index(n: int, taps: int) -> np.ndarray:
    return (2 * np.arange(n // 2)[:, None] + np.arange(taps)[None, :]) % n


@lru_cache(maxsize=None)
def _synthesis_index(half: int, taps: int) -> np.ndarray:
    return (np.arange(half)[:, None] - np.arange(taps // 2)[None, :]) % half


def _analysis_step(x: np.ndarray, h: np.ndarray, g: np.ndarray):
    xg = x[_analysis_index(x.shape[0], h.size)]
    a = np.tensordot(h, xg, axes=([0], [1]))
    d = np.tensordot(g, xg, axes=([0], [1]))
    return a, d


def _synthesis_step(a: np.ndarray, d: np.ndarray, h: np.ndarray, g: np.ndarray) -> np.ndarray:
    half = a.shape[0]
    jdx = _synthesis_index(half, h.size)
    ag = a[jdx]
    dg = d[jdx]
    out = np.empty((2 * half,) + a.shape[1:], dtype=np.result_type(a, d))
    out[0::2] = np.tensordot(h[0::2], ag, axes=([0], [1])) + np.tensordot(g[0::2], dg, axes=([0], [1]))
    out[1::2] = np.tensordot(h[1::2], ag, axes=([0], [1])) + np.tensordot(g[1::2], dg, axes=([0], [1]))
    return out


def wavedec(x: np.ndarray, family, depth: int, ndim: int = 1) -> np.ndarray:
    """Pyramid-layout forward transform of the leading ``ndim`` axes of ``x``.

    Returns an array of the same shape as ``x``.
    """
    fam = _as_family(family)
    h, g = fam.arrays()
    out = np.array(x, dtype=float, copy=True)
    n = out.shape[0]
    for _ in range(depth):
        if ndim == 1:
            a, d = _analysis_step(out[:n], h, g)
            out[: n // 2] = a
            out[n // 2 : n] = d
        else:
            block = out[:n, :n]
            a, d = _analysis_step(block, h, g)
            block = np.concatenate([a, d], axis=0)
            bt = np.swapaxes(block, 0, 1)
            a, d = _analysis_step(bt, h, g)
            out[:n, :n] = np.swapaxes(np.concatenate([a, d], axis=0), 0, 1)
        n //= 2
    return out


def waverec(c: np.ndarray, family, depth: int, ndim: int = 1) -> np.ndarray:
    """Inverse of :func:`wavedec` (and its adjoint, the transform being orthogonal)."""
    fam = _as_family(family)
    h, g = fam.arrays()
    out = np.array(c, dtype=float, copy=True)
    n = out.shape[0] >> depth
    for _ in range(depth):
        if ndim == 1:
            out[: 2 * n] = _synthesis_step(out[:n], out[n : 2 * n], h, g)
        else:
            block = np.swapaxes(out[: 2 * n, : 2 * n], 0, 1)
            block = _synthesis_step(block[:n], block[n : 2 * n], h, g)
            block = np.swapaxes(block, 0, 1)
            out[: 2 * n, : 2 * n] = _synthesis_step(block[:n], block[n : 2 * n], h, g)
        n *= 2
    return out


# ---------------------------------------------------------------------------
# coefficient addressing


@dataclass(frozen=True, order=True)
class MultiIndex:
    """Address of one coefficient: kind, level ``j``, shift ``k`` and band."""

    kind: str
    level: int
    shift: tuple
    band: int = 0

    def __post_init__(self):
        if self.kind not in ("scaling", "wavelet"):
            raise ParameterError(f"kind must be 'scaling' or 'wavelet', got {self.kind!r}")
        if self.level < 0:
            raise ParameterError("level must be non-negative")
        shift = tuple(int(k) for k in self.shift)
        object.__setattr__(self, "shift", shift)
        if any(k < 0 or k >= (1 << self.level) for k in shift):
            raise ParameterError(f"shift {shift} outside [0, 2**{self.level})")
        if self.kind == "scaling" and self.band != 0:
            raise ParameterError("scaling indices use band 0")
        if self.kind == "wavelet":
            if len(shift) == 1 and self.band != 1:
                raise ParameterError("1D wavelet indices use band 1")
            if len(shift) == 2 and self.band not in (1, 2, 3):
                raise ParameterError("2D wavelet bands are 1, 2, 3")

    @property
    def d(self) -> int:
        return len(self.shift)

    @property
    def is_scaling(self) -> bool:
        return self.kind == "scaling"

    @classmethod
    def wavelet(cls, level: int, *shift: int, band: int = 1) -> "MultiIndex":
        return cls("wavelet", level, tuple(shift), band)

    @classmethod
    def scaling(cls, level: int, *shift: int) -> "MultiIndex":
        return cls("scaling", level, tuple(shift), 0)


@dataclass(frozen=True)
class IndexMap:
    """Bijection between :class:`MultiIndex` values and linear storage positions.

    Parameters
    ----------
    shape : tuple
        Signal shape, ``(2**J,)`` or ``(2**J, 2**J)``.
    depth : int
        Number of decomposition levels; the coarsest level is ``J - depth``.
    """

    shape: tuple
    depth: int
    _levels: np.ndarray = field(init=False, repr=False, compare=False)
    _scaling: np.ndarray = field(init=False, repr=False, compare=False)
    _parent: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        shape = tuple(int(s) for s in self.shape)
        object.__setattr__(self, "shape", shape)
        if len(shape) not in (1, 2):
            raise DimensionError("only 1D signals and 2D images are supported")
        if len(shape) == 2 and shape[0] != shape[1]:
            raise DimensionError(f"images must be square, got {shape}")
        J = _log2_exact(shape[0])
        if not 0 <= self.depth <= J:
            raise ParameterError(f"depth {self.depth} outside [0, {J}]")
        levels, scaling, parent = self._tables(shape, J, self.depth)
        for name, arr in (("_levels", levels), ("_scaling", scaling), ("_parent", parent)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @staticmethod
    def _tables(shape, J, depth):
        j0 = J - depth
        n = shape[0]
        if len(shape) == 1:
            pos = np.arange(n)
            scaling = pos < (1 << j0)
            levels = np.where(scaling, j0, np.floor(np.log2(np.maximum(pos, 1))).astype(int))
            parent = np.where(levels > j0, pos // 2, pos - (1 << j0))
        else:
            r, c = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
            mx = np.maximum(r, c)
            scaling = mx < (1 << j0)
            levels = np.where(scaling, j0, np.floor(np.log2(np.maximum(mx, 1))).astype(int))
            fine = levels > j0
            pr = np.where(fine, r // 2, r % (1 << j0))
            pc = np.where(fine, c // 2, c % (1 << j0))
            parent = (pr * n + pc).ravel()
            levels = levels.ravel()
            scaling = scaling.ravel()
        levels = levels.astype(int)
        parent = np.where(scaling, -1, parent).astype(int)
        return levels, scaling, parent

    @property
    def d(self) -> int:
        return len(self.shape)

    @property
    def J(self) -> int:
        return self.shape[0].bit_length() - 1

    @property
    def coarsest_level(self) -> int:
        return self.J - self.depth

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def levels(self) -> np.ndarray:
        """Level ``j`` of every stored coefficient."""
        return self._levels

    @property
    def is_scaling(self) -> np.ndarray:
        return self._scaling

    @property
    def parent_positions(self) -> np.ndarray:
        """Storage position of each coefficient's parent.

        Wavelets on the coarsest level point at the scaling coefficient with
        the same shift; scaling coefficients carry ``-1``.
        """
        return self._parent

    def __len__(self) -> int:
        return self.size

    def __iter__(self) -> Iterator[MultiIndex]:
        for p in range(self.size):
            yield self.index_of(p)

    def index_of(self, position: int) -> MultiIndex:
        p = int(position)
        if not 0 <= p < self.size:
            raise ParameterError(f"position {p} outside [0, {self.size})")
        j = int(self._levels[p])
        if self.d == 1:
            if self._scaling[p]:
                return MultiIndex("scaling", j, (p,), 0)
            return MultiIndex("wavelet", j, (p - (1 << j),), 1)
        n = self.shape[0]
        r, c = divmod(p, n)
        if self._scaling[p]:
            return MultiIndex("scaling", j, (r, c), 0)
        s = 1 << j
        band = 1 if r < s else (2 if c < s else 3)
        return MultiIndex("wavelet", j, (r % s, c % s), band)

    def position_of(self, nu: MultiIndex) -> int:
        j0 = self.coarsest_level
        if nu.d != self.d:
            raise DimensionError(f"index dimension {nu.d} does not match map dimension {self.d}")
        if nu.is_scaling:
            if nu.level != j0:
                raise ParameterError(f"scaling level must be {j0}, got {nu.level}")
            if self.d == 1:
                return nu.shift[0]
            return nu.shift[0] * self.shape[0] + nu.shift[1]
        if not j0 <= nu.level < self.J:
            raise ParameterError(f"wavelet level {nu.level} outside [{j0}, {self.J})")
        s = 1 << nu.level
        if self.d == 1:
            return s + nu.shift[0]
        r = nu.shift[0] + (s if nu.band in (2, 3) else 0)
        c = nu.shift[1] + (s if nu.band in (1, 3) else 0)
        return r * self.shape[0] + c


@dataclass
class CoefficientVector:
    """Flat coefficient storage (``N`` or ``N x k``) plus its index map."""

    values: np.ndarray
    index_map: IndexMap
    family: str

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape[0] != self.index_map.size:
            raise DimensionError(
                f"{self.values.shape[0]} coefficients do not match grid size {self.index_map.size}"
            )

    @property
    def levels(self) -> int:
        return self.index_map.J

    @property
    def grid_size(self) -> int:
        return self.index_map.size

    @property
    def depth(self) -> int:
        return self.index_map.depth

    def __getitem__(self, nu: MultiIndex):
        return self.values[self.index_map.position_of(nu)]

    def with_values(self, values) -> "CoefficientVector":
        return CoefficientVector(np.asarray(values, dtype=float), self.index_map, self.family)


def _resolve_ndim(signal: np.ndarray, ndim) -> int:
    if ndim is None:
        ndim = signal.ndim
    if ndim not in (1, 2) or signal.ndim < ndim:
        raise DimensionError(f"cannot treat an array of shape {signal.shape} as {ndim}-dimensional")
    return ndim


def forward_dwt(signal, family, depth: int | None = None, ndim: int | None = None) -> CoefficientVector:
    """Orthonormal periodized DWT.

    Parameters
    ----------
    signal : array_like
        Length ``2**J`` vector or ``2**J x 2**J`` image, optionally with
        trailing batch axes (pass ``ndim`` explicitly in that case).
    family : str or WaveletFamily
    depth : int, optional
        Decomposition depth, defaults to the full depth ``J``.
    """
    x = np.asarray(signal, dtype=float)
    ndim = _resolve_ndim(x, ndim)
    shape = x.shape[:ndim]
    J = _log2_exact(shape[0])
    if depth is None:
        depth = J
    if depth > J or depth < 0:
        raise ParameterError(f"depth {depth} exceeds log2 of the signal length ({J})")
    imap = IndexMap(shape, depth)
    fam = _as_family(family)
    c = wavedec(x, fam, depth, ndim)
    return CoefficientVector(c.reshape((imap.size,) + x.shape[ndim:]), imap, fam.name)


def inverse_dwt(coeffs: CoefficientVector, family=None) -> np.ndarray:
    """Invert :func:`forward_dwt`; returns an array of the original signal shape."""
    fam = _as_family(coeffs.family if family is None else family)
    if fam.name != _as_family(coeffs.family).name:
        raise ParameterError(f"coefficients were computed with {coeffs.family!r}, not {fam.name!r}")
    imap = coeffs.index_map
    vals = coeffs.values.reshape(imap.shape + coeffs.values.shape[1:])
    return waverec(vals, fam, imap.depth, imap.d)


# ---------------------------------------------------------------------------
# measurement operator


def check_sample_indices(sample_indices, grid_size: int, m: int | None = None) -> np.ndarray:
    idx = np.asarray(sample_indices)
    if idx.ndim != 1:
        raise DimensionError("sample indices must be a flat list of grid positions")
    if idx.size == 0:
        raise ParameterError("at least one sample is required")
    if not np.issubdtype(idx.dtype, np.integer):
        if not np.all(np.equal(np.mod(idx, 1), 0)):
            raise ParameterError("sample indices must be integers")
        idx = idx.astype(np.int64)
    if idx.min() < 0 or idx.max() >= grid_size:
        raise ParameterError(f"sample indices must lie in [0, {grid_size})")
    if np.unique(idx).size != idx.size:
        raise ParameterError("sample indices must be distinct")
    if m is not None and int(m) != idx.size:
        raise ParameterError(f"m = {m} does not match {idx.size} sample indices")
    return idx.astype(np.int64)


# dense caching threshold on the synthesis matrix (entries)
DENSE_LIMIT = 1 << 23


class SubsampledWaveletOperator:
    """The normalized sampling matrix ``A = S W^T / sqrt(m)``.

    ``W^T`` is wavelet synthesis and ``S`` keeps the sampled grid positions.
    For small grids the rows of ``A`` are materialized once and applied with
    BLAS; larger grids use the transforms directly.
    """

    def __init__(self, index_map: IndexMap, family, sample_indices, dense="auto"):
        self.index_map = index_map
        self.family = _as_family(family)
        self.sample_indices = check_sample_indices(sample_indices, index_map.size)
        self.m = self.sample_indices.size
        self.scale = 1.0 / math.sqrt(self.m)
        self.shape = (self.m, index_map.size)
        if dense == "auto":
            dense = self.m * index_map.size <= DENSE_LIMIT
        self._matrix = self._build_matrix() if dense else None

    @property
    def is_dense(self) -> bool:
        return self._matrix is not None

    def _synthesize(self, c: np.ndarray) -> np.ndarray:
        imap = self.index_map
        vals = c.reshape(imap.shape + c.shape[1:])
        x = waverec(vals, self.family, imap.depth, imap.d)
        return x.reshape((imap.size,) + c.shape[1:])

    def _analyze(self, x: np.ndarray) -> np.ndarray:
        imap = self.index_map
        vals = x.reshape(imap.shape + x.shape[1:])
        c = wavedec(vals, self.family, imap.depth, imap.d)
        return c.reshape((imap.size,) + x.shape[1:])

    def _build_matrix(self) -> np.ndarray:
        # rows of the synthesis matrix at the sample positions, via analysis of unit impulses
        n = self.index_map.size
        impulses = np.zeros((n, self.m))
        impulses[self.sample_indices, np.arange(self.m)] = 1.0
        return self.scale * self._analyze(impulses).T

    def matrix(self) -> np.ndarray:
        """Explicit ``m x N`` matrix."""
        if self._matrix is not None:
            return self._matrix.copy()
        return self._build_matrix()

    def forward(self, c: np.ndarray) -> np.ndarray:
        c = np.asarray(c, dtype=float)
        if self._matrix is not None:
            return self._matrix @ c
        return self.scale * self._synthesize(c)[self.sample_indices]

    def adjoint(self, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if self._matrix is not None:
            return self._matrix.T @ r
        x = np.zeros((self.index_map.size,) + r.shape[1:])
        x[self.sample_indices] = r
        return self.scale * self._analyze(x)


def apply_measurement(coeffs: CoefficientVector, sample_indices, m: int | None = None) -> np.ndarray:
    """Matrix-free ``A c``: the synthesized signal at the samples, scaled by ``1/sqrt(m)``."""
    idx = check_sample_indices(sample_indices, coeffs.grid_size, m)
    signal = inverse_dwt(coeffs)
    flat = signal.reshape((coeffs.grid_size,) + coeffs.values.shape[1:])
    return flat[idx] / math.sqrt(idx.size)


def adjoint_measurement(
    residual, sample_indices, m: int | None, index_map: IndexMap, family
) -> CoefficientVector:
    """Matrix-free ``A^T r`` returned as coefficients on ``index_map``."""
    idx = check_sample_indices(sample_indices, index_map.size, m)
    r = np.asarray(residual, dtype=float)
    if r.shape[0] != idx.size:
        raise DimensionError(f"residual length {r.shape[0]} does not match {idx.size} samples")
    fam = _as_family(family)
    x = np.zeros((index_map.size,) + r.shape[1:])
    x[idx] = r
    x = x.reshape(index_map.shape + r.shape[1:])
    c = wavedec(x, fam, index_map.depth, index_map.d) / math.sqrt(idx.size)
    return CoefficientVector(c.reshape((index_map.size,) + r.shape[1:]), index_map, fam.name)
