"""Haar convolutional framelets for 1D signals.

Atoms are ``phi_ij = G_i * Lbar_j / sqrt(l)`` where ``G`` is the length-``N``
Haar basis, ``L`` the length-``l`` Haar basis, ``Lbar_j`` the column ``L_j``
zero-padded to length ``N`` and ``*`` circular convolution. The family is a
Parseval frame, so analysis is the adjoint of synthesis and inverts it.

Analysis is computed through the patch matrix: ``<F, G_i * Lbar_j>`` equals
``(G^T P L)_ij`` where row ``k`` of ``P`` is the circular window of ``F``
starting at ``k``. The ``1/sqrt(l)`` atom normalization carries over, so
``framelet_analysis`` returns ``G^T P L / sqrt(l)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import logging
import math

import numpy as np

from .dwt import IndexMap, check_sample_indices, wavedec, waverec
from .errors import DimensionError, ParameterError, UnsupportedError
from .measurements import MeasurementSet
from .solver import SolveResult, SolverConfig, default_lambda, proximal_gradient

logger = logging.getLogger(__name__)


def _log2_exact(n: int, what: str) -> int:
    if n < 1 or n & (n - 1):
        raise ParameterError(f"{what} must be a power of two, got {n}")
    return n.bit_length() - 1


def circular_convolve(v, w) -> np.ndarray:
    """``out[k] = sum_p v[(k - p) mod N] w[p]``."""
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    if v.ndim != 1 or v.shape != w.shape:
        raise DimensionError(f"cannot convolve shapes {v.shape} and {w.shape}")
    out = np.zeros_like(v)
    for p in np.flatnonzero(w):
        out += w[p] * np.roll(v, p)
    return out


def build_patch_matrix(F, patch_len: int) -> np.ndarray:
    """``N x l`` matrix whose row ``k`` is ``F[k], F[k+1], ..., F[k+l-1]`` (indices mod N)."""
    F = np.asarray(F, dtype=float)
    if F.ndim != 1:
        raise DimensionError("patch matrices are built from 1D signals")
    n = F.size
    if not 1 <= patch_len <= n:
        raise ParameterError(f"patch length {patch_len} outside [1, {n}]")
    return np.stack([np.roll(F, -q) for q in range(patch_len)], axis=1)


def haar_matrix(n: int) -> np.ndarray:
    """Orthonormal Haar basis of length ``n`` as columns, in pyramid order."""
    J = _log2_exact(n, "basis length")
    return waverec(np.eye(n), "haar", J)


def haar_depths(n: int) -> np.ndarray:
    """Depth of each Haar column: 0 for the scaling column, ``j`` for level-``j`` wavelets."""
    J = _log2_exact(n, "basis length")
    return IndexMap((n,), J).levels.astype(int)


@dataclass(frozen=True)
class FrameletDictionary:
    """Haar global and local bases for signals of length ``signal_len``."""

    signal_len: int
    patch_len: int = 8
    basis: str = "haar"
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.basis != "haar":
            raise UnsupportedError(f"only Haar framelets are available, got {self.basis!r}")
        _log2_exact(self.signal_len, "signal length")
        _log2_exact(self.patch_len, "patch length")
        if self.patch_len > self.signal_len:
            raise ParameterError("patch length exceeds signal length")

    @property
    def global_depth(self) -> int:
        return self.signal_len.bit_length() - 1

    @property
    def shape(self) -> tuple:
        return (self.signal_len, self.patch_len)

    @property
    def global_basis(self) -> np.ndarray:
        if "G" not in self._cache:
            self._cache["G"] = haar_matrix(self.signal_len)
        return self._cache["G"]

    @property
    def local_basis(self) -> np.ndarray:
        if "L" not in self._cache:
            self._cache["L"] = haar_matrix(self.patch_len)
        return self._cache["L"]

    @property
    def global_depths(self) -> np.ndarray:
        return haar_depths(self.signal_len)

    @property
    def local_depths(self) -> np.ndarray:
        return haar_depths(self.patch_len)

    def padded_local(self, j: int) -> np.ndarray:
        out = np.zeros(self.signal_len)
        out[: self.patch_len] = self.local_basis[:, j]
        return out

    def atom(self, i: int, j: int) -> np.ndarray:
        """Explicit ``phi_ij`` built by circular convolution."""
        return circular_convolve(self.global_basis[:, i], self.padded_local(j)) / math.sqrt(self.patch_len)

    def atoms(self) -> np.ndarray:
        """All atoms, shape ``(N, l, N)``; meant for small test sizes."""
        n, l = self.shape
        return np.array([[self.atom(i, j) for j in range(l)] for i in range(n)])

    def atom_norms(self) -> np.ndarray:
        """Numerical l2 norms of the atoms, shape ``(N, l)``."""
        return np.linalg.norm(self.atoms(), axis=2)


def _check_signal(F, dictionary: FrameletDictionary) -> np.ndarray:
    F = np.asarray(F, dtype=float)
    if F.shape != (dictionary.signal_len,):
        raise DimensionError(f"signal shape {F.shape} does not match length {dictionary.signal_len}")
    return F


def tensor_coefficients(F, dictionary: FrameletDictionary) -> np.ndarray:
    """``G^T P L`` without the atom normalization."""
    F = _check_signal(F, dictionary)
    PL = build_patch_matrix(F, dictionary.patch_len) @ dictionary.local_basis
    return wavedec(PL, "haar", dictionary.global_depth)


def framelet_analysis(F, dictionary: FrameletDictionary) -> np.ndarray:
    """Coefficients ``c_ij = <F, phi_ij>`` as an ``N x l`` matrix."""
    return tensor_coefficients(F, dictionary) / math.sqrt(dictionary.patch_len)


def framelet_synthesis(C, dictionary: FrameletDictionary) -> np.ndarray:
    """``sum_ij c_ij phi_ij``."""
    C = np.asarray(C, dtype=float)
    if C.shape != dictionary.shape:
        raise DimensionError(f"coefficient shape {C.shape} does not match {dictionary.shape}")
    # U = G C, V = U L^T; F[k] = sum_p V[k - p, p] / sqrt(l)
    U = waverec(C, "haar", dictionary.global_depth)
    V = U @ dictionary.local_basis.T
    F = np.zeros(dictionary.signal_len)
    for p in range(dictionary.patch_len):
        F += np.roll(V[:, p], p)
    return F / math.sqrt(dictionary.patch_len)


def framelet_weights(dictionary: FrameletDictionary) -> np.ndarray:
    """``2**(gamma_i * lambda_j / 2)`` from the global and local Haar depths."""
    if dictionary.basis != "haar":
        raise UnsupportedError("framelet weights need Haar depths")
    g = dictionary.global_depths.astype(float)
    lam = dictionary.local_depths.astype(float)
    return 2.0 ** (np.outer(g, lam) / 2.0)


class FrameletSamplingOperator:
    """``C -> S synthesis(C) / sqrt(m)`` acting on flattened coefficients."""

    def __init__(self, dictionary: FrameletDictionary, sample_indices):
        self.dictionary = dictionary
        self.sample_indices = check_sample_indices(sample_indices, dictionary.signal_len)
        self.m = self.sample_indices.size
        self.scale = 1.0 / math.sqrt(self.m)
        self.shape = (self.m, dictionary.signal_len * dictionary.patch_len)

    def forward(self, c):
        C = np.asarray(c, dtype=float).reshape(self.dictionary.shape)
        return self.scale * framelet_synthesis(C, self.dictionary)[self.sample_indices]

    def adjoint(self, r):
        x = np.zeros(self.dictionary.signal_len)
        x[self.sample_indices] = r
        return self.scale * framelet_analysis(x, self.dictionary).ravel()

    def matrix(self) -> np.ndarray:
        eye = np.eye(self.shape[1])
        return np.stack([self.forward(e) for e in eye], axis=1)


def solve_framelet_inpaint(measurements: MeasurementSet, dictionary: FrameletDictionary,
                           config: SolverConfig | None = None, weights=None, x0=None) -> SolveResult:
    """Weighted l1 recovery of framelet coefficients from point samples.

    ``weights`` defaults to :func:`framelet_weights`; pass ``np.ones`` of shape
    ``(N, l)`` for the unweighted problem. ``result.coeffs`` is the ``N x l``
    coefficient matrix.
    """
    config = config or SolverConfig()
    if measurements.m < 1:
        raise ParameterError("at least one sample is required")
    if measurements.values.ndim != 1:
        raise DimensionError("framelet inpainting takes a single measurement vector")
    if measurements.shape != (dictionary.signal_len,):
        raise DimensionError("measurement grid does not match the dictionary")
    op = FrameletSamplingOperator(dictionary, measurements.indices)
    w = framelet_weights(dictionary) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != dictionary.shape:
        raise DimensionError(f"weight shape {w.shape} does not match {dictionary.shape}")
    w = w.ravel()
    b = measurements.normalized
    lam = config.lam if config.lam is not None else default_lambda(op, b, w)
    if x0 is not None:
        x0 = np.asarray(x0, dtype=float).ravel()
    # the synthesis of a Parseval frame has unit norm, so ||A||^2 <= 1/m
    x, trace, iters, conv = proximal_gradient(op, b, w, lam, config, x0=x0, lipschitz=1.0 / op.m)
    return SolveResult(x.reshape(dictionary.shape), trace, iters, conv, lam, None)
