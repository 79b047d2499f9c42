"""Weight schemes for the weighted l1 penalty.

All functions return a :class:`WeightVector` aligned with an
:class:`~wavecs.dwt.IndexMap`. For matrix-valued coefficients (several
measurement vectors) the magnitude of a coefficient is the l2 norm of its row.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dwt import CoefficientVector, IndexMap
from .errors import ParameterError

SCHEMES = ("none", "norm", "alpha", "irw", "wrw")

DEFAULT_IRW_EPS = 0.1


@dataclass
class WeightVector:
    """Positive per-coefficient weights with the scheme that produced them."""

    values: np.ndarray
    scheme: str
    iteration: int = 0
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1:
            raise ParameterError("weights must be a flat vector")
        if not np.all(np.isfinite(self.values)) or np.any(self.values <= 0):
            raise ParameterError("weights must be strictly positive and finite")

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class SchemeSpec:
    """Parsed ``--weights`` value: ``none``, ``norm``, ``alpha:<v>``, ``irw`` or ``wrw``."""

    name: str
    alpha: float = 1.0

    @property
    def reweighted(self) -> bool:
        return self.name in ("irw", "wrw")

    @property
    def label(self) -> str:
        return f"alpha:{self.alpha:g}" if self.name == "alpha" else self.name

    @classmethod
    def parse(cls, text: str) -> "SchemeSpec":
        text = str(text).strip().lower()
        if text in ("none", "unweighted"):
            return cls("none")
        if text in ("norm", "uniform_norm"):
            return cls("norm")
        if text in ("irw", "wrw"):
            return cls(text)
        if text.startswith("alpha:"):
            try:
                alpha = float(text.split(":", 1)[1])
            except ValueError as exc:
                raise ParameterError(f"bad alpha in {text!r}") from exc
            if not alpha > 0:
                raise ParameterError("alpha must be positive")
            return cls("alpha", alpha)
        raise ParameterError(f"unknown weight scheme {text!r}")


def _levels(index_map: IndexMap, d):
    return index_map.levels.astype(float), (index_map.d if d is None else d)


def unweighted(index_map: IndexMap) -> WeightVector:
    return WeightVector(np.ones(index_map.size), "unweighted")


def uniform_norm_weights(index_map: IndexMap, d: int | None = None) -> WeightVector:
    """``2**(j*d/2)``, the uniform norm of a level-``j`` scaling function or wavelet."""
    j, d = _levels(index_map, d)
    return WeightVector(2.0 ** (j * d / 2.0), "uniform_norm")


def alpha_weights(index_map: IndexMap, alpha: float, d: int | None = None) -> WeightVector:
    """Uniform norms raised to ``alpha`` on wavelets; scaling entries stay unpowered."""
    if not alpha > 0:
        raise ParameterError(f"alpha must be positive, got {alpha}")
    j, d = _levels(index_map, d)
    base = 2.0 ** (j * d / 2.0)
    vals = np.where(index_map.is_scaling, base, base**alpha)
    return WeightVector(vals, "alpha_power", params={"alpha": float(alpha)})


def coefficient_magnitudes(coeffs) -> np.ndarray:
    vals = coeffs.values if isinstance(coeffs, CoefficientVector) else np.asarray(coeffs, dtype=float)
    if vals.ndim == 1:
        return np.abs(vals)
    return np.linalg.norm(vals.reshape(vals.shape[0], -1), axis=1)


def irw_update(prev_coeffs, eps: float = DEFAULT_IRW_EPS, iteration: int = 1) -> WeightVector:
    """Classic reweighting ``1 / (|c| + eps)``."""
    if not eps > 0:
        raise ParameterError(f"eps must be positive, got {eps}")
    mag = coefficient_magnitudes(prev_coeffs)
    return WeightVector(1.0 / (mag + eps), "irw", iteration, {"eps": float(eps)})


def wavelet_rw_update(prev_coeffs, base: WeightVector, index_map: IndexMap | None = None,
                      iteration: int = 1) -> WeightVector:
    """Scale-aware reweighting anchored at the parent's base weight.

    ``w = w0[parent] + 1 / (|c| + eps)`` with ``eps = 1 / (w0 - w0[parent])``.
    Where the base weight does not grow from parent to child (the coarsest
    wavelet level, whose parent is a scaling coefficient of equal norm) the
    weight is held at ``w0``; scaling coefficients are never reweighted.
    """
    if index_map is None:
        if not isinstance(prev_coeffs, CoefficientVector):
            raise ParameterError("an index map is required for bare coefficient arrays")
        index_map = prev_coeffs.index_map
    mag = coefficient_magnitudes(prev_coeffs)
    w0 = base.values
    if mag.size != w0.size or w0.size != index_map.size:
        raise ParameterError("coefficients, base weights and index map are misaligned")
    wavelet = ~index_map.is_scaling
    par = index_map.parent_positions
    out = w0.copy()
    wp = w0[par[wavelet]]
    gap = w0[wavelet] - wp
    upd = w0[wavelet].copy()
    live = gap > 0
    # 1 / (|c| + 1/gap) written as gap / (gap |c| + 1) to stay exact at c = 0
    upd[live] = wp[live] + gap[live] / (gap[live] * mag[wavelet][live] + 1.0)
    out[wavelet] = upd
    return WeightVector(out, "wavelet_rw", iteration, {"base": base.scheme})


def scheme_weights(spec: SchemeSpec, index_map: IndexMap, eps: float = DEFAULT_IRW_EPS) -> WeightVector:
    """Initial weights of a scheme (reweighted schemes start from zero coefficients)."""
    if spec.name == "none":
        return unweighted(index_map)
    if spec.name == "norm":
        return uniform_norm_weights(index_map)
    if spec.name == "alpha":
        return alpha_weights(index_map, spec.alpha)
    zero = np.zeros(index_map.size)
    if spec.name == "irw":
        return irw_update(zero, eps)
    return wavelet_rw_update(zero, uniform_norm_weights(index_map), index_map)
