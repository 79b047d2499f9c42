"""Experiment generation, metrics and scheme comparison.

Every experiment is a pure function of ``(kind, params, seed)``: masks, noise
and synthetic trees are drawn from ``numpy.random.default_rng`` streams
derived from the seed, so all schemes in a comparison see identical data.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
import logging
import math

import numpy as np

from .dwt import CoefficientVector, IndexMap, forward_dwt, get_family, inverse_dwt
from .errors import DimensionError, ParameterError, UnsupportedError
from .framelet import (
    FrameletDictionary,
    FrameletSamplingOperator,
    framelet_synthesis,
    framelet_weights,
    solve_framelet_inpaint,
)
from .measurements import MeasurementSet
from .solver import (
    SolverConfig,
    build_operator,
    max_weighted_correlation,
    solve_mmv,
    solve_reweighted,
    solve_weighted_l1,
)
from .tree import ClosedTree, random_closed_tree, verify_inequalities
from .weights import SchemeSpec, scheme_weights

logger = logging.getLogger(__name__)

KINDS = (
    "synth_tree",
    "inpaint_1d",
    "denoise_1d",
    "inpaint_2d",
    "denoise_2d",
    "mmv_inpaint",
    "framelet_inpaint",
    "tree_stats",
)

SUPPORT_THRESHOLD = 0.01
SYNTH_SIGMA0 = 4.0

_DEFAULTS = {
    "synth_tree": {"J": 9, "d": 1, "s": 90, "m": 179, "wavelet": "haar", "sigma0": SYNTH_SIGMA0},
    "inpaint_1d": {"signal": "runge", "N": 1024, "m": 80, "wavelet": "coif"},
    "denoise_1d": {"signal": "heavisine", "N": 1024, "noise_psnr": 26.0, "wavelet": "db3"},
    "inpaint_2d": {"image": "blocks", "size": 64, "fraction": 0.15, "wavelet": "haar"},
    "denoise_2d": {"image": "blocks", "size": 64, "noise_psnr": 24.0, "wavelet": "haar"},
    "mmv_inpaint": {"N": 256, "m": 96, "k": 3, "s": 60, "wavelet": "db2", "sigma0": SYNTH_SIGMA0},
    "framelet_inpaint": {"signal": "heavisine", "N": 1024, "m": 80, "patch_len": 8},
    "tree_stats": {"J": 5, "d": 1, "s_max": 12, "mode": "exhaustive"},
}


def default_params(kind: str) -> dict:
    if kind not in _DEFAULTS:
        raise ParameterError(f"unknown experiment kind {kind!r}; choose from {', '.join(KINDS)}")
    return dict(_DEFAULTS[kind])


@dataclass
class Experiment:
    kind: str
    seed: int = 0
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        merged = default_params(self.kind)
        merged.update(self.params)
        self.params = merged
        self.seed = int(self.seed)

    def rng(self, stream: int) -> np.random.Generator:
        """Independent generator for one random ingredient (mask, noise, tree...)."""
        return np.random.default_rng([self.seed, stream])

    def with_seed(self, seed: int) -> "Experiment":
        return Experiment(self.kind, seed, dict(self.params))


@dataclass
class MetricsReport:
    rmse: float
    psnr: float
    peak: float
    coef_error_l2: float | None = None
    support_overlap: float | None = None
    scheme: str = ""
    seed: int | None = None
    lam: float | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.support_overlap is not None and not 0.0 <= self.support_overlap <= 1.0:
            raise ParameterError("support overlap must lie in [0, 1]")

    @property
    def perfect(self) -> bool:
        return self.rmse == 0.0

    def as_row(self) -> dict:
        row = {k: v for k, v in asdict(self).items() if k != "extra"}
        row.update(self.extra)
        return row


# ---------------------------------------------------------------------------
# signals and data


def _check_dyadic(n: int) -> int:
    if n < 1 or n & (n - 1):
        raise ParameterError(f"length must be a power of two, got {n}")
    return n.bit_length() - 1


def heavisine(N: int) -> np.ndarray:
    """``4 sin(4 pi t) - sign(t - 0.3) - sign(0.72 - t)`` on ``t = k / N``."""
    _check_dyadic(N)
    t = np.arange(N) / N
    return 4.0 * np.sin(4.0 * np.pi * t) - np.sign(t - 0.3) - np.sign(0.72 - t)


def runge(N: int) -> np.ndarray:
    """``1 / (1 + 25 x^2)`` on ``N`` equispaced points of ``[-1, 1]``."""
    _check_dyadic(N)
    x = np.linspace(-1.0, 1.0, N)
    return 1.0 / (1.0 + 25.0 * x * x)


SIGNALS = {"heavisine": heavisine, "runge": runge}


def make_signal(name, N: int) -> np.ndarray:
    if isinstance(name, str):
        if name not in SIGNALS:
            raise ParameterError(f"unknown signal {name!r}; choose from {', '.join(SIGNALS)}")
        return SIGNALS[name](N)
    x = np.asarray(name, dtype=float)
    _check_dyadic(x.shape[0])
    return x


def synthetic_image(name: str = "blocks", size: int = 64, seed: int = 0) -> np.ndarray:
    """Procedural 8-bit-range test images: ``blocks``, ``smooth`` or ``texture``."""
    _check_dyadic(size)
    rng = np.random.default_rng([seed, 99])
    y, x = np.mgrid[0:size, 0:size] / size
    if name == "blocks":
        img = np.full((size, size), 60.0)
        for _ in range(6):
            r0, c0 = rng.uniform(0, 0.7, 2)
            h, w = rng.uniform(0.15, 0.45, 2)
            img[(y >= r0) & (y < r0 + h) & (x >= c0) & (x < c0 + w)] = rng.uniform(20, 235)
    elif name == "smooth":
        img = np.zeros((size, size))
        for _ in range(5):
            cy, cx = rng.uniform(0, 1, 2)
            width = rng.uniform(0.08, 0.3)
            img += rng.uniform(-1, 1) * np.exp(-((y - cy) ** 2 + (x - cx) ** 2) / (2 * width**2))
        img = 128 + 100 * img / max(np.abs(img).max(), 1e-12)
    elif name == "texture":
        img = 128 + 50 * np.sin(2 * np.pi * (3 * x + 2 * y)) + 40 * np.cos(2 * np.pi * 5 * x * y)
        img[(x - 0.5) ** 2 + (y - 0.5) ** 2 < 0.06] = 230
    else:
        raise ParameterError(f"unknown synthetic image {name!r}")
    return np.clip(np.round(img), 0, 255)


def _tree_coefficients(tree: ClosedTree, imap: IndexMap, rng, sigma0: float, k: int | None = None):
    shape = (imap.size,) if k is None else (imap.size, k)
    vals = np.zeros(shape)
    for nu in tree.sorted_nodes():
        std = sigma0 * 2.0 ** (-nu.level / 2.0)
        vals[imap.position_of(nu)] = std * rng.standard_normal(() if k is None else k)
    return vals


def synth_tree_signal(s: int, J: int, d: int = 1, seed=None, sigma0: float = SYNTH_SIGMA0,
                      family="haar"):
    """Random closed tree of ``s`` wavelet nodes with depth-decaying Gaussian values.

    A node at level ``j`` gets a ``Normal(0, (sigma0 2^(-j/2))^2)`` value; every
    other coefficient, the scaling coefficient included, is zero.

    Returns
    -------
    signal : ndarray
        The synthesized signal on a ``2^J`` grid (per axis).
    coeffs : CoefficientVector
    tree : ClosedTree
    """
    rng = np.random.default_rng(seed)
    tree = random_closed_tree(s, J, d, rng_seed=rng)
    imap = IndexMap((2**J,) * d, J)
    coeffs = CoefficientVector(_tree_coefficients(tree, imap, rng, sigma0), imap, get_family(family).name)
    return inverse_dwt(coeffs), coeffs, tree


def subsample(signal, fraction_or_m, seed=None, ndim: int | None = None) -> MeasurementSet:
    """Uniform random samples without replacement.

    A float in ``(0, 1]`` is a fraction of the grid; an integer is a count.
    """
    x = np.asarray(signal, dtype=float)
    ndim = x.ndim if ndim is None else ndim
    n = int(np.prod(x.shape[:ndim]))
    if isinstance(fraction_or_m, (float, np.floating)):
        if not 0.0 < fraction_or_m <= 1.0:
            raise ParameterError(f"sample fraction must lie in (0, 1], got {fraction_or_m}")
        m = max(1, int(round(fraction_or_m * n)))
    else:
        m = int(fraction_or_m)
    if not 1 <= m <= n:
        raise ParameterError(f"number of samples must lie in [1, {n}], got {m}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    idx = np.arange(n) if m == n else np.sort(rng.choice(n, size=m, replace=False))
    return MeasurementSet.from_signal(x, idx, ndim)


def noise_sigma(target_psnr: float, peak: float) -> float:
    return peak / 10.0 ** (target_psnr / 20.0)


def add_noise(signal, sigma: float | None = None, seed=None, psnr: float | None = None,
              peak: float | None = None) -> np.ndarray:
    """Add zero-mean Gaussian noise of level ``sigma``, or calibrated to a target PSNR."""
    x = np.asarray(signal, dtype=float)
    if (sigma is None) == (psnr is None):
        raise ParameterError("give exactly one of sigma and psnr")
    if psnr is not None:
        sigma = noise_sigma(psnr, default_peak(x) if peak is None else peak)
    if sigma < 0:
        raise ParameterError("noise level must be non-negative")
    if sigma == 0:
        return x.copy()
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return x + sigma * rng.standard_normal(x.shape)


# ---------------------------------------------------------------------------
# metrics


def default_peak(reference) -> float:
    peak = float(np.max(np.abs(reference)))
    return peak if peak > 0 else 1.0


def rmse(reference, reconstruction) -> float:
    ref = np.asarray(reference, dtype=float)
    rec = np.asarray(reconstruction, dtype=float)
    if ref.shape != rec.shape:
        raise DimensionError(f"shape mismatch {ref.shape} vs {rec.shape}")
    return float(np.linalg.norm((ref - rec).ravel()) / math.sqrt(ref.size))


def psnr(reference, reconstruction, peak: float | None = None) -> float:
    peak = default_peak(reference) if peak is None else float(peak)
    err = rmse(reference, reconstruction)
    return math.inf if err == 0 else 20.0 * math.log10(peak / err)


def support_overlap(true_coeffs, est_coeffs, threshold: float = SUPPORT_THRESHOLD) -> float:
    """Fraction of true coefficients above ``threshold`` that are also above it in the estimate."""
    t = np.abs(np.asarray(true_coeffs, dtype=float))
    e = np.abs(np.asarray(est_coeffs, dtype=float))
    if t.ndim == 2:
        t, e = np.linalg.norm(t, axis=1), np.linalg.norm(e, axis=1)
    big = t > threshold
    if not big.any():
        return 1.0
    return float(np.mean(e[big] > threshold))


def _values(c):
    return c.values if isinstance(c, CoefficientVector) else np.asarray(c, dtype=float)


def evaluate(reference, reconstruction, true_coeffs=None, est_coeffs=None,
             peak: float | None = None, **labels) -> MetricsReport:
    """RMSE, PSNR and, given true and estimated coefficients, coefficient error and support overlap."""
    peak = default_peak(reference) if peak is None else float(peak)
    report = MetricsReport(rmse(reference, reconstruction), psnr(reference, reconstruction, peak), peak, **labels)
    if true_coeffs is not None and est_coeffs is not None:
        t, e = _values(true_coeffs), _values(est_coeffs)
        report.coef_error_l2 = float(np.linalg.norm((t - e).ravel()))
        report.support_overlap = support_overlap(t, e)
    return report


# ---------------------------------------------------------------------------
# solvers driven by scheme names


def hard_threshold_denoise(noisy, family="haar", depth: int | None = None) -> np.ndarray:
    """Universal hard threshold with the noise level estimated from the finest wavelets."""
    x = np.asarray(noisy, dtype=float)
    c = forward_dwt(x, family, depth)
    imap = c.index_map
    finest = imap.levels == imap.levels.max()
    finest &= ~imap.is_scaling
    vals = c.values.copy()
    sigma = np.median(np.abs(vals[finest])) / 0.6745
    thr = sigma * math.sqrt(2.0 * math.log(x.size))
    wav = ~imap.is_scaling
    vals[wav & (np.abs(vals) < thr)] = 0.0
    return inverse_dwt(c.with_values(vals))


def lambda_grid(lam_max: float, decades: int = 6, per_decade: int = 1) -> np.ndarray:
    """``lam_max * 10**(-p)`` for ``p`` stepping from ``1/per_decade`` to ``decades``."""
    p = np.arange(1, decades * per_decade + 1) / per_decade
    return lam_max * 10.0 ** (-p)


def _solve_one(ms, spec: SchemeSpec, op, config: SolverConfig, family, x0=None, joint=False):
    if spec.reweighted:
        return solve_reweighted(ms, spec, config, family, operator=op)
    w = scheme_weights(spec, op.index_map, config.eps)
    solve = solve_mmv if joint else solve_weighted_l1
    return solve(ms, w, config, family, operator=op, x0=x0)


def sweep_scheme(ms: MeasurementSet, spec: SchemeSpec, family, config: SolverConfig, score,
                 depth: int | None = None, joint: bool = False, per_decade: int = 1, op=None):
    """Solve along a lambda path and keep the result with the lowest ``score(result)``.

    The path is ``lambda_max * 10**-p`` with ``lambda_max = 2 max|A^T f~|`` (the
    unweighted zero-solution threshold), shared by all schemes. With
    ``config.lam`` set only that value is used.
    """
    op = op or build_operator(ms, family, depth)
    if config.lam is not None:
        res = _solve_one(ms, spec, op, config, family, joint=joint)
        return res, score(res)
    b = ms.normalized if (not joint or ms.values.ndim == 2) else ms.normalized[:, None]
    lam_max = 2.0 * max_weighted_correlation(op, b, np.ones(op.shape[1]))
    best, best_score, x0 = None, math.inf, None
    for lam in lambda_grid(lam_max, per_decade=per_decade):
        res = _solve_one(ms, spec, op, config.replace(lam=float(lam)), family, x0=x0, joint=joint)
        x0 = res.coeffs
        sc = score(res)
        if sc < best_score:
            best, best_score = res, sc
    return best, best_score


def _reconstruct(res) -> np.ndarray:
    return inverse_dwt(res.coeffs)


# ---------------------------------------------------------------------------
# experiment drivers


@dataclass
class ExperimentResult:
    experiment: Experiment
    rows: list
    reconstructions: dict = field(default_factory=dict)
    reference: np.ndarray | None = None
    observed: np.ndarray | None = None


def _parse_schemes(schemes) -> list[SchemeSpec]:
    if isinstance(schemes, str):
        schemes = [s for s in schemes.split(",") if s.strip()]
    specs = [s if isinstance(s, SchemeSpec) else SchemeSpec.parse(s) for s in schemes]
    if not specs:
        raise ParameterError("no weight schemes given")
    return specs


def _config(exp: Experiment, config: SolverConfig | None) -> SolverConfig:
    if config is not None:
        return config
    keys = ("lam", "max_iters", "tol", "step_rule", "rw_outer_iters", "eps")
    return SolverConfig.from_dict({k: exp.params[k] for k in keys if k in exp.params})


def _samples(exp: Experiment, signal, ndim=None):
    p = exp.params
    amount = p.get("m") if p.get("m") is not None else float(p.get("fraction", 1.0))
    return subsample(signal, amount, exp.rng(1), ndim)


def _image(exp: Experiment) -> np.ndarray:
    img = exp.params["image"]
    if isinstance(img, str):
        return synthetic_image(img, int(exp.params["size"]), exp.seed)
    return np.asarray(img, dtype=float)


def _run_wavelet(exp, specs, config, reference, ms, family, peak, true_coeffs=None, per_decade=1,
                 noisy=None):
    rows, recs = [], {}
    op = build_operator(ms, family)
    if true_coeffs is not None:
        score = lambda r: float(np.linalg.norm(_values(true_coeffs) - r.coeffs.values))
    else:
        score = lambda r: rmse(reference, _reconstruct(r))
    for spec in specs:
        res, _ = sweep_scheme(ms, spec, family, config, score, per_decade=per_decade, op=op)
        rec = _reconstruct(res)
        rep = evaluate(reference, rec, true_coeffs, res.coeffs if true_coeffs is not None else None,
                       peak, scheme=spec.label, seed=exp.seed, lam=res.lam)
        rep.extra["iterations"] = res.iterations_used
        rep.extra["converged"] = res.converged
        if noisy is not None:
            rep.extra["noisy_psnr"] = psnr(reference, noisy, peak)
        rows.append(rep)
        recs[spec.label] = rec
    return rows, recs


def _run_synth(exp, specs, config):
    p = exp.params
    signal, coeffs, _ = synth_tree_signal(int(p["s"]), int(p["J"]), int(p.get("d", 1)),
                                          exp.rng(0), float(p["sigma0"]), p["wavelet"])
    ms = _samples(exp, signal, int(p.get("d", 1)))
    rows, recs = _run_wavelet(exp, specs, config, signal, ms, p["wavelet"], None, coeffs)
    return ExperimentResult(exp, rows, recs, signal, None)


def _run_inpaint(exp, specs, config, two_d: bool):
    p = exp.params
    ref = _image(exp) if two_d else make_signal(p["signal"], int(p["N"]))
    peak = float(p.get("peak", 255.0 if two_d else default_peak(ref)))
    if ref.ndim == 3:
        return _run_mmv_image(exp, specs, config, ref, peak)
    ms = _samples(exp, ref)
    rows, recs = _run_wavelet(exp, specs, config, ref, ms, p["wavelet"], peak)
    return ExperimentResult(exp, rows, recs, ref, None)


def _run_denoise(exp, specs, config, two_d: bool):
    p = exp.params
    ref = _image(exp) if two_d else make_signal(p["signal"], int(p["N"]))
    peak = float(p.get("peak", 255.0 if two_d else default_peak(ref)))
    noisy = p.get("noisy")
    if noisy is None:
        noisy = add_noise(ref, seed=exp.rng(2), psnr=float(p["noise_psnr"]), peak=peak)
    noisy = np.asarray(noisy, dtype=float)
    ms = MeasurementSet.from_signal(noisy, np.arange(noisy.size))
    rows, recs = _run_wavelet(exp, specs, config, ref, ms, p["wavelet"], peak, per_decade=4, noisy=noisy)
    ht = hard_threshold_denoise(noisy, p["wavelet"])
    base = evaluate(ref, ht, peak=peak, scheme="hard_threshold", seed=exp.seed)
    base.extra["noisy_psnr"] = psnr(ref, noisy, peak)
    rows.append(base)
    recs["hard_threshold"] = ht
    return ExperimentResult(exp, rows, recs, ref, noisy)


def _columnwise_sweep(ms, spec, family, config, op, err):
    """Independent per-column solves sharing one lambda, chosen by the total error."""
    k = ms.k
    b = ms.normalized
    if config.lam is not None:
        grid = [config.lam]
    else:
        lam_max = 2.0 * max_weighted_correlation(op, b, np.ones(op.shape[1]))
        grid = lambda_grid(lam_max)
    best, best_err = None, math.inf
    x0 = [None] * k
    for lam in grid:
        cfg = config.replace(lam=float(lam))
        cols = []
        for i in range(k):
            res = _solve_one(ms.column(i), spec, op, cfg, family, x0=x0[i])
            x0[i] = res.coeffs
            cols.append(res.coeffs.values)
        vals = np.stack(cols, axis=1)
        e = err(vals)
        if e < best_err:
            best, best_err = vals, e
    return best


def _mmv_rows(exp, specs, config, ms, family, reference, peak, true_coeffs=None, columns=True):
    """Joint and column-by-column recovery for each scheme."""
    op = build_operator(ms, family)
    rows, recs = [], {}
    tv = None if true_coeffs is None else _values(true_coeffs)

    def err(coeffs):
        if tv is not None:
            return float(np.linalg.norm(tv - coeffs))
        return rmse(reference, inverse_dwt(CoefficientVector(coeffs, op.index_map, op.family.name)))

    for spec in specs:
        joint, _ = sweep_scheme(ms, spec, family, config, lambda r: err(r.coeffs.values), joint=True, op=op)
        runs = [("joint", joint.coeffs.values, joint.lam)]
        if columns:
            runs.append(("columns", _columnwise_sweep(ms, spec, family, config, op, err), None))
        for mode, vals, lam in runs:
            cv = CoefficientVector(vals, op.index_map, op.family.name)
            rec = inverse_dwt(cv)
            rep = evaluate(reference, rec, tv, vals if tv is not None else None, peak,
                           scheme=f"{spec.label}:{mode}", seed=exp.seed, lam=lam)
            rows.append(rep)
            recs[f"{spec.label}:{mode}"] = rec
    return rows, recs


def _run_mmv(exp, specs, config):
    p = exp.params
    N, k, s = int(p["N"]), int(p["k"]), int(p["s"])
    J = _check_dyadic(N)
    rng = exp.rng(0)
    tree = random_closed_tree(s, J, 1, rng_seed=rng)
    imap = IndexMap((N,), J)
    coeffs = CoefficientVector(_tree_coefficients(tree, imap, rng, float(p["sigma0"]), k), imap,
                               get_family(p["wavelet"]).name)
    signal = inverse_dwt(coeffs)
    ms = _samples(exp, signal, 1)
    rows, recs = _mmv_rows(exp, specs, config, ms, p["wavelet"], signal, None, coeffs)
    return ExperimentResult(exp, rows, recs, signal, None)


def _run_mmv_image(exp, specs, config, ref, peak):
    ms = _samples(exp, ref, 2)
    rows, recs = _mmv_rows(exp, specs, config, ms, exp.params["wavelet"], ref, peak,
                           columns=bool(exp.params.get("mmv_columns", True)))
    return ExperimentResult(exp, rows, recs, ref, None)


def _framelet_weights_for(spec: SchemeSpec, dictionary: FrameletDictionary) -> np.ndarray:
    if spec.name == "none":
        return np.ones(dictionary.shape)
    if spec.name == "norm":
        return framelet_weights(dictionary)
    if spec.name == "alpha":
        return framelet_weights(dictionary) ** spec.alpha
    raise UnsupportedError(f"scheme {spec.label!r} is not available for framelets")


def _run_framelet(exp, specs, config):
    p = exp.params
    N = int(p["N"])
    ref = make_signal(p["signal"], N)
    peak = float(p.get("peak", default_peak(ref)))
    ms = _samples(exp, ref)
    D = FrameletDictionary(N, int(p["patch_len"]))
    rows, recs = [], {}
    op = FrameletSamplingOperator(D, ms.indices)
    lam_max = 2.0 * max_weighted_correlation(op, ms.normalized, np.ones(op.shape[1]))
    grid = [config.lam] if config.lam is not None else lambda_grid(lam_max)
    for spec in specs:
        w = _framelet_weights_for(spec, D)
        best, best_err, x0 = None, math.inf, None
        for lam in grid:
            res = solve_framelet_inpaint(ms, D, config.replace(lam=float(lam)), w, x0)
            x0 = res.coeffs
            rec = framelet_synthesis(res.coeffs, D)
            e = rmse(ref, rec)
            if e < best_err:
                best, best_err, best_rec = res, e, rec
        rep = evaluate(ref, best_rec, peak=peak, scheme=spec.label, seed=exp.seed, lam=best.lam)
        rep.extra["iterations"] = best.iterations_used
        rows.append(rep)
        recs[spec.label] = best_rec
    return ExperimentResult(exp, rows, recs, ref, None)


def run_experiment(experiment: Experiment, schemes=("none", "norm"),
                   config: SolverConfig | None = None):
    """Run one experiment; ``tree_stats`` returns an inequality report instead."""
    exp = experiment
    if exp.kind == "tree_stats":
        p = exp.params
        return verify_inequalities(int(p["J"]), int(p.get("d", 1)), int(p["s_max"]), p.get("mode", "exhaustive"))
    specs = _parse_schemes(schemes)
    config = _config(exp, config)
    if exp.kind == "synth_tree":
        return _run_synth(exp, specs, config)
    if exp.kind in ("inpaint_1d", "inpaint_2d"):
        return _run_inpaint(exp, specs, config, exp.kind == "inpaint_2d")
    if exp.kind in ("denoise_1d", "denoise_2d"):
        return _run_denoise(exp, specs, config, exp.kind == "denoise_2d")
    if exp.kind == "mmv_inpaint":
        return _run_mmv(exp, specs, config)
    if exp.kind == "framelet_inpaint":
        return _run_framelet(exp, specs, config)
    raise ParameterError(f"unknown experiment kind {exp.kind!r}")


def compare_schemes(experiment: Experiment, schemes, config: SolverConfig | None = None) -> list[MetricsReport]:
    """One metrics row per scheme (plus baselines) on a single shared instance."""
    if experiment.kind == "tree_stats":
        raise ParameterError("tree_stats has no schemes to compare")
    return run_experiment(experiment, schemes, config).rows


def _trial(args):
    exp, schemes, config = args
    return compare_schemes(exp, schemes, config)


def compare_trials(experiment: Experiment, schemes, trials: int, config: SolverConfig | None = None,
                   workers: int = 1) -> list[MetricsReport]:
    """``compare_schemes`` for seeds ``seed, seed+1, ...``; trials may run in worker processes."""
    if trials < 1:
        raise ParameterError("trials must be at least 1")
    jobs = [(experiment.with_seed(experiment.seed + t), schemes, config) for t in range(trials)]
    if workers > 1 and trials > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_trial, jobs))
    else:
        results = [_trial(j) for j in jobs]
    return [row for rows in results for row in rows]
