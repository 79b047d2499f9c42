"""Command-line front end.

Each subcommand resolves its parameters (built-in defaults, then a flat JSON
config, then explicit flags), runs the matching harness experiment and
writes CSV tables, reconstructions and a ``manifest.json`` with checksums.
A manifest can be passed back through ``--config`` to repeat a run.

Exit codes: 0 success, 1 usage, 2 data, 3 resource.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import os
import sys

import numpy as np

from . import harness
from .dwt import FAMILY_NAMES, forward_dwt, inverse_dwt
from .errors import DataError, ParameterError, ResourceError, WavecsError
from .imageio import (
    center_crop_dyadic,
    is_image_path,
    read_pnm,
    read_signal_csv,
    write_pnm,
    write_signal_csv,
    write_table_csv,
)
from .measurements import MeasurementSet
from .solver import SolverConfig, build_operator, solve_mmv, solve_reweighted, solve_weighted_l1
from .weights import SchemeSpec, scheme_weights

logger = logging.getLogger("wavecs")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_RESOURCE = 0, 1, 2, 3

METRIC_COLUMNS = [
    "trial", "seed", "scheme", "rmse", "psnr", "peak", "coef_error_l2",
    "support_overlap", "lam", "iterations", "converged", "noisy_psnr",
]

SOLVER_KEYS = ("lambda", "max_iters", "tol", "step_rule", "rw_outer_iters", "eps")

COMMON_DEFAULTS = {
    "output_dir": ".",
    "wavelet": "haar",
    "weights": "norm",
    "seed": 0,
    "max_iters": 5000,
    "tol": 1e-8,
    "step_rule": "fixed",
    "rw_outer_iters": 5,
    "eps": 0.1,
}

COMMAND_DEFAULTS = {
    "inpaint": {"fraction": 0.15, "signal": "runge", "N": 1024, "image": None, "size": 64},
    "denoise": {"signal": "heavisine", "N": 1024, "image": None, "size": 64},
    "synth": {"J": 9, "d": 1, "s": 90, "m": 179, "schemes": "none,norm", "sigma0": harness.SYNTH_SIGMA0},
    "framelet-inpaint": {"signal": "heavisine", "N": 1024, "m": 80, "patch_len": 8},
    "tree-stats": {"J": 5, "d": 1, "s_max": 12, "mode": "exhaustive"},
    "compare": {"kind": "synth_tree", "schemes": "none,norm,alpha:2,irw,wrw", "trials": 1, "workers": 1},
}


class UsageError(WavecsError):
    exit_code = EXIT_USAGE


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_common(p: argparse.ArgumentParser) -> None:
    S = argparse.SUPPRESS
    p.add_argument("--input", default=S, help="CSV signal, PGM (P5) or PPM (P6) image")
    p.add_argument("--output-dir", dest="output_dir", default=S)
    p.add_argument("--wavelet", choices=FAMILY_NAMES, default=S)
    p.add_argument("--weights", default=S, help="none, norm, alpha:<v>, irw or wrw")
    p.add_argument("--lambda", dest="lambda", type=float, default=S)
    amount = p.add_mutually_exclusive_group()
    amount.add_argument("--fraction", type=float, default=S)
    amount.add_argument("--m", type=int, default=S)
    p.add_argument("--noise-psnr", dest="noise_psnr", type=float, default=S)
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--config", default=S, help="flat JSON config or a previous manifest")
    p.add_argument("--max-iters", dest="max_iters", type=int, default=S)
    p.add_argument("--tol", type=float, default=S)
    p.add_argument("--step-rule", dest="step_rule", choices=("fixed", "backtracking"), default=S)
    p.add_argument("--rw-iters", "--rw-outer-iters", dest="rw_outer_iters", type=int, default=S)
    p.add_argument("--eps", type=float, default=S)
    p.add_argument("--signal", choices=sorted(harness.SIGNALS), default=S,
                   help="built-in test signal used when --input is absent")
    p.add_argument("--N", type=int, default=S)
    p.add_argument("--image", choices=("blocks", "smooth", "texture"), default=S,
                   help="built-in synthetic image used when --input is absent")
    p.add_argument("--size", type=int, default=S)
    p.add_argument("-v", "--verbose", action="store_true", default=S)


def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    parser = _Parser(prog="wavecs", description="Weighted l1 wavelet recovery from few samples.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("inpaint", help="recover a signal or image from random samples")
    _add_common(p)

    p = sub.add_parser("denoise", help="weighted l1 denoising of a signal or image")
    _add_common(p)

    p = sub.add_parser("synth", help="random closed-tree signal recovery")
    _add_common(p)
    p.add_argument("--J", type=int, default=S)
    p.add_argument("--d", type=int, choices=(1, 2), default=S)
    p.add_argument("--s", type=int, default=S)
    p.add_argument("--schemes", default=S)

    p = sub.add_parser("framelet-inpaint", help="Haar convolutional framelet inpainting")
    _add_common(p)
    p.add_argument("--patch-len", dest="patch_len", type=int, default=S)

    p = sub.add_parser("tree-stats", help="closed-tree complexity inequalities")
    p.add_argument("--J", type=int, default=S)
    p.add_argument("--d", type=int, choices=(1, 2), default=S)
    p.add_argument("--s-max", dest="s_max", type=int, default=S)
    p.add_argument("--mode", choices=("exhaustive", "exact", "greedy"), default=S)
    p.add_argument("--output-dir", dest="output_dir", default=S)
    p.add_argument("--config", default=S)
    p.add_argument("-v", "--verbose", action="store_true", default=S)

    p = sub.add_parser("compare", help="compare weight schemes over seeded trials")
    _add_common(p)
    p.add_argument("--kind", choices=[k for k in harness.KINDS if k != "tree_stats"], default=S)
    p.add_argument("--schemes", default=S)
    p.add_argument("--trials", type=int, default=S)
    p.add_argument("--workers", type=int, default=S)
    p.add_argument("--J", type=int, default=S)
    p.add_argument("--d", type=int, choices=(1, 2), default=S)
    p.add_argument("--s", type=int, default=S)
    p.add_argument("--k", type=int, default=S)
    p.add_argument("--patch-len", dest="patch_len", type=int, default=S)
    return parser


# ---------------------------------------------------------------------------
# parameter resolution


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise DataError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise DataError("config must be a flat JSON object")
    if "resolved_params" in data:
        data = data["resolved_params"]
    return {k.replace("-", "_"): v for k, v in data.items()}


def resolve_params(command: str, ns: argparse.Namespace) -> dict:
    params = dict(COMMON_DEFAULTS)
    params.update(COMMAND_DEFAULTS.get(command, {}))
    flags = {k: v for k, v in vars(ns).items() if k != "command"}
    config_path = flags.pop("config", None)
    if config_path:
        params.update(load_config(config_path))
    if "m" in flags:
        params.pop("fraction", None)
    if "fraction" in flags:
        params.pop("m", None)
    params.update(flags)
    params["config_path"] = config_path
    _validate(params)
    return params


def _validate(p: dict) -> None:
    frac = p.get("fraction")
    if frac is not None and p.get("m") is None and not 0.0 < float(frac) <= 1.0:
        raise UsageError(f"--fraction must lie in (0, 1], got {frac}")
    if p.get("m") is not None and int(p["m"]) < 1:
        raise UsageError("--m must be at least 1")
    if p.get("lambda") is not None and not float(p["lambda"]) > 0:
        raise UsageError("--lambda must be positive")
    if p.get("trials") is not None and int(p["trials"]) < 1:
        raise UsageError("--trials must be at least 1")
    if "weights" in p:
        SchemeSpec.parse(p["weights"])


def solver_config(p: dict) -> SolverConfig:
    return SolverConfig(
        lam=p.get("lambda"),
        max_iters=p["max_iters"],
        tol=p["tol"],
        step_rule=p["step_rule"],
        rw_outer_iters=p["rw_outer_iters"],
        eps=p["eps"],
    )


def _amount(p: dict):
    return int(p["m"]) if p.get("m") is not None else float(p["fraction"])


# ---------------------------------------------------------------------------
# outputs


class RunWriter:
    """Collects artifacts and writes the manifest."""

    def __init__(self, command: str, params: dict):
        self.command = command
        self.params = params
        self.out = params.get("output_dir") or "."
        os.makedirs(self.out, exist_ok=True)
        self.artifacts = []

    def path(self, name: str) -> str:
        self.artifacts.append(name)
        return os.path.join(self.out, name)

    def manifest(self) -> str:
        entries = []
        for name in self.artifacts:
            with open(os.path.join(self.out, name), "rb") as fh:
                entries.append({"name": name, "sha256": hashlib.sha256(fh.read()).hexdigest()})
        resolved = {k: v for k, v in self.params.items() if k not in ("config_path", "output_dir", "verbose")}
        doc = {
            "command": self.command,
            "config_path": self.params.get("config_path"),
            "resolved_params": resolved,
            "seed": self.params.get("seed"),
            "output_dir": self.out,
            "psnr_peak": "max |reference| for signals, 255 for 8-bit images",
            "artifact_list": entries,
        }
        path = os.path.join(self.out, "manifest.json")
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True, default=_json_default)
            fh.write("\n")
        return path


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(f"cannot serialize {type(o).__name__}")


def write_metrics(path: str, reports, trial: int | None = None) -> None:
    rows = []
    for rep in reports:
        row = rep.as_row()
        row.setdefault("trial", trial)
        rows.append([row.get(c) for c in METRIC_COLUMNS])
    write_table_csv(path, METRIC_COLUMNS, rows)


def _read_input(p: dict):
    """Returns ``(array, is_image)``; images are cropped to a dyadic square."""
    path = p.get("input")
    if path is None:
        if p.get("image"):
            return harness.synthetic_image(p["image"], int(p["size"]), int(p["seed"])), True
        return harness.make_signal(p["signal"], int(p["N"])), False
    if is_image_path(path):
        img = read_pnm(path).astype(float)
        img, cropped = center_crop_dyadic(img)
        if cropped:
            logger.warning("%s is not a power-of-two square; center-cropped to %dx%d", path, *img.shape[:2])
        return img, True
    x = read_signal_csv(path)
    n = x.shape[0]
    if n & (n - 1):
        raise DataError(f"{path}: signal length {n} is not a power of two")
    return x, False


def _write_recon(run: RunWriter, name: str, rec, is_image: bool, channels: int = 1) -> None:
    if is_image:
        write_pnm(run.path(f"{name}.{'ppm' if channels == 3 else 'pgm'}"), rec)
    else:
        write_signal_csv(run.path(f"{name}.csv"), rec)


# ---------------------------------------------------------------------------
# subcommands


def cmd_inpaint(p: dict) -> int:
    ref, is_image = _read_input(p)
    spec = SchemeSpec.parse(p["weights"])
    kind = "inpaint_2d" if is_image else "inpaint_1d"
    params = {"wavelet": p["wavelet"], "m": None, "fraction": None}
    params["m" if p.get("m") is not None else "fraction"] = _amount(p)
    params.update({"image": ref, "size": ref.shape[0]} if is_image else {"signal": ref, "N": ref.shape[0]})
    if is_image:
        params.update(peak=255.0, mmv_columns=False)
    exp = harness.Experiment(kind, int(p["seed"]), params)
    result = harness.run_experiment(exp, [spec], solver_config(p))
    run = RunWriter("inpaint", p)
    label = spec.label + (":joint" if ref.ndim == 3 else "")
    rows = [r for r in result.rows if r.scheme == label]
    _write_recon(run, "recon", result.reconstructions[label], is_image, 3 if ref.ndim == 3 else 1)
    write_metrics(run.path("metrics.csv"), rows)
    run.manifest()
    _report(rows)
    return EXIT_OK


def universal_lambda(noisy, family) -> float:
    """Lambda whose soft threshold on unit-weight coefficients is the universal threshold."""
    x = np.asarray(noisy, dtype=float)
    c = forward_dwt(x, family)
    imap = c.index_map
    finest = (imap.levels == imap.levels.max()) & ~imap.is_scaling
    vals = c.values.reshape(imap.size, -1)
    sigma = float(np.median(np.abs(vals[finest]))) / 0.6745
    n = imap.size
    # full sampling: lam w / (2 / n) is the per-coefficient threshold
    return max(2.0 * sigma * math.sqrt(2.0 * math.log(n)) / n, 1e-12)


def cmd_denoise(p: dict) -> int:
    data, is_image = _read_input(p)
    spec = SchemeSpec.parse(p["weights"])
    cfg = solver_config(p)
    run = RunWriter("denoise", p)
    if p.get("noise_psnr") is not None:
        # input is the clean reference: add calibrated noise and score against it
        kind = "denoise_2d" if is_image else "denoise_1d"
        params = {"wavelet": p["wavelet"], "noise_psnr": float(p["noise_psnr"])}
        params.update({"image": data, "size": data.shape[0], "peak": 255.0} if is_image
                      else {"signal": data, "N": data.shape[0]})
        if data.ndim != (2 if is_image else 1):
            raise DataError("denoising takes a grayscale image or a single signal")
        result = harness.run_experiment(harness.Experiment(kind, int(p["seed"]), params), [spec], cfg)
        _write_recon(run, "denoised", result.reconstructions[spec.label], is_image)
        _write_recon(run, "noisy", result.observed, is_image)
        rows = result.rows
    else:
        noisy = data
        ndim = 2 if is_image else 1
        flat = noisy.reshape((-1,) + noisy.shape[ndim:])
        ms = MeasurementSet(noisy.shape[:ndim], np.arange(flat.shape[0]), flat)
        if cfg.lam is None:
            cfg = cfg.replace(lam=universal_lambda(noisy, p["wavelet"]))
        if spec.reweighted:
            res = solve_reweighted(ms, spec, cfg, p["wavelet"])
        else:
            op = build_operator(ms, p["wavelet"])
            w = scheme_weights(spec, op.index_map, cfg.eps)
            solve = solve_mmv if flat.ndim == 2 else solve_weighted_l1
            res = solve(ms, w, cfg, p["wavelet"], operator=op)
        rec = inverse_dwt(res.coeffs)
        peak = 255.0 if is_image else None
        rep = harness.evaluate(noisy, rec, peak=peak, scheme=spec.label, seed=int(p["seed"]), lam=res.lam)
        rep.extra.update(iterations=res.iterations_used, converged=res.converged)
        rows = [rep]
        _write_recon(run, "denoised", rec, is_image, 3 if noisy.ndim == 3 else 1)
    write_metrics(run.path("metrics.csv"), rows)
    run.manifest()
    _report(rows)
    return EXIT_OK


def cmd_synth(p: dict) -> int:
    params = {k: p[k] for k in ("J", "d", "s", "sigma0") if k in p}
    params["wavelet"] = p["wavelet"]
    params["m"], params["fraction"] = (int(p["m"]), None) if p.get("m") is not None else (None, float(p["fraction"]))
    exp = harness.Experiment("synth_tree", int(p["seed"]), params)
    result = harness.run_experiment(exp, p["schemes"], solver_config(p))
    run = RunWriter("synth", p)
    write_signal_csv(run.path("signal.csv"), result.reference)
    for label, rec in result.reconstructions.items():
        write_signal_csv(run.path(f"recon_{_safe(label)}.csv"), rec)
    write_metrics(run.path("metrics.csv"), result.rows)
    run.manifest()
    _report(result.rows)
    return EXIT_OK


def cmd_framelet_inpaint(p: dict) -> int:
    ref, is_image = _read_input(p)
    if is_image or ref.ndim != 1:
        raise DataError("framelet inpainting works on 1D signals only")
    params = {"signal": ref, "N": ref.shape[0], "patch_len": int(p["patch_len"]), "m": None, "fraction": None}
    params["m" if p.get("m") is not None else "fraction"] = _amount(p)
    spec = SchemeSpec.parse(p["weights"])
    exp = harness.Experiment("framelet_inpaint", int(p["seed"]), params)
    result = harness.run_experiment(exp, [spec], solver_config(p))
    run = RunWriter("framelet-inpaint", p)
    write_signal_csv(run.path("recon.csv"), result.reconstructions[spec.label])
    write_metrics(run.path("metrics.csv"), result.rows)
    run.manifest()
    _report(result.rows)
    return EXIT_OK


def cmd_tree_stats(p: dict) -> int:
    exp = harness.Experiment("tree_stats", 0, {k: p[k] for k in ("J", "d", "s_max", "mode")})
    report = harness.run_experiment(exp)
    run = RunWriter("tree-stats", p)
    text = report.to_csv()
    with open(run.path("tree_stats.csv"), "w", newline="") as fh:
        fh.write(text)
    run.manifest()
    sys.stdout.write(text)
    if report.chain_identity is not None:
        print(f"K_T(J+1) = {report.k_tree_jp1} (expected {2 ** report.J}): {report.chain_identity}")
    print("all inequalities hold" if report.all_pass else "some inequalities FAIL")
    return EXIT_OK


_COMPARE_KEYS = ("J", "d", "s", "k", "N", "patch_len", "noise_psnr", "signal", "image", "size", "sigma0")


def cmd_compare(p: dict) -> int:
    kind = p["kind"]
    params = {k: p[k] for k in _COMPARE_KEYS if k in p and p[k] is not None}
    if "wavelet" in p and kind != "framelet_inpaint":
        params["wavelet"] = p["wavelet"]
    if p.get("m") is not None:
        params.update(m=int(p["m"]), fraction=None)
    elif p.get("fraction") is not None:
        params.update(m=None, fraction=float(p["fraction"]))
    if p.get("input"):
        data, is_image = _read_input(p)
        params.update({"image": data, "size": data.shape[0]} if is_image else {"signal": data, "N": data.shape[0]})
    exp = harness.Experiment(kind, int(p["seed"]), params)
    rows = harness.compare_trials(exp, p["schemes"], int(p["trials"]), solver_config(p), int(p["workers"]))
    run = RunWriter("compare", p)
    trial_of = {exp.seed + t: t for t in range(int(p["trials"]))}
    for r in rows:
        r.extra["trial"] = trial_of.get(r.seed)
    write_metrics(run.path("compare.csv"), rows)
    run.manifest()
    _report(rows)
    return EXIT_OK


def _safe(label: str) -> str:
    return "".join(ch if ch.isalnum() else "_" for ch in label)


def _report(rows) -> None:
    for r in rows:
        extra = f" coef_err={r.coef_error_l2:.4g}" if r.coef_error_l2 is not None else ""
        print(f"{r.scheme:>16s} seed={r.seed} rmse={r.rmse:.6g} psnr={r.psnr:.4f} dB{extra}")


COMMANDS = {
    "inpaint": cmd_inpaint,
    "denoise": cmd_denoise,
    "synth": cmd_synth,
    "framelet-inpaint": cmd_framelet_inpaint,
    "tree-stats": cmd_tree_stats,
    "compare": cmd_compare,
}

# tree-stats ignores the shared solver defaults
_NO_SOLVER = ("tree-stats",)


def main(argv=None) -> int:
    logging.basicConfig(format="%(levelname)s: %(message)s", level=logging.WARNING)
    try:
        ns = build_parser().parse_args(argv)
        command = ns.command
        params = resolve_params(command, ns)
        if params.pop("verbose", False):
            logging.getLogger().setLevel(logging.DEBUG)
        if command in _NO_SOLVER:
            params = {k: v for k, v in params.items()
                      if k in COMMAND_DEFAULTS[command] or k in ("output_dir", "config_path")}
        return COMMANDS[command](params)
    except UsageError as exc:
        print(f"wavecs: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceError as exc:
        print(f"wavecs: resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except ParameterError as exc:
        print(f"wavecs: invalid parameter: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"wavecs: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except MemoryError:
        print("wavecs: out of memory", file=sys.stderr)
        return EXIT_RESOURCE
    except WavecsError as exc:
        print(f"wavecs: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
