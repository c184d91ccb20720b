"""Command-line surface.

Subcommands: ``augment`` (batch-augment a directory), ``selfcheck``
(distribution self-tests), ``covariance`` (analytic-vs-empirical report),
``evaluate`` (metrics over a JSONL prediction log), ``fractal-prep``
(grayscale a mixing-picture bank and pin its order).

Exit codes are stable API: 0 ok, 1 check failed, 2 usage/schema error,
3 I/O failure, 4 empty bank, 5 incomplete corruption grid.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .covariance import (
    PIPELINE_IID,
    PIPELINE_SHARED,
    TransformStats,
    compare_covariances,
)
from .errors import (
    EmptyBankError,
    IncompleteGridError,
    LogSchemaError,
    ParameterError,
    ShapeMismatchError,
)
from .fractals import load_bank
from .imgio import list_image_files, load_image, save_image
from .metrics import (
    FlipMode,
    mean_corruption_error,
    mean_flip_probability,
    mean_top5_distance,
    read_log,
    rms_calibration_error,
)
from .pipeline import PipelineConfig, augment_one, layermix
from .rng import (
    DEFAULT_BLEND_WEIGHTS,
    RngStream,
    blend_method_samples,
    choose_layer_exit,
    conic_weight_moments,
    conic_weight_samples,
)
from .transforms import grayscale

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_EMPTY_BANK = 4
EXIT_INCOMPLETE_GRID = 5

_PREVIEW_STREAM_BASE = 1 << 62  # keep preview streams clear of item streams


def _parse_bool(text: str) -> bool:
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _parse_probs(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in str(text).split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated floats, got {text!r}") from exc


# Per-command defaults and INI value parsers; argparse flags default to None
# so a config file can fill anything the command line leaves unset.
_DEFAULTS = {
    "augment": {
        "magnitude": 8,
        "beta": 3.0,
        "seed": 0,
        "grayscale_fractals": True,
        "count_per_image": 1,
        "preview_grid": None,
    },
    "selfcheck": {"n": 1_000_000, "seed": 0, "blend_probs": None},
    "covariance": {"pipeline": PIPELINE_SHARED, "n": 1_000_000, "seed": 0, "tol": 0.02, "out": None},
    "evaluate": {"metric": "all", "mode": "temporal", "bins": 15, "baseline": None, "out": None},
    "fractal-prep": {},
}

_COERCERS = {
    "magnitude": int,
    "beta": float,
    "seed": int,
    "grayscale_fractals": _parse_bool,
    "count_per_image": int,
    "n": int,
    "tol": float,
    "bins": int,
    "blend_probs": _parse_probs,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="layermix",
        description="Layered fractal-mixing augmentation and robustness-metric toolkit.",
    )
    parser.add_argument("--version", action="version", version=f"layermix {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("augment", help="augment a directory of images")
    p.add_argument("--input", required=True, help="directory of input images (PNG/JPEG)")
    p.add_argument("--output", required=True, help="directory for augmented PNGs")
    p.add_argument("--fractals", required=True, help="mixing-picture bank directory")
    p.add_argument("--magnitude", type=int, default=None, help="augmentation magnitude 0..10 (default 8)")
    p.add_argument("--beta", type=float, default=None, help="blending ratio, > 0 (default 3)")
    p.add_argument("--seed", type=int, default=None, help="base seed (default 0)")
    p.add_argument("--grayscale-fractals", type=_parse_bool, default=None, metavar="BOOL",
                   help="serve bank entries as grayscale (default true)")
    p.add_argument("--count-per-image", type=int, default=None, help="augmentations per input (default 1)")
    p.add_argument("--preview-grid", default=None, metavar="PATH",
                   help="also write a (original | layer 1 | layer 2 | layer 3) preview image")
    p.add_argument("--config", default=None, help="INI config file (or a prior manifest.json) supplying defaults")

    p = sub.add_parser("selfcheck", help="verify the sampling distributions")
    p.add_argument("--n", type=int, default=None, help="draws per check (default 1000000)")
    p.add_argument("--seed", type=int, default=None, help="seed (default 0)")
    p.add_argument("--blend-probs", type=_parse_probs, default=None, metavar="P1,P2,P3,P4",
                   help="override the sampled blend probabilities (checked against the published defaults)")
    p.add_argument("--config", default=None, help="INI config file supplying defaults")

    p = sub.add_parser("covariance", help="analytic vs Monte-Carlo auto-covariance")
    p.add_argument("--stats", required=True, help="JSON file with mu (KxS), sigma (KxS), probs (K)")
    p.add_argument("--pipeline", choices=[PIPELINE_SHARED, PIPELINE_IID], default=None,
                   help="generator structure (default layermix)")
    p.add_argument("--n", type=int, default=None, help="Monte-Carlo trials (default 1000000)")
    p.add_argument("--seed", type=int, default=None, help="seed (default 0)")
    p.add_argument("--tol", type=float, default=None, help="max abs deviation to pass (default 0.02)")
    p.add_argument("--out", default=None, help="write the report JSON here")
    p.add_argument("--config", default=None, help="INI config file supplying defaults")

    p = sub.add_parser("evaluate", help="compute metrics over a JSONL prediction log")
    p.add_argument("--log", required=True, help="JSONL prediction log")
    p.add_argument("--metric", choices=["mce", "mfp", "mt5d", "rms", "all"], default=None,
                   help="metric to compute (default all)")
    p.add_argument("--mode", choices=[m.value for m in FlipMode], default=None,
                   help="flip-probability mode (default temporal)")
    p.add_argument("--bins", type=int, default=None, help="adaptive calibration bins (default 15)")
    p.add_argument("--baseline", default=None, help="baseline JSONL log for normalized mCE")
    p.add_argument("--out", default=None, help="write results JSON here")
    p.add_argument("--config", default=None, help="INI config file supplying defaults")

    p = sub.add_parser("fractal-prep", help="grayscale a bank and pin its order")
    p.add_argument("--input", required=True, help="directory of source images")
    p.add_argument("--output", required=True, help="directory for grayscale PNGs")
    p.add_argument("--manifest", required=True, help="manifest path (one relative path per line)")
    p.add_argument("--config", default=None, help="INI config file supplying defaults")

    return parser


def _load_config_file(path: str, command: str) -> dict:
    if not os.path.exists(path):
        raise OSError(f"config file not found: {path}")
    if path.endswith(".json"):
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
        raw = obj.get("config", obj) if isinstance(obj, dict) else None
        if not isinstance(raw, dict):
            raise ParameterError(f"config JSON must be an object: {path}")
    else:
        ini = configparser.ConfigParser()
        ini.read(path)
        if not ini.has_section(command):
            return {}
        raw = dict(ini.items(command))
    out = {}
    for key, value in raw.items():
        key = key.replace("-", "_")
        if key in _COERCERS and isinstance(value, str):
            try:
                value = _COERCERS[key](value)
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise ParameterError(f"config key {key!r}: {exc}") from exc
        out[key] = value
    return out


def _effective_options(args: argparse.Namespace) -> dict:
    command = args.command
    opts = dict(_DEFAULTS.get(command, {}))
    if getattr(args, "config", None):
        file_values = _load_config_file(args.config, command)
        for key, value in file_values.items():
            if key in ("command", "config"):
                continue
            opts[key] = value
    for key, value in vars(args).items():
        if key in ("command", "config"):
            continue
        if value is not None:
            opts[key] = value
    return opts


def _sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _write_json_atomic(path: str, obj):
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)


# ---------------------------------------------------------------------------
# augment


def _preview_grid(img, bank, cfg) -> np.ndarray:
    panels = [img]
    for exit_layer in (0, 1, 2):
        stream = RngStream(cfg.seed, _PREVIEW_STREAM_BASE + exit_layer)
        panels.append(layermix(img, bank, cfg, stream, force_exit=exit_layer).image)
    sep = np.ones((img.shape[0], 2, img.shape[2]))
    parts = []
    for i, panel in enumerate(panels):
        if i:
            parts.append(sep)
        parts.append(panel)
    return np.concatenate(parts, axis=1)


def cmd_augment(opts: dict) -> int:
    started = time.time()
    cfg = PipelineConfig(
        magnitude=opts["magnitude"],
        blending_ratio=opts["beta"],
        grayscale_fractals=opts["grayscale_fractals"],
        seed=opts["seed"],
    )
    count = int(opts["count_per_image"])
    if count < 1:
        raise ParameterError(f"count-per-image must be >= 1, got {count}")
    if not os.path.isdir(opts["input"]):
        raise OSError(f"input directory not found: {opts['input']}")
    inputs = list_image_files(opts["input"])
    if not inputs:
        raise OSError(f"no input images under {opts['input']}")
    bank = load_bank(opts["fractals"], grayscale=cfg.grayscale_fractals)

    os.makedirs(opts["output"], exist_ok=True)
    outputs = []
    for index, rel in enumerate(inputs):
        img = load_image(os.path.join(opts["input"], rel))
        stem, _ext = os.path.splitext(rel)
        for k in range(count):
            sample = augment_one(img, bank, cfg, index * count + k)
            out_rel = f"{stem}__aug{k}.png"
            out_path = os.path.join(opts["output"], out_rel)
            os.makedirs(os.path.dirname(out_path) or ".", exist_ok=True)
            save_image(out_path, sample.image)
            outputs.append((out_rel, out_path))

    if opts.get("preview_grid"):
        first = load_image(os.path.join(opts["input"], inputs[0]))
        save_image(opts["preview_grid"], _preview_grid(first, bank, cfg))

    manifest = {
        "command": "augment",
        "version": __version__,
        "seed": cfg.seed,
        "config": {
            "input": opts["input"],
            "output": opts["output"],
            "fractals": opts["fractals"],
            "magnitude": cfg.magnitude,
            "beta": cfg.blending_ratio,
            "seed": cfg.seed,
            "grayscale_fractals": cfg.grayscale_fractals,
            "count_per_image": count,
        },
        "inputs": inputs,
        "outputs": [
            {"path": rel, "sha256": _sha256(path)} for rel, path in outputs
        ],
        "counters": {"images": len(inputs), "outputs": len(outputs), "bank_entries": bank.count},
        "elapsed_seconds": round(time.time() - started, 3),
    }
    _write_json_atomic(os.path.join(opts["output"], "manifest.json"), manifest)
    print(f"augmented {len(inputs)} images x{count} -> {len(outputs)} files in {opts['output']}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# selfcheck


def _chi2_sf_2dof(x: float) -> float:
    """Survival function of chi-square with 2 dof (exact closed form)."""
    return math.exp(-x / 2.0)


def cmd_selfcheck(opts: dict) -> int:
    n = int(opts["n"])
    if n < 1000:
        raise ParameterError(f"selfcheck needs n >= 1000, got {n}")
    seed = int(opts["seed"])
    rows = []

    moments = conic_weight_moments(3.0)
    a, b = conic_weight_samples(RngStream(seed, 1), 3.0, n)
    for name, observed, expected, var in (
        ("conic mean(a)", float(a.mean()), moments["mean_a"], moments["var_a"]),
        ("conic mean(b)", float(b.mean()), moments["mean_b"], moments["var_b"]),
        ("conic mean(a+b)", float((a + b).mean()), moments["mean_sum"], moments["var_sum"]),
    ):
        tol = 4.0 * math.sqrt(var / n)
        rows.append((name, observed, expected, tol, abs(observed - expected) <= tol))

    probs = opts.get("blend_probs") or tuple(w.probability for w in DEFAULT_BLEND_WEIGHTS)
    cfg_weights = PipelineConfig(blend_probabilities=tuple(probs)).blend_weights()
    idx = blend_method_samples(RngStream(seed, 2), cfg_weights, n)
    for method_index, ref in enumerate(DEFAULT_BLEND_WEIGHTS):
        observed = float(np.mean(idx == method_index))
        tol = 4.0 * math.sqrt(ref.probability * (1 - ref.probability) / n)
        rows.append(
            (f"blend freq {ref.tag.value}", observed, ref.probability, tol,
             abs(observed - ref.probability) <= tol)
        )

    exits = choose_layer_exit(RngStream(seed, 3), size=n)
    counts = np.bincount(exits, minlength=3)
    chi2 = float(((counts - n / 3.0) ** 2 / (n / 3.0)).sum())
    p_value = _chi2_sf_2dof(chi2)
    rows.append(("exit-layer uniformity p-value", p_value, 0.01, 0.0, p_value > 0.01))

    width = max(len(r[0]) for r in rows)
    all_pass = True
    for name, observed, expected, tol, ok in rows:
        all_pass &= ok
        status = "PASS" if ok else "FAIL"
        bound = f" (tol {tol:.2e})" if tol else " (threshold)"
        print(f"{status}  {name:<{width}}  observed {observed:.6f}  expected {expected:.6f}{bound}")
    print(f"selfcheck: {'all checks passed' if all_pass else 'CHECKS FAILED'} (n={n})")
    return EXIT_OK if all_pass else EXIT_CHECK_FAILED


# ---------------------------------------------------------------------------
# covariance


def _load_stats(path: str) -> TransformStats:
    if not os.path.exists(path):
        raise OSError(f"stats file not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
        return TransformStats(
            mu=np.asarray(obj["mu"], dtype=np.float64),
            sigma=np.asarray(obj["sigma"], dtype=np.float64),
            probs=np.asarray(obj["probs"], dtype=np.float64),
        )
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ParameterError(f"malformed stats file {path}: {exc}") from exc


def cmd_covariance(opts: dict) -> int:
    stats = _load_stats(opts["stats"])
    n = int(opts["n"])
    tol = float(opts["tol"])
    report = compare_covariances(opts["pipeline"], stats, n, RngStream(int(opts["seed"]), 0))
    if opts.get("out"):
        with open(opts["out"], "w", encoding="utf-8") as fh:
            fh.write(report.to_json() + "\n")
    np.set_printoptions(precision=6, suppress=True)
    print(f"pipeline: {opts['pipeline']}  trials: {n}")
    print("analytic:")
    print(np.asarray(report.analytic))
    print("empirical:")
    print(np.asarray(report.empirical))
    ok = report.max_abs_deviation <= tol
    print(f"max abs deviation: {report.max_abs_deviation:.6f} (tol {tol}) -> {'PASS' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


# ---------------------------------------------------------------------------
# evaluate


def cmd_evaluate(opts: dict) -> int:
    records = read_log(opts["log"])
    if not records:
        raise ParameterError(f"log {opts['log']} contains no records")
    baseline = read_log(opts["baseline"]) if opts.get("baseline") else None
    metric = opts["metric"]
    mode = FlipMode(opts["mode"])
    bins = int(opts["bins"])

    corr_records = [r for r in records if r.corruption is not None and r.severity is not None]
    seq_records = [r for r in records if r.sequence_id is not None]

    results: dict[str, float] = {}
    skipped: dict[str, str] = {}

    def run(name: str, fn):
        if metric == "all":
            try:
                results[name] = fn()
            except (ParameterError, IncompleteGridError) as exc:
                skipped[name] = str(exc)
        else:
            results[name] = fn()

    if metric in ("mce", "all"):
        base = [r for r in baseline or [] if r.corruption is not None] or None
        run("mce", lambda: mean_corruption_error(corr_records, base))
    if metric in ("mfp", "all"):
        run("mfp", lambda: mean_flip_probability(seq_records, mode))
    if metric in ("mt5d", "all"):
        run("mt5d", lambda: mean_top5_distance(seq_records))
    if metric in ("rms", "all"):
        run("rms", lambda: rms_calibration_error(records, bins))

    for name in ("mce", "mfp", "mt5d", "rms"):
        if name in results:
            print(f"{name:>5}: {results[name]:.6f}")
        elif name in skipped:
            print(f"{name:>5}: skipped ({skipped[name]})")
    if opts.get("out"):
        _write_json_atomic(opts["out"], {"log": opts["log"], "results": results})
    return EXIT_OK


# ---------------------------------------------------------------------------
# fractal-prep


def cmd_fractal_prep(opts: dict) -> int:
    if not os.path.isdir(opts["input"]):
        raise OSError(f"input directory not found: {opts['input']}")
    candidates = list_image_files(opts["input"])
    os.makedirs(opts["output"], exist_ok=True)
    written = []
    skipped = 0
    for rel in candidates:
        try:
            img = load_image(os.path.join(opts["input"], rel))
        except Exception as exc:
            skipped += 1
            print(f"warning: skipping undecodable {rel!r}: {exc}", file=sys.stderr)
            continue
        stem, _ext = os.path.splitext(rel)
        out_rel = stem + ".png"
        out_path = os.path.join(opts["output"], out_rel)
        os.makedirs(os.path.dirname(out_path) or ".", exist_ok=True)
        save_image(out_path, grayscale(img))
        written.append(out_rel)
    if not written:
        raise EmptyBankError(f"no decodable images under {opts['input']}")
    manifest_dir = os.path.dirname(opts["manifest"])
    if manifest_dir:
        os.makedirs(manifest_dir, exist_ok=True)
    with open(opts["manifest"], "w", encoding="utf-8") as fh:
        for rel in written:
            fh.write(rel + "\n")
        fh.write(f"# skipped: {skipped} of {len(candidates)}\n")
    print(f"prepared {len(written)} grayscale images ({skipped} skipped) -> {opts['output']}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# dispatch

_HANDLERS = {
    "augment": cmd_augment,
    "selfcheck": cmd_selfcheck,
    "covariance": cmd_covariance,
    "evaluate": cmd_evaluate,
    "fractal-prep": cmd_fractal_prep,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors, 0 on --help
        return int(exc.code or 0)
    try:
        opts = _effective_options(args)
        return _HANDLERS[args.command](opts)
    except LogSchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IncompleteGridError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INCOMPLETE_GRID
    except EmptyBankError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EMPTY_BANK
    except (ParameterError, ShapeMismatchError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


def entrypoint():
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
