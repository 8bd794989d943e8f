"""Batch command-line front end: degrade, restore, ablate, verify, report.

All machine-readable outputs are JSON (sorted keys); human summaries are
aligned text. Every resolved configuration value is echoed into the run
manifest so output directories can be regenerated bit-exactly.

Exit codes: 0 success, 1 verification/acceptance failure, 2 config error,
3 sampler divergence.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import report as report_mod
from .analysis import psnr, ssim
from .grid import GridError, SeededRng, load_png, load_tensor, save_png, save_tensor
from .operators import (LinearOperator, Measurement, degrade, make_downsample,
                        make_gaussian_blur, make_identity, make_inpaint,
                        make_motion_blur)
from .prior import ScoreModel
from .sampler import DivergenceError, run
from .scenes import scene_prior_means, synthetic_scene
from .schedules import ScheduleConfig

TASKS = ("identity", "sr4", "gaussian_deblur", "motion_deblur", "inpaint_random")
MODES = ("nfc", "full_band", "no_haar_fusion")


class ConfigError(ValueError):
    pass


def _load_config(path) -> dict:
    try:
        with open(path) as f:
            cfg = json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if cfg.get("task", "identity") not in TASKS:
        raise ConfigError(f"task must be one of {TASKS}, got {cfg.get('task')!r}")
    if cfg.get("mode", "nfc") not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {cfg.get('mode')!r}")
    return cfg


def _schedule_from(cfg: dict) -> ScheduleConfig:
    try:
        return ScheduleConfig(**cfg.get("schedule", {}))
    except (TypeError, GridError) as exc:
        raise ConfigError(f"bad schedule config: {exc}") from exc


def _shape_from(cfg: dict) -> tuple:
    shape = tuple(cfg.get("shape", [1, 64, 64]))
    if len(shape) != 3:
        raise ConfigError(f"shape must be (C, H, W), got {shape}")
    return shape


def _truth_from(cfg: dict) -> np.ndarray:
    shape = _shape_from(cfg)
    if "image_path" in cfg:
        img = load_png(cfg["image_path"])
        if img.shape != shape:
            raise ConfigError(f"image {cfg['image_path']} has shape {img.shape}, expected {shape}")
        return img
    scene = cfg.get("scene", "shapes")
    return synthetic_scene(scene, shape, SeededRng(int(cfg.get("scene_seed", 7))))


def _operator_from(cfg: dict) -> LinearOperator:
    shape = _shape_from(cfg)
    task = cfg.get("task", "identity")
    seed = int(cfg.get("operator_seed", 1))
    if task == "identity":
        return make_identity(shape)
    if task == "sr4":
        return make_downsample(shape, 4)
    if task == "gaussian_deblur":
        return make_gaussian_blur(shape)
    if task == "motion_deblur":
        return make_motion_blur(shape)
    if task == "inpaint_random":
        return make_inpaint(shape, 0.3, SeededRng(seed))
    raise ConfigError(f"unknown task {task!r}")


def _prior_from(cfg: dict) -> ScoreModel:
    shape = _shape_from(cfg)
    spec = cfg.get("prior", {"kind": "gaussian", "std": 1.0})
    if "path" in spec:
        return ScoreModel.load_json(spec["path"])
    kind = spec.get("kind", "gaussian")
    if kind == "gaussian":
        if spec.get("mean", "scene") == "scene":
            mean = synthetic_scene(cfg.get("scene", "shapes"), shape,
                                   SeededRng(int(cfg.get("scene_seed", 7))))
        else:
            mean = np.full(shape, 0.5)
        return ScoreModel.gaussian(mean, float(spec.get("std", 1.0)))
    if kind == "gmm":
        n = int(spec.get("n_components", 3))
        seed = int(spec.get("seed", cfg.get("scene_seed", 7)))
        means = scene_prior_means(shape, SeededRng(seed), n)
        std = float(spec.get("component_std", 0.3))
        return ScoreModel(means, [std] * n)
    raise ConfigError(f"unknown prior kind {kind!r}")


def _maybe_png(path, x) -> None:
    if x.shape[0] in (1, 3):
        save_png(path, x)


def _write_json(path, doc) -> None:
    with open(path, "w") as f:
        json.dump(doc, f, sort_keys=True, indent=2)
        f.write("\n")


# ---------------------------------------------------------------------------
# degrade
# ---------------------------------------------------------------------------

def cmd_degrade(cfg: dict, out_dir: Path) -> int:
    d = out_dir / "degraded"
    d.mkdir(parents=True, exist_ok=True)
    truth = _truth_from(cfg)
    op = _operator_from(cfg)
    sigma_y = float(cfg.get("sigma_y", 0.05))
    seed = int(cfg.get("degrade_seed", 0))
    meas = degrade(truth, op, sigma_y, SeededRng(seed))

    save_tensor(d / "truth.nfct", truth)
    _maybe_png(d / "truth.png", truth)
    save_tensor(d / "y.nfct", meas.y)
    _maybe_png(d / "y.png", np.clip(meas.y, 0.0, 1.0))
    op.save_json(d / "operator.json")
    manifest = {
        "task": cfg.get("task", "identity"),
        "shape": list(truth.shape),
        "sigma_y": sigma_y,
        "degrade_seed": seed,
        "scene": cfg.get("scene", "shapes"),
        "scene_seed": int(cfg.get("scene_seed", 7)),
        "operator_file": "operator.json",
        "truth_file": "truth.nfct",
        "y_file": "y.nfct",
    }
    _write_json(d / "manifest.json", manifest)
    print(f"degrade: wrote {d}")
    return 0


def _load_degraded(out_dir: Path):
    d = out_dir / "degraded"
    man_path = d / "manifest.json"
    if not man_path.exists():
        raise ConfigError(f"no degraded manifest at {man_path}; run degrade first")
    with open(man_path) as f:
        manifest = json.load(f)
    op = LinearOperator.load_json(d / manifest["operator_file"])
    truth = load_tensor(d / manifest["truth_file"])
    y = load_tensor(d / manifest["y_file"])
    meas = Measurement(y=y, sigma_y=float(manifest["sigma_y"]),
                       operator_kind=op.kind, seed=int(manifest["degrade_seed"]))
    return manifest, op, truth, meas


# ---------------------------------------------------------------------------
# restore / ablate
# ---------------------------------------------------------------------------

def _n_workers(cfg: dict, args) -> int:
    if os.environ.get("NFC_DETERMINISTIC") == "1":
        return 1
    return max(1, int(getattr(args, "threads", 1) or 1))


def _restore_one(seed: int, model, op, meas, sched, mode, truth, seed_dir: Path,
                 dump_stride: int):
    seed_dir.mkdir(parents=True, exist_ok=True)

    def on_step(i, x_est):
        if dump_stride > 0 and i % dump_stride == 0:
            _maybe_png(seed_dir / f"step_{i:04d}.png", np.clip(x_est, 0.0, 1.0))

    x_final, record = run(model, op, meas, sched, SeededRng(seed), mode=mode,
                          truth=truth, on_step=on_step)
    save_tensor(seed_dir / "estimate.nfct", x_final)
    _maybe_png(seed_dir / "estimate.png", np.clip(x_final, 0.0, 1.0))
    report_mod.write_record(seed_dir / f"record_seed{seed}.jsonl", record)
    result = {"seed": seed, "psnr": psnr(x_final, truth)}
    if truth.shape[1] >= 11 and truth.shape[2] >= 11:
        result["ssim"] = ssim(x_final, truth)
    return result


def _run_seeds(cfg, args, out_sub: Path, mode: str):
    manifest, op, truth, meas = _load_degraded(Path(cfg["out"]))
    model = _prior_from(cfg)
    sched = _schedule_from(cfg)
    seeds = [int(s) for s in cfg.get("seeds", [0])]
    if getattr(args, "seed_list", None):
        seeds = [int(s) for s in args.seed_list.split(",")]
    if not seeds:
        raise ConfigError("seed list is empty")
    dump_stride = int(getattr(args, "dump_stride", None) or cfg.get("dump_stride", 0))

    workers = _n_workers(cfg, args)
    jobs = [(s, out_sub / f"seed_{s}") for s in seeds]
    if workers == 1:
        results = [_restore_one(s, model, op, meas, sched, mode, truth, sd, dump_stride)
                   for s, sd in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_restore_one, s, model, op, meas, sched, mode,
                                   truth, sd, dump_stride) for s, sd in jobs]
            results = [f.result() for f in futures]
    results.sort(key=lambda r: r["seed"])
    return results


def _aggregate(results: list) -> dict:
    psnrs = [r["psnr"] for r in results]
    agg = {
        "per_seed": results,
        "mean_psnr": float(np.mean(psnrs)),
        "median_psnr": float(np.median(psnrs)),
    }
    if all("ssim" in r for r in results):
        ssims = [r["ssim"] for r in results]
        agg["mean_ssim"] = float(np.mean(ssims))
        agg["median_ssim"] = float(np.median(ssims))
    return agg


def cmd_restore(cfg: dict, args, out_dir: Path) -> int:
    mode = cfg.get("mode", "nfc")
    sub = out_dir / "restore"
    results = _run_seeds(cfg, args, sub, mode)
    summary = {"mode": mode, "config": cfg, **_aggregate(results)}
    _write_json(sub / "summary.json", summary)
    print(f"restore[{mode}]: median PSNR {summary['median_psnr']:.2f} dB "
          f"over {len(results)} seed(s)")
    return 0


def cmd_ablate(cfg: dict, args, out_dir: Path) -> int:
    table = {}
    for mode in MODES:
        sub = out_dir / "ablate" / mode
        results = _run_seeds(cfg, args, sub, mode)
        table[mode] = _aggregate(results)
    _write_json(out_dir / "ablate" / "ablation_summary.json", table)
    lines = [f"{'mode':<16}{'median PSNR':>12}{'mean PSNR':>12}"]
    for mode in MODES:
        lines.append(f"{mode:<16}{table[mode]['median_psnr']:>12.3f}"
                     f"{table[mode]['mean_psnr']:>12.3f}")
    text = "\n".join(lines) + "\n"
    (out_dir / "ablate" / "ablation_summary.txt").write_text(text)
    print(text, end="")
    return 0


# ---------------------------------------------------------------------------
# verify / report
# ---------------------------------------------------------------------------

def cmd_verify(args, out_dir: Path) -> int:
    from .theorems import verify_all

    overrides = {}
    for item in args.tolerance or []:
        if "=" not in item:
            raise ConfigError(f"--tolerance expects name=value, got {item!r}")
        name, val = item.split("=", 1)
        overrides[name] = float(val)
    reports = verify_all(tolerance_overrides=overrides)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_json(out_dir / "verify.json", [r.to_dict() for r in reports])
    ok = True
    for r in reports:
        status = "PASS" if r.passed else "FAIL"
        print(f"[{status}] {r.theorem_id:<28} max violation {r.max_violation:.3e} "
              f"(tolerance {r.tolerance:.1e}, {r.instances} instances)")
        ok = ok and r.passed
    return 0 if ok else 1


def cmd_report(args, out_dir: Path) -> int:
    run_dir = Path(args.run_dir) if args.run_dir else out_dir
    written = report_mod.render_report(run_dir, out_dir / "report")
    for p in written:
        print(f"report: wrote {p}")
    if not written:
        print("report: no record files found", file=sys.stderr)
        return 2
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nfc", description=__doc__)
    ap.add_argument("--config", help="JSON run configuration")
    ap.add_argument("--out", help="output directory (overrides config)")
    ap.add_argument("--seed-list", dest="seed_list", help="comma-separated seeds")
    ap.add_argument("--dump-stride", dest="dump_stride", type=int,
                    help="write intermediate PNGs every N outer steps")
    ap.add_argument("--threads", type=int, default=1)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("degrade", "restore", "ablate"):
        sub.add_parser(name)
    pv = sub.add_parser("verify")
    pv.add_argument("--tolerance", action="append",
                    help="theorem_id=value override; repeatable")
    pr = sub.add_parser("report")
    pr.add_argument("--run-dir", dest="run_dir",
                    help="directory containing record_seed*.jsonl files")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            out_dir = Path(args.out or "verify_out")
            return cmd_verify(args, out_dir)
        if args.command == "report" and not args.config:
            out_dir = Path(args.out or ".")
            return cmd_report(args, out_dir)
        if not args.config:
            raise ConfigError(f"{args.command} requires --config")
        cfg = _load_config(args.config)
        if args.out:
            cfg["out"] = args.out
        if "out" not in cfg:
            raise ConfigError("output directory missing (config 'out' or --out)")
        out_dir = Path(cfg["out"])
        out_dir.mkdir(parents=True, exist_ok=True)
        if args.command == "degrade":
            return cmd_degrade(cfg, out_dir)
        if args.command == "restore":
            return cmd_restore(cfg, args, out_dir)
        if args.command == "ablate":
            return cmd_ablate(cfg, args, out_dir)
        if args.command == "report":
            return cmd_report(args, out_dir)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DivergenceError as exc:
        print(f"divergence: {exc}", file=sys.stderr)
        return 3
    except GridError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
