"""Run-record serialization and report rendering.

The report path emits delimited per-step tables (CSV) together with
matplotlib figures rendered to PNG files. Figures are written without
mutable metadata so identical runs produce byte-identical files.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .sampler import RunRecord

_FIG_KW = {"metadata": {"Software": None}}

STEP_FIELDS = ("k", "sigma_k", "omega_frac", "lambda", "tau", "w_detail",
               "guided_loss_before", "guided_loss_after",
               "psnr_unrefined", "psnr_refined", "psnr_fused")


def write_record(path, record: RunRecord) -> None:
    """JSON lines, one object per outer step."""
    with open(path, "w") as f:
        f.write(record.to_jsonl())


def read_record_entries(path) -> list:
    with open(path) as f:
        return [json.loads(line) for line in f if line.strip()]


def write_step_csv(path, entries: list) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=STEP_FIELDS, extrasaction="ignore")
        writer.writeheader()
        for e in entries:
            writer.writerow(e)


def _save(fig, path) -> None:
    fig.savefig(path, **_FIG_KW)
    plt.close(fig)


def render_schedule_figure(out_path, entries: list) -> None:
    steps = list(range(len(entries)))
    fig, axes = plt.subplots(2, 2, figsize=(9, 6))
    axes[0, 0].semilogy(steps, [e["sigma_k"] for e in entries])
    axes[0, 0].set_title("noise level")
    axes[0, 1].plot(steps, [e["omega_frac"] for e in entries], label="cutoff fraction")
    axes[0, 1].plot(steps, [e["lambda"] for e in entries], label="band weight")
    axes[0, 1].legend()
    axes[0, 1].set_title("frequency continuation")
    axes[1, 0].semilogy(steps, [e["tau"] for e in entries])
    axes[1, 0].set_title("temperature")
    axes[1, 1].plot(steps, [e["w_detail"] for e in entries])
    axes[1, 1].set_title("detail gate")
    for ax in axes.flat:
        ax.set_xlabel("outer step")
    fig.tight_layout()
    _save(fig, out_path)


def render_trajectory_figure(out_path, entries: list) -> None:
    steps = list(range(len(entries)))
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    axes[0].semilogy(steps, [e["guided_loss_before"] for e in entries], label="before refinement")
    axes[0].semilogy(steps, [e["guided_loss_after"] for e in entries], label="after refinement")
    axes[0].set_title("guided measurement loss")
    axes[0].legend()
    if "psnr_refined" in entries[0]:
        axes[1].plot(steps, [e["psnr_unrefined"] for e in entries], label="solver estimate")
        axes[1].plot(steps, [e["psnr_refined"] for e in entries], label="refined estimate")
        axes[1].plot(steps, [e["psnr_fused"] for e in entries], label="fused estimate")
        axes[1].set_ylabel("PSNR (dB)")
        axes[1].legend()
        axes[1].set_title("reconstruction quality")
    for ax in axes:
        ax.set_xlabel("outer step")
    fig.tight_layout()
    _save(fig, out_path)


def render_ablation_figure(out_path, table: dict) -> None:
    modes = sorted(table.keys())
    psnr = [table[m]["median_psnr"] for m in modes]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(modes, psnr)
    ax.set_ylabel("median PSNR (dB)")
    ax.set_title("ablation comparison")
    fig.tight_layout()
    _save(fig, out_path)


def render_report(run_dir, out_dir) -> list:
    """Render CSVs and figures for every record file under run_dir.

    Returns the list of written paths.
    """
    run_dir = Path(run_dir)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for rec_path in sorted(run_dir.rglob("record_seed*.jsonl")):
        entries = read_record_entries(rec_path)
        stem = rec_path.stem
        csv_path = out_dir / f"{stem}_steps.csv"
        write_step_csv(csv_path, entries)
        sched_path = out_dir / f"{stem}_schedule.png"
        render_schedule_figure(sched_path, entries)
        traj_path = out_dir / f"{stem}_trajectory.png"
        render_trajectory_figure(traj_path, entries)
        written += [csv_path, sched_path, traj_path]
    abl_path = run_dir / "ablation_summary.json"
    if abl_path.exists():
        with open(abl_path) as f:
            table = json.load(f)
        fig_path = out_dir / "ablation_comparison.png"
        render_ablation_figure(fig_path, table)
        written.append(fig_path)
    return written
