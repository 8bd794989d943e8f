"""End-to-end acceptance gate.

One test per release criterion. Each prints a single [PASS]/[FAIL] line with
the measured numbers (visible even under pytest's output capture) and then
asserts, so a red criterion is a red test.
"""

import json
import time

import numpy as np
import pytest

from conftest import fd_grad, rel_err
from nfc.analysis import gaussian_posterior_oracle, psnr
from nfc.cli import main as cli_main
from nfc.grid import SeededRng, gaussian_image
from nfc.operators import (Measurement, degrade, make_dense, make_downsample,
                           make_gaussian_blur, make_identity, make_inpaint,
                           make_motion_blur)
from nfc.prior import ScoreModel
from nfc.sampler import IntermediatePosterior, run
from nfc.scenes import scene_prior_means
from nfc.schedules import (ScheduleConfig, ContinuationState, lambda_at,
                           omega_at, sigma_at)
from nfc.spectral import GuidanceWeights, guided_loss, guided_loss_grad
from nfc.theorems import verify_all


def _emit(capsys, ok, text):
    line = f"[{'PASS' if ok else 'FAIL'}] {text}"
    with capsys.disabled():
        print(line)
    assert ok, line


# ---------------------------------------------------------------------------
# shared 64x64 mixture-prior deblurring benchmark (criteria 4 and 5)
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def benchmark():
    shape = (1, 64, 64)
    means = scene_prior_means(shape, SeededRng(7), 3)
    model = ScoreModel(means, [0.1] * 3)
    truth = means[0]
    op = make_gaussian_blur(shape)
    meas = degrade(truth, op, 0.05, SeededRng(11))
    cfg = ScheduleConfig(n_outer=50)
    t0 = time.time()
    finals = {}
    entries = {}
    for mode in ("nfc", "full_band", "no_haar_fusion"):
        finals[mode] = []
        entries[mode] = []
        for seed in range(10):
            x, rec = run(model, op, meas, cfg, SeededRng(seed), mode=mode,
                         truth=truth)
            finals[mode].append(psnr(x, truth))
            entries[mode].append(rec.entries)
    return {"finals": finals, "entries": entries, "elapsed": time.time() - t0}


def test_criterion_1_theorem_suite_green(capsys):
    t0 = time.time()
    reports = verify_all()
    elapsed = time.time() - t0
    n_pass = sum(r.passed for r in reports)
    ok = n_pass == 10 and elapsed <= 300.0
    _emit(capsys, ok,
          f"criterion 1: theorem suite {n_pass}/10 green in {elapsed:.1f}s "
          f"(limit 300s)")


def test_criterion_2_gradient_exactness(capsys):
    t0 = time.time()
    shape = (1, 16, 16)
    seed_rng = SeededRng(101)
    n = int(np.prod(shape))
    ops = {
        "identity": make_identity(shape),
        "gaussian_blur": make_gaussian_blur(shape),
        "motion_blur": make_motion_blur(shape),
        "downsample": make_downsample(shape, 4),
        "inpaint_mask": make_inpaint(shape, 0.3, seed_rng.spawn(0)),
        "dense_matrix": make_dense(seed_rng.spawn(1).normal((n, n)) / 16.0,
                                   shape, shape),
    }
    worst = 0.0
    for kind, op in ops.items():
        for t in range(20):
            r = seed_rng.spawn(1000 + 20 * len(kind) + t)
            x = gaussian_image(r, shape, 0.0, 1.0)
            y = gaussian_image(r, op.output_shape, 0.0, 1.0)
            w = GuidanceWeights(0.6, 0.25)
            g = guided_loss_grad(x, y, op, w)
            fg = fd_grad(lambda v: guided_loss(v, y, op, w), x)
            worst = max(worst, rel_err(g, fg))
            state = ContinuationState(k=3, sigma_k=1.0, omega_frac=0.6,
                                      lam=0.25, tau=0.4, w_coarse=1.0,
                                      w_detail=0.1)
            meas = Measurement(y=y, sigma_y=0.05, operator_kind=op.kind, seed=0)
            post = IntermediatePosterior(meas, op,
                                         gaussian_image(r, shape, 0.0, 0.5),
                                         state)
            worst = max(worst, rel_err(post.grad_log_density(x),
                                       fd_grad(post.log_density, x)))
    elapsed = time.time() - t0
    ok = worst <= 1e-5 and elapsed <= 60.0
    _emit(capsys, ok,
          f"criterion 2: gradient vs finite differences worst rel err "
          f"{worst:.2e} (tol 1e-05) over 6 kinds x 20 instances in {elapsed:.1f}s")


def test_criterion_3_gaussian_posterior_oracle(capsys):
    t0 = time.time()
    shape = (1, 16, 16)
    r = SeededRng(5)
    mu = gaussian_image(r, shape, 0.5, 0.2)
    s = 2.0
    model = ScoreModel.gaussian(mu, s)
    truth = mu + s * r.normal(shape)
    cfg = ScheduleConfig(n_outer=50, detail_end=1.0, eta_base=1.0)
    rels = {}
    for name, op in (("identity", make_identity(shape)),
                     ("gaussian_blur", make_gaussian_blur(shape))):
        meas = degrade(truth, op, 0.05, SeededRng(99))
        oracle = gaussian_posterior_oracle(mu, s, op, meas.y, 0.05)
        mean = np.zeros(shape)
        for seed in range(64):
            mean += run(model, op, meas, cfg, SeededRng(seed))[0]
        mean /= 64.0
        rels[name] = rel_err(mean, oracle)
    elapsed = time.time() - t0
    ok = all(v <= 0.05 for v in rels.values()) and elapsed <= 600.0
    _emit(capsys, ok,
          f"criterion 3: sampler mean vs analytic posterior rel err "
          f"identity {rels['identity']:.4f}, blur {rels['gaussian_blur']:.4f} "
          f"(tol 0.05, 64 seeds) in {elapsed:.1f}s")


def test_criterion_4_directional_ablation(capsys, benchmark):
    med = {m: float(np.median(v)) for m, v in benchmark["finals"].items()}
    d_nofuse = med["nfc"] - med["no_haar_fusion"]
    d_full = med["nfc"] - med["full_band"]
    ok = (d_nofuse >= 0.0 and d_full >= 0.5
          and benchmark["elapsed"] <= 1200.0)
    _emit(capsys, ok,
          f"criterion 4: median PSNR nfc {med['nfc']:.2f} dB, "
          f"vs no_haar_fusion {d_nofuse:+.2f} dB (need >= 0), "
          f"vs full_band {d_full:+.2f} dB (need >= +0.5) "
          f"in {benchmark['elapsed']:.0f}s")


def test_criterion_5_trajectory_monotonicity(capsys, benchmark):
    finals = benchmark["finals"]["nfc"]
    entries = benchmark["entries"]["nfc"]
    improved = sum(f >= e[0]["psnr_fused"] for f, e in zip(finals, entries))
    gains = [e[-1]["psnr_refined"] - e[-1]["psnr_unrefined"] for e in entries]
    med_gain = float(np.median(gains))
    ok = improved >= 9 and med_gain > 0.0
    _emit(capsys, ok,
          f"criterion 5: final >= first-step PSNR for {improved}/10 seeds "
          f"(need >= 9); refined - unrefined at final step median "
          f"{med_gain:+.3f} dB (need > 0)")


def test_criterion_6_schedule_endpoints(capsys):
    cfg = ScheduleConfig()
    checks = [
        sigma_at(cfg, cfg.n_outer - 1) == 100.0,
        sigma_at(cfg, 0) == 0.1,
        omega_at(cfg, 100.0) == 0.4,
        omega_at(cfg, 0.1) == 1.0,
        lambda_at(cfg, 0.0) == 0.35,
        lambda_at(cfg, 1.0) == 0.0,
    ]
    _emit(capsys, all(checks),
          f"criterion 6: schedule endpoints exact "
          f"(sigma {{100, 0.1}}, omega {{0.4, 1.0}}, lambda {{0.35, 0}}): "
          f"{sum(checks)}/6 equalities hold")


def test_criterion_7_cli_determinism(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("NFC_DETERMINISTIC", "1")
    config = {
        "task": "gaussian_deblur",
        "shape": [1, 16, 16],
        "scene": "shapes",
        "scene_seed": 7,
        "sigma_y": 0.05,
        "degrade_seed": 0,
        "prior": {"kind": "gaussian", "mean": "scene", "std": 1.0},
        "schedule": {"n_outer": 3},
        "seeds": [0, 1],
    }
    cfg_path = tmp_path / "config.json"
    cfg_path.write_text(json.dumps(config))
    out = tmp_path / "out"
    trees = []
    for _ in range(2):
        codes = [
            cli_main(["--config", str(cfg_path), "--out", str(out), "degrade"]),
            cli_main(["--config", str(cfg_path), "--out", str(out), "restore"]),
            cli_main(["--config", str(cfg_path), "--out", str(out), "ablate"]),
            cli_main(["--out", str(out), "report",
                      "--run-dir", str(out / "ablate")]),
        ]
        assert codes == [0, 0, 0, 0]
        trees.append({p.relative_to(out): p.read_bytes()
                      for p in sorted(out.rglob("*")) if p.is_file()})
    same_names = list(trees[0]) == list(trees[1])
    diffs = [str(rel) for rel in trees[0]
             if trees[0][rel] != trees[1].get(rel)] if same_names else ["<tree>"]
    ok = same_names and not diffs
    _emit(capsys, ok,
          f"criterion 7: repeated degrade/restore/ablate/report byte-identical "
          f"across {len(trees[0])} files"
          + ("" if ok else f"; differing: {diffs[:5]}"))
