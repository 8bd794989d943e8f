"""Intermediate posteriors, Langevin refinement, and the full outer loop.

Each outer level i works on a clean running estimate:

  (a) progressively re-noise / PF-ODE-denoise it over the inner sigma
      sub-ladder (the first sub-level re-noising realizes the previous
      level's hand-off draw, so noise is injected exactly once per level),
  (b) refine the resulting anchor with T unadjusted Langevin steps under
      the band-limited intermediate posterior,
  (c) commit the refinement through Haar fusion (coarse fully, details
      through the gate),

and hand the fused estimate to level i - 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import haar, schedules
from .grid import ParameterError, SeededRng, check_image, check_same_shape
from .operators import LinearOperator, Measurement
from .prior import ScoreModel, SolverConfig, forward_noise, pf_ode_denoise
from .spectral import GuidanceWeights, guided_loss, guided_loss_grad

DIVERGENCE_LIMIT = 1e6


class DivergenceError(RuntimeError):
    """Langevin iterate escaped the guard radius; carries step context."""

    def __init__(self, outer_index: int, inner_index: int, eta: float, norm: float):
        self.outer_index = outer_index
        self.inner_index = inner_index
        self.eta = eta
        self.norm = norm
        super().__init__(
            f"Langevin divergence at outer={outer_index} inner={inner_index} "
            f"eta={eta:.3e} |x|={norm:.3e}")


@dataclass
class IntermediatePosterior:
    """pi_k: band-limited likelihood at temperature tau times a Gaussian
    anchor N(x_hat, sigma_k^2 I)."""

    measurement: Measurement
    operator: LinearOperator
    x_hat: np.ndarray
    state: schedules.ContinuationState

    @property
    def weights(self) -> GuidanceWeights:
        return GuidanceWeights(self.state.omega_frac, self.state.lam)

    def log_density(self, x: np.ndarray) -> float:
        """log pi_k up to its normalizing constant (finite-difference oracle hook)."""
        s = self.state
        data = guided_loss(x, self.measurement.y, self.operator, self.weights)
        anchor = float(np.sum((x - self.x_hat) ** 2))
        return -data / (2.0 * s.tau**2) - anchor / (2.0 * s.sigma_k**2)

    def grad_log_density(self, x: np.ndarray) -> np.ndarray:
        s = self.state
        x = check_image(x)
        check_same_shape(x, self.x_hat)
        g = guided_loss_grad(x, self.measurement.y, self.operator, self.weights)
        return -g / (2.0 * s.tau**2) - (x - self.x_hat) / s.sigma_k**2


def langevin_refine(posterior: IntermediatePosterior, x_init: np.ndarray, n_steps: int,
                    cfg: schedules.ScheduleConfig, rng: SeededRng,
                    noise_scale: float = 1.0, outer_index: int = -1) -> np.ndarray:
    """T unadjusted Langevin steps x <- x + eta * grad log pi + sqrt(2 eta) * eps.

    noise_scale = 0 gives the deterministic (pure ascent) variant used by the
    convexity tests.
    """
    if n_steps < 1:
        raise ParameterError(f"n_steps must be >= 1, got {n_steps}")
    x = check_image(x_init).copy()
    tau = posterior.state.tau
    for ell in range(n_steps):
        eta = schedules.langevin_step_size(cfg, tau, ell)
        x = x + eta * posterior.grad_log_density(x)
        if noise_scale != 0.0:
            x = x + noise_scale * np.sqrt(2.0 * eta) * rng.normal(x.shape)
        norm = float(np.sqrt(np.sum(x * x)))
        if not np.isfinite(norm) or norm > DIVERGENCE_LIMIT:
            raise DivergenceError(outer_index, ell, eta, norm)
    return x


@dataclass
class RunRecord:
    """Per-outer-step trajectory log plus the final estimate."""

    entries: list = field(default_factory=list)
    final: np.ndarray | None = None

    def to_jsonl(self) -> str:
        import json

        lines = [json.dumps(e, sort_keys=True) for e in self.entries]
        return "\n".join(lines) + "\n"


def initial_estimate(operator: LinearOperator, y: np.ndarray) -> np.ndarray:
    """Back-projection A^T y with the least-squares scalar rescaling
    argmin_a ||a * A A^T y - y||."""
    bp = operator.adjoint(y)
    abp = operator.apply(bp)
    denom = float(np.sum(abp * abp))
    if denom <= 0.0:
        return bp
    scale = float(np.sum(abp * y)) / denom
    return scale * bp


def _metrics_entry(entry: dict, x: np.ndarray, truth: np.ndarray | None, prefix: str) -> None:
    if truth is None:
        return
    from .analysis import psnr

    entry[f"psnr_{prefix}"] = psnr(x, truth)


def outer_step(model: ScoreModel, operator: LinearOperator, measurement: Measurement,
               cfg: schedules.ScheduleConfig, i: int, x_clean: np.ndarray, rng: SeededRng,
               mode: str = "nfc", truth: np.ndarray | None = None):
    """One outer level: inner denoise ladder, Langevin refinement, Haar commit.

    Returns (fused clean estimate for level i - 1, record entry).
    """
    state = schedules.resolve_state(cfg, i, measurement.sigma_y)
    if mode == "full_band":
        state = schedules.ContinuationState(
            k=state.k, sigma_k=state.sigma_k, omega_frac=1.0, lam=0.0,
            tau=state.tau, w_coarse=state.w_coarse,
            w_detail=schedules.detail_gate_at(cfg, cfg.n_outer - 1 - i, cfg.n_outer - 1, 0.0))
    elif mode not in ("nfc", "no_haar_fusion"):
        raise ParameterError(f"unknown ablation mode {mode!r}")

    solver_cfg = SolverConfig(n_steps=cfg.n_solver)
    sub_sigmas = np.geomspace(state.sigma_k, cfg.sigma_min, cfg.n_solver)
    est = x_clean
    for sig in sub_sigmas:
        est = pf_ode_denoise(model, forward_noise(est, sig, rng), sig, solver_cfg)
    x_hat = est

    posterior = IntermediatePosterior(measurement, operator, x_hat, state)
    loss_before = guided_loss(x_hat, measurement.y, operator, posterior.weights)
    x_ref = langevin_refine(posterior, x_hat, cfg.n_langevin, cfg, rng, outer_index=i)
    loss_after = guided_loss(x_ref, measurement.y, operator, posterior.weights)

    if mode == "no_haar_fusion":
        fused = x_ref
    else:
        z_fuse = haar.fuse(haar.haar_forward(x_hat), haar.haar_forward(x_ref),
                           state.w_coarse, state.w_detail)
        fused = haar.haar_inverse(z_fuse)

    entry = {
        "k": i,
        "sigma_k": state.sigma_k,
        "omega_frac": state.omega_frac,
        "lambda": state.lam,
        "tau": state.tau,
        "w_detail": state.w_detail,
        "guided_loss_before": loss_before,
        "guided_loss_after": loss_after,
    }
    _metrics_entry(entry, x_hat, truth, "unrefined")
    _metrics_entry(entry, x_ref, truth, "refined")
    _metrics_entry(entry, fused, truth, "fused")
    return fused, entry


def run(model: ScoreModel, operator: LinearOperator, measurement: Measurement,
        cfg: schedules.ScheduleConfig, rng: SeededRng, mode: str = "nfc",
        truth: np.ndarray | None = None,
        on_step=None) -> tuple[np.ndarray, RunRecord]:
    """Full bi-continuation sampling loop, outer levels n_outer - 1 down to 0."""
    record = RunRecord()
    x_est = initial_estimate(operator, measurement.y)
    for i in range(cfg.n_outer - 1, -1, -1):
        x_est, entry = outer_step(model, operator, measurement, cfg, i, x_est, rng,
                                  mode=mode, truth=truth)
        record.entries.append(entry)
        if on_step is not None:
            on_step(i, x_est)
    record.final = x_est
    return x_est, record
