"""Continuation schedules: noise, cutoff, mixing weight, temperature,
Langevin step sizes, and the Haar detail gate.

Everything except the noise ladder is parameterized by log-sigma progress
p in [0, 1] (p = 0 at sigma_max, p = 1 at sigma_min), so schedule semantics
do not shift when the number of outer steps changes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import ParameterError


@dataclass(frozen=True)
class ScheduleConfig:
    n_outer: int = 200
    sigma_max: float = 100.0
    sigma_min: float = 0.1
    omega_start: float = 0.4
    omega_end: float = 1.0
    lambda_start: float = 0.35
    detail_start: float = 0.0      # d_s
    detail_end: float = 0.2        # d_e
    detail_gamma: float = 1.0
    constant_detail_gate: bool = False   # force w_detail = detail_end throughout
    eta_base: float = 0.5
    c_tau: float = 0.3
    n_langevin: int = 8            # inner refinement steps T
    n_solver: int = 5              # PF-ODE Euler steps / re-noise cycles n

    def __post_init__(self):
        if self.n_outer < 2:
            raise ParameterError(f"n_outer must be >= 2, got {self.n_outer}")
        if not (self.sigma_max > self.sigma_min > 0):
            raise ParameterError("need sigma_max > sigma_min > 0")
        if not (0.0 <= self.detail_start <= self.detail_end <= 1.0):
            raise ParameterError("need 0 <= d_s <= d_e <= 1")
        if self.detail_gamma <= 0:
            raise ParameterError(f"detail_gamma must be > 0, got {self.detail_gamma}")
        if not (0.0 <= self.lambda_start <= 1.0):
            raise ParameterError("lambda_start must be in [0, 1]")


@dataclass(frozen=True)
class ContinuationState:
    """Resolved per-outer-step schedule values."""

    k: int
    sigma_k: float
    omega_frac: float
    lam: float
    tau: float
    w_coarse: float
    w_detail: float


def sigma_at(cfg: ScheduleConfig, i: int) -> float:
    """Geometric noise ladder; i = n_outer - 1 is sigma_max, i = 0 is sigma_min."""
    if not (0 <= i <= cfg.n_outer - 1):
        raise ParameterError(f"outer index {i} out of [0, {cfg.n_outer - 1}]")
    t = (cfg.n_outer - 1 - i) / (cfg.n_outer - 1)
    return float(cfg.sigma_max * (cfg.sigma_min / cfg.sigma_max) ** t)


def log_progress(cfg: ScheduleConfig, sigma: float) -> float:
    """p = 0 at sigma_max, p = 1 at sigma_min, clipped outside."""
    p = (np.log(cfg.sigma_max) - np.log(sigma)) / (np.log(cfg.sigma_max) - np.log(cfg.sigma_min))
    return float(np.clip(p, 0.0, 1.0))


def omega_at(cfg: ScheduleConfig, sigma: float) -> float:
    """Cutoff fraction expanding from omega_start to omega_end as noise drops."""
    p = log_progress(cfg, sigma)
    return cfg.omega_start + (cfg.omega_end - cfg.omega_start) * p


def lambda_at(cfg: ScheduleConfig, p: float) -> float:
    """Cosine decay of the band-limited mixing weight over log-sigma progress."""
    if not (0.0 <= p <= 1.0):
        raise ParameterError(f"progress must be in [0, 1], got {p}")
    return cfg.lambda_start * (1.0 + np.cos(np.pi * p)) / 2.0


def detail_gate_at(cfg: ScheduleConfig, k: float, t_outer: float, lam: float) -> float:
    """unlock(k) * (1 - lambda_k); k counts completed outer progress in [0, t_outer]."""
    if cfg.detail_gamma <= 0:
        raise ParameterError("detail_gamma must be > 0")
    if cfg.constant_detail_gate:
        return cfg.detail_end
    unlock = cfg.detail_start + (cfg.detail_end - cfg.detail_start) * (k / t_outer) ** cfg.detail_gamma
    return float(unlock * (1.0 - lam))


def tau_at(cfg: ScheduleConfig, sigma_k: float, sigma_y: float) -> float:
    """Measurement temperature: coupled to the noise level, floored at sigma_y."""
    return float(max(sigma_y, cfg.c_tau * sigma_k))


def langevin_step_size(cfg: ScheduleConfig, tau_k: float, ell: int) -> float:
    """eta_base * tau^2 / (1 + ell): shrinks with the temperature and the
    inner index."""
    if ell < 0:
        raise ParameterError(f"inner index must be >= 0, got {ell}")
    return float(cfg.eta_base * tau_k * tau_k / (1.0 + ell))


def resolve_state(cfg: ScheduleConfig, i: int, sigma_y: float) -> ContinuationState:
    """Full schedule bundle for outer level i (i = n_outer - 1 down to 0)."""
    sigma_k = sigma_at(cfg, i)
    p = log_progress(cfg, sigma_k)
    lam = lambda_at(cfg, p)
    # completed-progress index for the gate: 0 at sigma_max, t_outer at sigma_min
    k_done = cfg.n_outer - 1 - i
    w_detail = detail_gate_at(cfg, k_done, cfg.n_outer - 1, lam)
    return ContinuationState(
        k=i,
        sigma_k=sigma_k,
        omega_frac=omega_at(cfg, sigma_k),
        lam=lam,
        tau=tau_at(cfg, sigma_k, sigma_y),
        w_coarse=1.0,
        w_detail=w_detail,
    )
