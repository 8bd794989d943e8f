"""Analytic score priors (isotropic Gaussian, Gaussian mixture) and a
few-step Euler probability-flow solver.

With these priors the score of the sigma-smoothed density is available in
closed form, so the "network" is exact: for a Gaussian component the smoothed
density is N(mu, (s^2 + sigma^2) I) and the score is (mu - x) / (s^2 + sigma^2).
Mixture responsibilities go through log-sum-exp, which stays finite up to
sigma = 100 and beyond.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .grid import ParameterError, SeededRng, check_image


@dataclass(frozen=True)
class SolverConfig:
    """Euler PF-ODE integration: n_steps geometric sub-steps down to sigma_floor."""

    n_steps: int = 5
    sigma_floor: float = 1e-3

    def __post_init__(self):
        if self.n_steps < 1:
            raise ParameterError(f"n_steps must be >= 1, got {self.n_steps}")
        if self.sigma_floor <= 0:
            raise ParameterError(f"sigma_floor must be > 0, got {self.sigma_floor}")


class ScoreModel:
    """Mixture-of-Gaussians prior with exact smoothed scores.

    A single Gaussian is the one-component special case. Means are image
    tensors; component stds are isotropic.
    """

    def __init__(self, means, stds, weights=None):
        self.means = [check_image(m, "mean") for m in means]
        self.stds = [float(s) for s in stds]
        if len(self.means) != len(self.stds) or not self.means:
            raise ParameterError("means and stds must be non-empty and aligned")
        if any(s <= 0 for s in self.stds):
            raise ParameterError("component stds must be > 0")
        if weights is None:
            weights = [1.0 / len(self.means)] * len(self.means)
        w = np.asarray(weights, dtype=np.float64)
        if w.shape != (len(self.means),) or np.any(w <= 0):
            raise ParameterError("weights must be positive, one per component")
        self.weights = w / w.sum()
        shapes = {m.shape for m in self.means}
        if len(shapes) != 1:
            raise ParameterError("all component means must share one shape")
        self.shape = self.means[0].shape

    @classmethod
    def gaussian(cls, mean, std: float) -> "ScoreModel":
        return cls([mean], [std])

    @property
    def n_components(self) -> int:
        return len(self.means)

    def log_component_terms(self, x: np.ndarray, sigma: float) -> np.ndarray:
        """log(pi_m) + log N(x; mu_m, (s_m^2 + sigma^2) I), up to the shared
        (2 pi)^{-d/2} constant."""
        x = check_image(x)
        d = x.size
        out = np.empty(self.n_components)
        for m, (mu, s, w) in enumerate(zip(self.means, self.stds, self.weights)):
            var = s * s + sigma * sigma
            sq = float(np.sum((x - mu) ** 2))
            out[m] = np.log(w) - 0.5 * sq / var - 0.5 * d * np.log(var)
        return out

    def log_density(self, x: np.ndarray, sigma: float) -> float:
        """log p_sigma(x) up to an additive constant (for finite-difference tests)."""
        terms = self.log_component_terms(x, sigma)
        mx = terms.max()
        return float(mx + np.log(np.sum(np.exp(terms - mx))))

    def responsibilities(self, x: np.ndarray, sigma: float) -> np.ndarray:
        terms = self.log_component_terms(x, sigma)
        terms -= terms.max()
        e = np.exp(terms)
        return e / e.sum()

    def score(self, x: np.ndarray, sigma: float) -> np.ndarray:
        """Exact grad_x log p_sigma(x)."""
        if sigma <= 0 or not np.isfinite(sigma):
            raise ParameterError(f"sigma must be finite > 0, got {sigma}")
        x = check_image(x)
        if self.n_components == 1:
            mu, s = self.means[0], self.stds[0]
            return (mu - x) / (s * s + sigma * sigma)
        r = self.responsibilities(x, sigma)
        out = np.zeros_like(x)
        for rm, mu, s in zip(r, self.means, self.stds):
            out += rm * (mu - x) / (s * s + sigma * sigma)
        return out

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "means": [m.tolist() for m in self.means],
            "stds": self.stds,
            "weights": self.weights.tolist(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ScoreModel":
        means = [np.array(m, dtype=np.float64) for m in doc["means"]]
        return cls(means, doc["stds"], doc.get("weights"))

    def save_json(self, path) -> None:
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, sort_keys=True)

    @classmethod
    def load_json(cls, path) -> "ScoreModel":
        with open(path) as f:
            return cls.from_dict(json.load(f))


def tweedie_x0(model: ScoreModel, x: np.ndarray, sigma: float) -> np.ndarray:
    """Posterior-mean denoiser x + sigma^2 * score(x, sigma)."""
    return x + sigma * sigma * model.score(x, sigma)


def pf_ode_denoise(model: ScoreModel, x_t: np.ndarray, sigma_start: float,
                   cfg: SolverConfig = SolverConfig()) -> np.ndarray:
    """Euler integration of dx/dsigma = -sigma * score(x, sigma) from
    sigma_start down to cfg.sigma_floor on a geometric sigma grid."""
    if sigma_start <= cfg.sigma_floor:
        raise ParameterError(
            f"sigma_start {sigma_start} must exceed sigma_floor {cfg.sigma_floor}")
    sigmas = np.geomspace(sigma_start, cfg.sigma_floor, cfg.n_steps + 1)
    x = check_image(x_t).copy()
    for a, b in zip(sigmas[:-1], sigmas[1:]):
        dx = -a * model.score(x, a)
        x = x + (b - a) * dx
    return x


def forward_noise(x0: np.ndarray, sigma: float, rng: SeededRng) -> np.ndarray:
    """Variance-exploding forward draw x0 + sigma * eps."""
    if sigma < 0 or not np.isfinite(sigma):
        raise ParameterError(f"sigma must be finite >= 0, got {sigma}")
    x0 = check_image(x0)
    if sigma == 0:
        return x0.copy()
    return x0 + sigma * rng.normal(x0.shape)


def gaussian_flow_endpoint(mu: np.ndarray, s: float, x_t: np.ndarray,
                           sigma_start: float, sigma_end: float) -> np.ndarray:
    """Closed-form PF-ODE flow for the single-Gaussian prior:
    x(b) = mu + sqrt((s^2 + b^2) / (s^2 + a^2)) * (x(a) - mu)."""
    scale = np.sqrt((s * s + sigma_end**2) / (s * s + sigma_start**2))
    return mu + scale * (x_t - mu)
