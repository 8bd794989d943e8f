"""Image quality metrics and the exact Gaussian-posterior oracle.

The oracle is the independent cross-check for the sampler: for a Gaussian
prior and any linear operator the posterior mean is available in closed form
and computed matrix-free with conjugate gradients on the measurement space.
"""

from __future__ import annotations

import numpy as np

from .grid import ParameterError, ShapeError, check_image, check_same_shape
from .operators import LinearOperator

PSNR_CAP_DB = 99.0


def psnr(x: np.ndarray, ref: np.ndarray, peak: float = 1.0) -> float:
    """10 log10(peak^2 / MSE); identical inputs report the 99 dB cap."""
    x = check_image(x)
    ref = check_image(ref, "ref")
    check_same_shape(x, ref)
    mse = float(np.mean((x - ref) ** 2))
    if mse == 0.0:
        return PSNR_CAP_DB
    return min(PSNR_CAP_DB, float(10.0 * np.log10(peak * peak / mse)))


def _gaussian_window(size: int = 11, std: float = 1.5) -> np.ndarray:
    ax = np.arange(size) - size // 2
    g = np.exp(-(ax**2) / (2.0 * std**2))
    k = g[:, None] * g[None, :]
    return k / k.sum()


def _win_filter(img: np.ndarray, win: np.ndarray) -> np.ndarray:
    # 'valid' correlation of a single 2D plane with the window
    from numpy.lib.stride_tricks import sliding_window_view

    patches = sliding_window_view(img, win.shape)
    return np.einsum("ijkl,kl->ij", patches, win, optimize=True)


def ssim(x: np.ndarray, ref: np.ndarray, peak: float = 1.0) -> float:
    """Mean SSIM with the canonical 11x11 Gaussian window (std 1.5),
    C1 = (0.01 peak)^2, C2 = (0.03 peak)^2, averaged over channels."""
    x = check_image(x)
    ref = check_image(ref, "ref")
    check_same_shape(x, ref)
    if x.shape[1] < 11 or x.shape[2] < 11:
        raise ParameterError(f"SSIM needs H, W >= 11, got {x.shape}")
    win = _gaussian_window()
    c1 = (0.01 * peak) ** 2
    c2 = (0.03 * peak) ** 2
    vals = []
    for a, b in zip(x, ref):
        mu_a = _win_filter(a, win)
        mu_b = _win_filter(b, win)
        var_a = _win_filter(a * a, win) - mu_a**2
        var_b = _win_filter(b * b, win) - mu_b**2
        cov = _win_filter(a * b, win) - mu_a * mu_b
        num = (2 * mu_a * mu_b + c1) * (2 * cov + c2)
        den = (mu_a**2 + mu_b**2 + c1) * (var_a + var_b + c2)
        vals.append(np.mean(num / den))
    return float(np.mean(vals))


class NumericalError(RuntimeError):
    pass


def conjugate_gradients(apply_op, b: np.ndarray, tol: float = 1e-8,
                        max_iters: int | None = None) -> np.ndarray:
    """Matrix-free CG for an SPD map on image-shaped vectors."""
    if max_iters is None:
        max_iters = 10 * b.size
    x = np.zeros_like(b)
    r = b.copy()
    p = r.copy()
    rs = float(np.sum(r * r))
    b_norm = float(np.sqrt(np.sum(b * b)))
    if b_norm == 0.0:
        return x
    for _ in range(max_iters):
        if np.sqrt(rs) <= tol * max(1.0, b_norm):
            return x
        ap = apply_op(p)
        alpha = rs / float(np.sum(p * ap))
        x = x + alpha * p
        r = r - alpha * ap
        rs_new = float(np.sum(r * r))
        p = r + (rs_new / rs) * p
        rs = rs_new
    if np.sqrt(rs) <= tol * max(1.0, b_norm):
        return x
    raise NumericalError(f"CG did not converge within {max_iters} iterations")


def gaussian_posterior_oracle(mu: np.ndarray, s: float, operator: LinearOperator,
                              y: np.ndarray, sigma_y: float) -> np.ndarray:
    """Exact posterior mean for prior N(mu, s^2 I) under y = A x + N(0, sigma_y^2 I):

        mu + s^2 A^T (s^2 A A^T + sigma_y^2 I)^{-1} (y - A mu)

    solved matrix-free on the output space.
    """
    if sigma_y <= 0:
        raise ParameterError(f"sigma_y must be > 0, got {sigma_y}")
    if s <= 0:
        raise ParameterError(f"prior std must be > 0, got {s}")
    mu = check_image(mu, "mu")
    y = check_image(y, "y")
    rhs = y - operator.apply(mu)

    def gram(v):
        return s * s * operator.apply(operator.adjoint(v)) + sigma_y * sigma_y * v

    w = conjugate_gradients(gram, rhs)
    return mu + s * s * operator.adjoint(w)
