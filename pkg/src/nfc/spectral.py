"""Unitary 2D DFT, radial band masks, and the band-limited guidance losses.

The transform uses the 1/sqrt(HW) normalization so Parseval holds exactly:
||F(x)|| = ||x||. Masks live on the center-shifted grid with radius measured
from (floor(H/2), floor(W/2)) and a strict "< omega" indicator, so omega = 0
passes nothing and omega beyond the corner radius passes everything.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import ParameterError, ShapeError, check_image, check_same_shape


def dft2(x: np.ndarray) -> np.ndarray:
    """Unitary 2D DFT over the last two axes."""
    x = check_image(x)
    return np.fft.fft2(x, axes=(-2, -1), norm="ortho")


def idft2(z: np.ndarray) -> np.ndarray:
    """Real part of the inverse unitary 2D DFT."""
    return np.fft.ifft2(z, axes=(-2, -1), norm="ortho").real


def fftshift(z: np.ndarray) -> np.ndarray:
    return np.fft.fftshift(z, axes=(-2, -1))


def ifftshift(z: np.ndarray) -> np.ndarray:
    return np.fft.ifftshift(z, axes=(-2, -1))


def max_radius(height: int, width: int) -> float:
    """Radius at which a fractional cutoff of 1.0 becomes an all-pass mask."""
    return float(np.sqrt((height / 2) ** 2 + (width / 2) ** 2) + 1.0)


@dataclass(frozen=True)
class RadialMask:
    """Binary low-pass indicator M(u, v) = 1(sqrt(u^2 + v^2) < omega) on the
    shifted spectrum, broadcast along channels."""

    height: int
    width: int
    cutoff_radius: float
    values: np.ndarray

    @classmethod
    def build(cls, height: int, width: int, cutoff_radius: float) -> "RadialMask":
        if cutoff_radius < 0 or not np.isfinite(cutoff_radius):
            raise ParameterError(f"cutoff_radius must be finite >= 0, got {cutoff_radius}")
        u = np.arange(height) - height // 2
        v = np.arange(width) - width // 2
        rr = np.sqrt(u[:, None] ** 2 + v[None, :] ** 2)
        values = (rr < cutoff_radius).astype(np.float64)
        return cls(height, width, float(cutoff_radius), values)

    @classmethod
    def from_fraction(cls, height: int, width: int, omega_frac: float) -> "RadialMask":
        if not (0.0 <= omega_frac <= 1.0):
            raise ParameterError(f"omega_frac must be in [0, 1], got {omega_frac}")
        return cls.build(height, width, omega_frac * max_radius(height, width))


@dataclass(frozen=True)
class GuidanceWeights:
    """Cutoff fraction and band/full mixing weight of the guided objective."""

    omega_frac: float
    lam: float

    def __post_init__(self):
        if not (0.0 <= self.omega_frac <= 1.0):
            raise ParameterError(f"omega_frac out of [0, 1]: {self.omega_frac}")
        if not (0.0 <= self.lam <= 1.0):
            raise ParameterError(f"lambda out of [0, 1]: {self.lam}")

    def mask_for(self, height: int, width: int) -> RadialMask:
        return RadialMask.from_fraction(height, width, self.omega_frac)


def band_project(z: np.ndarray, mask: RadialMask) -> np.ndarray:
    """Masked, shifted spectrum of a spatial tensor."""
    z = check_image(z)
    if z.shape[-2:] != (mask.height, mask.width):
        raise ShapeError(f"mask {mask.height}x{mask.width} vs tensor {z.shape}")
    return fftshift(dft2(z)) * mask.values


def spatial_band_projector(z: np.ndarray, mask: RadialMask) -> np.ndarray:
    """Spatial-domain low-pass projector: inverse-shift + inverse DFT of the
    masked spectrum, keeping the real part. Linear, and self-adjoint /
    idempotent to numerical tolerance (the real part symmetrizes the unmatched
    Nyquist row/column on even grids)."""
    return idft2(ifftshift(band_project(z, mask)))


def freq_loss(x, y, operator, mask: RadialMask) -> float:
    """Band-limited squared residual ||P_omega(A x - y)||^2."""
    r = operator.apply(x) - check_image(y, "y")
    zr = band_project(r, mask)
    return float(np.sum(zr.real**2) + np.sum(zr.imag**2))


def guided_loss(x, y, operator, weights: GuidanceWeights) -> float:
    """(1 - lambda) * ||A x - y||^2 + lambda * band-limited residual energy."""
    r = operator.apply(x) - check_image(y, "y")
    full = float(np.sum(r * r))
    mask = weights.mask_for(r.shape[-2], r.shape[-1])
    zr = band_project(r, mask)
    band = float(np.sum(zr.real**2) + np.sum(zr.imag**2))
    return (1.0 - weights.lam) * full + weights.lam * band


def guided_loss_grad(x, y, operator, weights: GuidanceWeights) -> np.ndarray:
    """Exact gradient of guided_loss:

        2 (1 - lambda) A^T (A x - y) + 2 lambda A^T P_omega (A x - y)
    """
    y = check_image(y, "y")
    r = operator.apply(x) - y
    mask = weights.mask_for(r.shape[-2], r.shape[-1])
    g = 2.0 * (1.0 - weights.lam) * r + 2.0 * weights.lam * spatial_band_projector(r, mask)
    return operator.adjoint(g)
