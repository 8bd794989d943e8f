"""Orthonormal single-level 2D Haar transform and bandwise fusion.

Per 2x2 block (a, b; c, d) the four coefficients are

    LL = (a + b + c + d) / 2      LH = (a - b + c - d) / 2
    HL = (a + b - c - d) / 2      HH = (a - b - c + d) / 2

which makes the transform orthonormal: energy is preserved exactly and the
inverse is the transpose.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import ParameterError, ShapeError, check_image


@dataclass
class HaarCoeffs:
    """Coarse (LL) and detail (LH, HL, HH) bands, each (C, H/2, W/2)."""

    ll: np.ndarray
    lh: np.ndarray
    hl: np.ndarray
    hh: np.ndarray

    @property
    def source_shape(self) -> tuple:
        c, h2, w2 = self.ll.shape
        return (c, 2 * h2, 2 * w2)

    def energy(self) -> float:
        return float(sum(np.sum(b * b) for b in (self.ll, self.lh, self.hl, self.hh)))


def haar_forward(x: np.ndarray) -> HaarCoeffs:
    x = check_image(x)
    c, h, w = x.shape
    if h % 2 or w % 2:
        raise ShapeError(f"H and W must be even for single-level Haar, got {h}x{w}")
    a = x[:, 0::2, 0::2]
    b = x[:, 0::2, 1::2]
    cc = x[:, 1::2, 0::2]
    d = x[:, 1::2, 1::2]
    return HaarCoeffs(
        ll=(a + b + cc + d) / 2.0,
        lh=(a - b + cc - d) / 2.0,
        hl=(a + b - cc - d) / 2.0,
        hh=(a - b - cc + d) / 2.0,
    )


def haar_inverse(z: HaarCoeffs) -> np.ndarray:
    for band in (z.lh, z.hl, z.hh):
        if band.shape != z.ll.shape:
            raise ShapeError("Haar bands must share one shape")
    c, h2, w2 = z.ll.shape
    x = np.empty((c, 2 * h2, 2 * w2))
    x[:, 0::2, 0::2] = (z.ll + z.lh + z.hl + z.hh) / 2.0
    x[:, 0::2, 1::2] = (z.ll - z.lh + z.hl - z.hh) / 2.0
    x[:, 1::2, 0::2] = (z.ll + z.lh - z.hl - z.hh) / 2.0
    x[:, 1::2, 1::2] = (z.ll - z.lh - z.hl + z.hh) / 2.0
    return x


def fuse(z_hat: HaarCoeffs, z_ref: HaarCoeffs, w_coarse: float, w_detail: float) -> HaarCoeffs:
    """Bandwise convex combination: weight w pulls toward the refined z_ref,
    1 - w keeps the anchor z_hat. Coarse and detail bands get separate weights."""
    for w, name in ((w_coarse, "w_coarse"), (w_detail, "w_detail")):
        if not (0.0 <= w <= 1.0):
            raise ParameterError(f"{name} must be in [0, 1], got {w}")
    if z_hat.ll.shape != z_ref.ll.shape:
        raise ShapeError("fusion operands must share one shape")
    mix = lambda a, b, w: (1.0 - w) * a + w * b
    return HaarCoeffs(
        ll=mix(z_hat.ll, z_ref.ll, w_coarse),
        lh=mix(z_hat.lh, z_ref.lh, w_detail),
        hl=mix(z_hat.hl, z_ref.hl, w_detail),
        hh=mix(z_hat.hh, z_ref.hh, w_detail),
    )
