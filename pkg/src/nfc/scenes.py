"""Seeded synthetic test scenes: piecewise-constant shapes, smooth gradients,
and fine texture bands. Keeps benchmark runs free of external datasets."""

from __future__ import annotations

import numpy as np

from .grid import ParameterError, SeededRng


def synthetic_scene(scene_id: str, shape, rng: SeededRng) -> np.ndarray:
    """Scene values lie in [0, 1]. scene_id selects the generator family."""
    c, h, w = shape
    ii = np.arange(h)[:, None] / h
    jj = np.arange(w)[None, :] / w
    if scene_id == "shapes":
        img = np.zeros((h, w))
        img += 0.2 + 0.3 * ii                      # smooth vertical gradient
        for _ in range(4):                         # random rectangles
            r0 = rng.integers(0, h // 2)
            c0 = rng.integers(0, w // 2)
            r1 = r0 + 2 + rng.integers(0, h // 2)
            c1 = c0 + 2 + rng.integers(0, w // 2)
            img[r0:r1, c0:c1] = float(rng.uniform(()))
        cy, cx = h / 2 + rng.integers(-h // 4, h // 4), w / 2 + rng.integers(-w // 4, w // 4)
        rad = h / 5
        disk = (np.arange(h)[:, None] - cy) ** 2 + (np.arange(w)[None, :] - cx) ** 2 < rad**2
        img[disk] = float(rng.uniform(()))
        # fine texture band across the lower third
        band = slice(2 * h // 3, 2 * h // 3 + max(2, h // 8))
        img[band, :] += 0.15 * np.sin(2 * np.pi * 6 * jj[0])[None, :]
        out = np.repeat(img[None, :, :], c, axis=0)
    elif scene_id == "gradients":
        base = 0.5 + 0.4 * np.sin(2 * np.pi * (ii + jj) / 2)
        out = np.repeat(base[None, :, :], c, axis=0)
    elif scene_id == "texture":
        f1 = 2 + rng.integers(0, 3)
        f2 = 5 + rng.integers(0, 3)
        base = 0.5 + 0.2 * np.sin(2 * np.pi * f1 * ii) * np.cos(2 * np.pi * f2 * jj)
        base += 0.1 * rng.normal((h, w))
        out = np.repeat(base[None, :, :], c, axis=0)
    else:
        raise ParameterError(f"unknown scene id {scene_id!r}")
    return np.clip(out, 0.0, 1.0)


def scene_prior_means(shape, rng: SeededRng, n_components: int = 3) -> list:
    """Component means for the synthetic mixture prior: scene variants drawn
    from one seeded stream."""
    means = []
    for m in range(n_components):
        means.append(synthetic_scene("shapes", shape, rng.spawn(m)))
    return means
