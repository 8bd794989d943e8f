"""Shared oracles for the test suite.

Every numerical claim is checked against an implementation-independent
reference: a direct O(N^2) DFT, central finite differences, closed-form
Gaussian flows, or dense linear algebra. The oracles here deliberately avoid
the library's own fast paths.
"""

import numpy as np
import pytest

from nfc.grid import SeededRng


def direct_dft2(x: np.ndarray) -> np.ndarray:
    """O(N^2) unitary 2D DFT by explicit summation (per-channel)."""
    c, h, w = x.shape
    out = np.zeros((c, h, w), dtype=np.complex128)
    iu = np.arange(h)
    jv = np.arange(w)
    wh = np.exp(-2j * np.pi * np.outer(iu, iu) / h)
    ww = np.exp(-2j * np.pi * np.outer(jv, jv) / w)
    for ch in range(c):
        out[ch] = wh @ x[ch] @ ww
    return out / np.sqrt(h * w)


def fd_grad(f, x: np.ndarray, h: float = 1e-4) -> np.ndarray:
    """Central finite differences of a scalar function over every coordinate."""
    g = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        xp = x.copy()
        xp[idx] += h
        xm = x.copy()
        xm[idx] -= h
        g[idx] = (f(xp) - f(xm)) / (2.0 * h)
    return g


def rel_err(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(np.ravel(a) - np.ravel(b)) /
                 max(np.linalg.norm(np.ravel(b)), 1e-300))


@pytest.fixture
def rng():
    return SeededRng(20260823)
