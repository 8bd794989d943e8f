"""Core grid types: (C, H, W) float tensors, seeded RNG, norms, and tensor I/O.

Images are plain numpy arrays of shape (C, H, W), dtype float64, row-major.
Spectra are complex128 arrays of the same shape. All randomness flows through
SeededRng, which pins the Philox counter-based generator and numpy's ziggurat
standard-normal sampler so that a given seed reproduces the exact same stream
on every platform.
"""

from __future__ import annotations

import struct

import numpy as np

TENSOR_MAGIC = b"NFCT"


class GridError(ValueError):
    """Base class for grid-level input errors."""


class ShapeError(GridError):
    """Operand shapes are inconsistent."""


class ParameterError(GridError):
    """A scalar parameter is out of its documented range."""


class SeededRng:
    """Deterministic random stream.

    Wraps numpy's Philox (counter-based) bit generator. Gaussian draws use
    numpy's ziggurat sampler. Identical seed + call sequence gives a
    bit-identical stream everywhere; this is what every theorem check and
    acceptance threshold in the repo relies on.
    """

    def __init__(self, seed: int):
        if not (0 <= int(seed) < 2**64):
            raise ParameterError(f"seed must be a u64, got {seed}")
        self.seed = int(seed)
        self._gen = np.random.Generator(np.random.Philox(self.seed))

    def normal(self, shape) -> np.ndarray:
        return self._gen.standard_normal(size=shape, dtype=np.float64)

    def uniform(self, shape) -> np.ndarray:
        return self._gen.random(size=shape, dtype=np.float64)

    def permutation(self, n: int) -> np.ndarray:
        return self._gen.permutation(n)

    def integers(self, low: int, high: int) -> int:
        return int(self._gen.integers(low, high))

    def spawn(self, key: int) -> "SeededRng":
        """Independent child stream derived from (seed, key)."""
        return SeededRng((self.seed * 0x9E3779B97F4A7C15 + key + 1) % 2**64)


def check_image(x: np.ndarray, name: str = "x") -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 3:
        raise ShapeError(f"{name} must have shape (C, H, W), got {x.shape}")
    if not np.all(np.isfinite(x)):
        raise GridError(f"{name} contains non-finite entries")
    return x


def check_same_shape(x: np.ndarray, y: np.ndarray) -> None:
    if x.shape != y.shape:
        raise ShapeError(f"shape mismatch: {x.shape} vs {y.shape}")


def gaussian_image(rng: SeededRng, shape, mean: float, std: float) -> np.ndarray:
    """I.i.d. N(mean, std^2) tensor of the given (C, H, W) shape."""
    if not (np.isfinite(mean) and np.isfinite(std)):
        raise ParameterError("mean and std must be finite")
    if std < 0:
        raise ParameterError(f"std must be >= 0, got {std}")
    c, h, w = shape
    if c <= 0 or h <= 0 or w <= 0:
        raise ShapeError(f"shape entries must be positive, got {shape}")
    return mean + std * rng.normal((c, h, w))


def l2_norm(x: np.ndarray) -> float:
    return float(np.sqrt(np.sum(np.asarray(x, dtype=np.float64) ** 2)))


def complex_sq_norm(z: np.ndarray) -> float:
    """Sum of squared magnitudes, computed as re^2 + im^2 (no modulus round-trip)."""
    z = np.asarray(z)
    return float(np.sum(z.real**2) + np.sum(z.imag**2))


def axpy(x: np.ndarray, y: np.ndarray, a: float) -> np.ndarray:
    """x + a * y, elementwise."""
    check_same_shape(x, y)
    return x + a * y


def inner(x: np.ndarray, y: np.ndarray) -> float:
    check_same_shape(x, y)
    return float(np.sum(x * y))


# ---------------------------------------------------------------------------
# Tensor and image I/O
# ---------------------------------------------------------------------------

def save_tensor(path, x: np.ndarray) -> None:
    """Raw float64 dump: 16-byte header (magic 'NFCT', u32 C, H, W), then
    little-endian data in row-major (c, h, w) order."""
    x = check_image(x)
    c, h, w = x.shape
    with open(path, "wb") as f:
        f.write(TENSOR_MAGIC)
        f.write(struct.pack("<III", c, h, w))
        f.write(x.astype("<f8").tobytes())


def load_tensor(path) -> np.ndarray:
    with open(path, "rb") as f:
        header = f.read(16)
        if len(header) != 16 or header[:4] != TENSOR_MAGIC:
            raise GridError(f"{path}: not an NFCT tensor file")
        c, h, w = struct.unpack("<III", header[4:16])
        data = np.frombuffer(f.read(), dtype="<f8")
    if data.size != c * h * w:
        raise GridError(f"{path}: truncated tensor payload")
    return data.reshape(c, h, w).copy()


def save_png(path, x: np.ndarray) -> None:
    """8-bit PNG, grayscale for C=1 and RGB for C=3, values clamped to [0, 1]."""
    from PIL import Image

    x = check_image(x)
    c = x.shape[0]
    q = np.clip(np.round(x * 255.0), 0, 255).astype(np.uint8)
    if c == 1:
        img = Image.fromarray(q[0], mode="L")
    elif c == 3:
        img = Image.fromarray(np.moveaxis(q, 0, -1), mode="RGB")
    else:
        raise ShapeError(f"PNG output supports C in {{1, 3}}, got C={c}")
    img.save(path, format="PNG")


def load_png(path) -> np.ndarray:
    from PIL import Image

    img = Image.open(path)
    if img.mode not in ("L", "RGB"):
        img = img.convert("RGB")
    arr = np.asarray(img, dtype=np.float64) / 255.0
    if arr.ndim == 2:
        return arr[None, :, :]
    return np.moveaxis(arr, -1, 0).copy()
