"""Linear degradation operators with exact adjoints.

All convolutions are periodic (circular), so every blur is diagonalized by the
DFT and the spectral results about conditioning can be tested literally.
Downsampling is s x s average pooling (exact adjoint, exact null space), a
deliberate stand-in for bicubic resizing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .grid import ParameterError, SeededRng, ShapeError, check_image

KINDS = ("identity", "gaussian_blur", "motion_blur", "downsample", "inpaint_mask", "dense_matrix")


@dataclass
class LinearOperator:
    """Degradation operator A with matching adjoint.

    kind-specific parameters:
      gaussian_blur / motion_blur: `kernel` (2D, nonnegative, sums to 1)
      downsample: `factor`
      inpaint_mask: `mask` (binary, H x W)
      dense_matrix: `matrix` acting on the flattened input tensor
    """

    kind: str
    input_shape: tuple
    output_shape: tuple
    kernel: np.ndarray | None = None
    factor: int | None = None
    mask: np.ndarray | None = None
    matrix: np.ndarray | None = None
    params: dict = field(default_factory=dict)

    def apply(self, x: np.ndarray) -> np.ndarray:
        x = check_image(x)
        if x.shape != self.input_shape:
            raise ShapeError(f"expected input {self.input_shape}, got {x.shape}")
        if self.kind == "identity":
            return x.copy()
        if self.kind in ("gaussian_blur", "motion_blur"):
            return _circular_conv(x, self.kernel)
        if self.kind == "downsample":
            s = self.factor
            c, h, w = x.shape
            return x.reshape(c, h // s, s, w // s, s).mean(axis=(2, 4))
        if self.kind == "inpaint_mask":
            return x * self.mask[None, :, :]
        if self.kind == "dense_matrix":
            out = self.matrix @ x.ravel()
            return out.reshape(self.output_shape)
        raise ParameterError(f"unknown operator kind {self.kind!r}")

    def adjoint(self, r: np.ndarray) -> np.ndarray:
        r = check_image(r, "r")
        if r.shape != self.output_shape:
            raise ShapeError(f"expected residual {self.output_shape}, got {r.shape}")
        if self.kind == "identity":
            return r.copy()
        if self.kind in ("gaussian_blur", "motion_blur"):
            return _circular_conv(r, _flip_kernel(self.kernel))
        if self.kind == "downsample":
            s = self.factor
            up = np.repeat(np.repeat(r, s, axis=1), s, axis=2)
            return up / (s * s)
        if self.kind == "inpaint_mask":
            return r * self.mask[None, :, :]
        if self.kind == "dense_matrix":
            out = self.matrix.T @ r.ravel()
            return out.reshape(self.input_shape)
        raise ParameterError(f"unknown operator kind {self.kind!r}")

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        doc = {
            "kind": self.kind,
            "input_shape": list(self.input_shape),
            "output_shape": list(self.output_shape),
            "params": self.params,
        }
        if self.kernel is not None:
            doc["kernel"] = self.kernel.tolist()
        if self.factor is not None:
            doc["factor"] = self.factor
        if self.mask is not None:
            doc["mask"] = self.mask.astype(int).tolist()
        if self.matrix is not None:
            doc["matrix"] = self.matrix.tolist()
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "LinearOperator":
        return cls(
            kind=doc["kind"],
            input_shape=tuple(doc["input_shape"]),
            output_shape=tuple(doc["output_shape"]),
            kernel=np.array(doc["kernel"], dtype=np.float64) if "kernel" in doc else None,
            factor=doc.get("factor"),
            mask=np.array(doc["mask"], dtype=np.float64) if "mask" in doc else None,
            matrix=np.array(doc["matrix"], dtype=np.float64) if "matrix" in doc else None,
            params=doc.get("params", {}),
        )

    def save_json(self, path) -> None:
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, sort_keys=True)

    @classmethod
    def load_json(cls, path) -> "LinearOperator":
        with open(path) as f:
            return cls.from_dict(json.load(f))


def _circular_conv(x: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Periodic convolution of each channel with a centered 2D kernel, via FFT."""
    c, h, w = x.shape
    kh, kw = kernel.shape
    pad = np.zeros((h, w))
    pad[:kh, :kw] = kernel
    # center the kernel at (0, 0) so a delta kernel is the identity
    pad = np.roll(pad, (-(kh // 2), -(kw // 2)), axis=(0, 1))
    kf = np.fft.fft2(pad)
    out = np.fft.ifft2(np.fft.fft2(x, axes=(-2, -1)) * kf[None, :, :], axes=(-2, -1)).real
    return out


def _flip_kernel(kernel: np.ndarray) -> np.ndarray:
    """Adjoint kernel: 180-degree flip about the center tap."""
    return kernel[::-1, ::-1].copy()


def _gaussian_kernel(std: float, side: int) -> np.ndarray:
    ax = np.arange(side) - side // 2
    g = np.exp(-(ax**2) / (2.0 * std**2))
    k = g[:, None] * g[None, :]
    return k / k.sum()


def _motion_kernel(length: int, angle_deg: float, side: int) -> np.ndarray:
    """Normalized line kernel rasterized along the given angle."""
    k = np.zeros((side, side))
    theta = np.deg2rad(angle_deg)
    c = side // 2
    n = max(length * 4, 8)
    for t in np.linspace(-(length - 1) / 2, (length - 1) / 2, n):
        i = int(round(c + t * np.sin(theta)))
        j = int(round(c + t * np.cos(theta)))
        if 0 <= i < side and 0 <= j < side:
            k[i, j] += 1.0
    return k / k.sum()


def make_identity(shape) -> LinearOperator:
    return LinearOperator("identity", tuple(shape), tuple(shape))


def make_gaussian_blur(shape, std: float | None = None) -> LinearOperator:
    c, h, w = shape
    if std is None:
        std = h / 32.0
    side = 2 * int(np.ceil(2 * std)) + 1
    k = _gaussian_kernel(std, side)
    return LinearOperator("gaussian_blur", tuple(shape), tuple(shape), kernel=k,
                          params={"std": std, "side": side})


def make_motion_blur(shape, length: int | None = None, angle_deg: float = 30.0) -> LinearOperator:
    c, h, w = shape
    if length is None:
        length = max(3, h // 8)
    side = 2 * (length // 2) + 3
    k = _motion_kernel(length, angle_deg, side)
    return LinearOperator("motion_blur", tuple(shape), tuple(shape), kernel=k,
                          params={"length": length, "angle_deg": angle_deg, "side": side})


def make_downsample(shape, factor: int = 4) -> LinearOperator:
    c, h, w = shape
    if h % factor or w % factor:
        raise ShapeError(f"H, W must be divisible by factor {factor}, got {h}x{w}")
    return LinearOperator("downsample", tuple(shape), (c, h // factor, w // factor),
                          factor=factor, params={"factor": factor})


def make_inpaint(shape, keep_fraction: float, rng: SeededRng) -> LinearOperator:
    """Random pixel mask keeping an exact count round(keep_fraction * H * W)
    of positions, drawn by a seeded shuffle (no Bernoulli density variance)."""
    c, h, w = shape
    if not (0.0 < keep_fraction <= 1.0):
        raise ParameterError(f"keep_fraction must be in (0, 1], got {keep_fraction}")
    n = h * w
    keep = int(round(keep_fraction * n))
    perm = rng.permutation(n)
    mask = np.zeros(n)
    mask[perm[:keep]] = 1.0
    return LinearOperator("inpaint_mask", tuple(shape), tuple(shape),
                          mask=mask.reshape(h, w),
                          params={"keep_fraction": keep_fraction, "keep_count": keep})


def make_dense(matrix: np.ndarray, input_shape, output_shape) -> LinearOperator:
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.shape != (int(np.prod(output_shape)), int(np.prod(input_shape))):
        raise ShapeError("dense matrix shape inconsistent with declared shapes")
    return LinearOperator("dense_matrix", tuple(input_shape), tuple(output_shape), matrix=matrix)


def make_standard_operator(kind: str, shape, rng: SeededRng | None = None) -> LinearOperator:
    """Desk-scale analogs of the paper-style degradations."""
    if kind == "identity":
        return make_identity(shape)
    if kind == "gaussian_blur":
        return make_gaussian_blur(shape)
    if kind == "motion_blur":
        return make_motion_blur(shape)
    if kind == "downsample":
        return make_downsample(shape, 4)
    if kind == "inpaint_mask":
        if rng is None:
            raise ParameterError("inpaint_mask requires an rng")
        return make_inpaint(shape, 0.3, rng)
    raise ParameterError(f"unknown operator kind {kind!r}")


@dataclass
class Measurement:
    """Observed y together with everything needed to regenerate it."""

    y: np.ndarray
    sigma_y: float
    operator_kind: str
    seed: int


def degrade(x: np.ndarray, operator: LinearOperator, sigma_y: float, rng: SeededRng) -> Measurement:
    if sigma_y < 0 or not np.isfinite(sigma_y):
        raise ParameterError(f"sigma_y must be finite >= 0, got {sigma_y}")
    y = operator.apply(x)
    if sigma_y > 0:
        y = y + sigma_y * rng.normal(y.shape)
    return Measurement(y=y, sigma_y=float(sigma_y), operator_kind=operator.kind, seed=rng.seed)


def operator_norm(operator: LinearOperator, iters: int = 100, rng: SeededRng | None = None) -> float:
    """Spectral norm estimate by power iteration on A^T A."""
    if iters < 1:
        raise ParameterError(f"iters must be >= 1, got {iters}")
    rng = rng or SeededRng(0)
    v = rng.normal(operator.input_shape)
    v /= np.sqrt(np.sum(v * v))
    lam = 0.0
    for _ in range(iters):
        w = operator.adjoint(operator.apply(v))
        nw = np.sqrt(np.sum(w * w))
        if nw == 0.0:
            return 0.0
        lam = nw
        v = w / nw
    return float(np.sqrt(lam))
