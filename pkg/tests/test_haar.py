import numpy as np
import pytest

from nfc.grid import ParameterError, SeededRng, ShapeError, gaussian_image
from nfc.haar import HaarCoeffs, fuse, haar_forward, haar_inverse


def _block(a, b, c, d):
    return np.array([[[a, b], [c, d]]], dtype=np.float64)


class TestForward:
    def test_constant_image(self):
        z = haar_forward(np.full((1, 4, 4), 3.0))
        assert np.allclose(z.ll, 6.0)
        for band in (z.lh, z.hl, z.hh):
            assert np.max(np.abs(band)) == 0.0

    def test_hand_example(self):
        z = haar_forward(_block(1.0, 2.0, 3.0, 4.0))
        assert z.ll[0, 0, 0] == 5.0
        assert z.lh[0, 0, 0] == -1.0
        assert z.hl[0, 0, 0] == -2.0
        assert z.hh[0, 0, 0] == 0.0

    def test_energy_preserved(self):
        x = gaussian_image(SeededRng(1), (2, 8, 8), 0.0, 1.0)
        assert haar_forward(x).energy() == pytest.approx(float(np.sum(x * x)), rel=1e-12)

    def test_linear(self):
        r = SeededRng(2)
        u = gaussian_image(r, (1, 4, 4), 0.0, 1.0)
        v = gaussian_image(r, (1, 4, 4), 0.0, 1.0)
        zl = haar_forward(2.0 * u - 3.0 * v)
        zu, zv = haar_forward(u), haar_forward(v)
        assert np.allclose(zl.ll, 2.0 * zu.ll - 3.0 * zv.ll, atol=1e-12)
        assert np.allclose(zl.hh, 2.0 * zu.hh - 3.0 * zv.hh, atol=1e-12)

    def test_odd_shape_rejected(self):
        with pytest.raises(ShapeError):
            haar_forward(np.zeros((1, 5, 4)))


class TestInverse:
    def test_round_trip_100_random(self):
        r = SeededRng(3)
        for _ in range(100):
            x = gaussian_image(r, (1, 8, 8), 0.0, 1.0)
            assert np.max(np.abs(haar_inverse(haar_forward(x)) - x)) <= 1e-10

    def test_zero_coeffs(self):
        z = HaarCoeffs(*(np.zeros((1, 2, 2)) for _ in range(4)))
        assert np.max(np.abs(haar_inverse(z))) == 0.0

    def test_ll_only_reconstructs_block_mean(self):
        z = haar_forward(_block(1.0, 2.0, 3.0, 4.0))
        zeroed = HaarCoeffs(z.ll, np.zeros_like(z.lh), np.zeros_like(z.hl),
                            np.zeros_like(z.hh))
        assert np.allclose(haar_inverse(zeroed), 2.5)

    def test_band_shape_mismatch(self):
        with pytest.raises(ShapeError):
            haar_inverse(HaarCoeffs(np.zeros((1, 2, 2)), np.zeros((1, 2, 2)),
                                    np.zeros((1, 2, 2)), np.zeros((1, 3, 2))))

    def test_source_shape(self):
        z = haar_forward(np.zeros((3, 6, 10)))
        assert z.source_shape == (3, 6, 10)


class TestFuse:
    def setup_method(self):
        r = SeededRng(4)
        self.a = haar_forward(gaussian_image(r, (1, 4, 4), 0.0, 1.0))
        self.b = haar_forward(gaussian_image(r, (1, 4, 4), 0.0, 1.0))

    def test_zero_weights_keep_anchor(self):
        z = fuse(self.a, self.b, 0.0, 0.0)
        for band in ("ll", "lh", "hl", "hh"):
            assert np.array_equal(getattr(z, band), getattr(self.a, band))

    def test_unit_weights_take_refined(self):
        z = fuse(self.a, self.b, 1.0, 1.0)
        for band in ("ll", "lh", "hl", "hh"):
            assert np.array_equal(getattr(z, band), getattr(self.b, band))

    def test_hand_example(self):
        hat = HaarCoeffs(np.zeros((1, 1, 1)), np.zeros((1, 1, 1)),
                         np.zeros((1, 1, 1)), np.full((1, 1, 1), 5.0))
        ref = HaarCoeffs(np.full((1, 1, 1), 10.0), np.zeros((1, 1, 1)),
                         np.zeros((1, 1, 1)), np.zeros((1, 1, 1)))
        z = fuse(hat, ref, 1.0, 0.2)
        assert z.ll[0, 0, 0] == 10.0
        assert z.hh[0, 0, 0] == pytest.approx(4.0)

    def test_convex_combination_bounds(self):
        z = fuse(self.a, self.b, 0.3, 0.7)
        for band in ("ll", "lh", "hl", "hh"):
            lo = np.minimum(getattr(self.a, band), getattr(self.b, band))
            hi = np.maximum(getattr(self.a, band), getattr(self.b, band))
            v = getattr(z, band)
            assert np.all(v >= lo - 1e-12) and np.all(v <= hi + 1e-12)

    def test_weight_range_validated(self):
        with pytest.raises(ParameterError):
            fuse(self.a, self.b, 1.1, 0.0)
        with pytest.raises(ParameterError):
            fuse(self.a, self.b, 0.0, -0.1)
