import math
import numpy as np
from django.test import SimpleTestCase
from tnrd import const
from tnrd.exceptions import InvalidArgumentError
from tnrd.image_core import (addGaussianNoise, convolve, convolveAdjoint, crop, embed,
                             kernelGradient, lagOneAutocorrelation, padSymmetric,
                             padSymmetricAdjoint, psnr, rotate180)


def _mirror(i: int, n: int) -> int:
    if i < 0:
        return -i - 1
    if i >= n:
        return 2 * n - i - 1
    return i


def _bruteConvolve(img: np.ndarray, k: np.ndarray, boundary: str) -> np.ndarray:
    h, w = img.shape
    r = k.shape[0] // 2
    out = np.zeros_like(img)
    for y in range(h):
        for x in range(w):
            acc = 0.0
            for a in range(k.shape[0]):
                for b in range(k.shape[1]):
                    yy, xx = y - (a - r), x - (b - r)
                    if boundary == const.BOUNDARY_SYMMETRIC:
                        acc += k[a, b] * img[_mirror(yy, h), _mirror(xx, w)]
                    elif 0 <= yy < h and 0 <= xx < w:
                        acc += k[a, b] * img[yy, xx]
            out[y, x] = acc
    return out


class ConvolutionTest(SimpleTestCase):

    def setUp(self) -> None:
        self.rng = np.random.default_rng(7)

    def test_delta_kernel_is_identity(self):
        img = self.rng.uniform(0, 255, (6, 9))
        k = np.zeros((5, 5))
        k[2, 2] = 1.0
        for boundary in const.BOUNDARIES:
            np.testing.assert_array_equal(convolve(img, k, boundary), img)

    def test_zero_mean_kernel_kills_constants(self):
        img = np.full((7, 7), 42.0)
        k = self.rng.standard_normal((3, 3))
        k -= k.mean()
        np.testing.assert_allclose(convolve(img, k), 0.0, atol=1e-9)

    def test_matches_direct_sum(self):
        img = np.arange(16, dtype=np.float64).reshape(4, 4)
        k = np.arange(1, 10, dtype=np.float64).reshape(3, 3)
        for boundary in const.BOUNDARIES:
            np.testing.assert_allclose(convolve(img, k, boundary),
                                       _bruteConvolve(img, k, boundary), atol=1e-10)
        img = self.rng.uniform(0, 255, (6, 5))
        k = self.rng.standard_normal((5, 5))
        np.testing.assert_allclose(convolve(img, k), _bruteConvolve(img, k, 'symmetric'),
                                   rtol=1e-12, atol=1e-9)

    def test_linearity(self):
        u, v = self.rng.standard_normal((2, 8, 8))
        k = self.rng.standard_normal((3, 3))
        np.testing.assert_allclose(convolve(2.0 * u - 3.0 * v, k),
                                   2.0 * convolve(u, k) - 3.0 * convolve(v, k), atol=1e-10)

    def test_adjoint_identity(self):
        for boundary in const.BOUNDARIES:
            for m in (3, 5, 7):
                u, v = self.rng.standard_normal((2, 9, 11))
                k = self.rng.standard_normal((m, m))
                lhs = np.vdot(convolve(u, k, boundary), v)
                rhs = np.vdot(u, convolveAdjoint(v, k, boundary))
                self.assertLess(abs(lhs - rhs), 1e-10 * max(1.0, abs(lhs)))

    def test_zero_boundary_adjoint_is_rotated_convolution(self):
        v = self.rng.standard_normal((8, 8))
        k = self.rng.standard_normal((5, 5))
        np.testing.assert_allclose(convolveAdjoint(v, k, const.BOUNDARY_ZERO),
                                   convolve(v, rotate180(k), const.BOUNDARY_ZERO), atol=1e-10)

    def test_kernel_gradient_matches_unit_kernels(self):
        u, g = self.rng.standard_normal((2, 7, 6))
        m = 3
        for boundary in const.BOUNDARIES:
            grad = kernelGradient(u, g, m, boundary)
            expected = np.zeros((m, m))
            for a in range(m):
                for b in range(m):
                    e = np.zeros((m, m))
                    e[a, b] = 1.0
                    expected[a, b] = np.vdot(g, convolve(u, e, boundary))
            np.testing.assert_allclose(grad, expected, atol=1e-10)

    def test_rejects_bad_arguments(self):
        img = np.zeros((4, 4))
        with self.assertRaises(InvalidArgumentError):
            convolve(img, np.zeros((2, 2)))
        with self.assertRaises(InvalidArgumentError):
            convolve(img, np.zeros((3, 3)), 'periodic')
        with self.assertRaises(InvalidArgumentError):
            convolve(np.zeros((0, 4)), np.zeros((3, 3)))


class PaddingTest(SimpleTestCase):

    def test_half_sample_symmetric(self):
        padded = padSymmetric(np.array([[1.0, 2.0, 3.0]]), 2)
        np.testing.assert_array_equal(padded[2], [2, 1, 1, 2, 3, 3, 2])

    def test_crop_inverts_padding(self):
        u = np.random.default_rng(0).standard_normal((5, 6))
        np.testing.assert_array_equal(crop(padSymmetric(u, 3), 3), u)
        np.testing.assert_array_equal(crop(embed(u, 2), 2), u)

    def test_crop_limits(self):
        u = np.arange(25, dtype=np.float64).reshape(5, 5)
        np.testing.assert_array_equal(crop(u, 2), [[12.0]])
        with self.assertRaises(InvalidArgumentError):
            crop(u, 3)
        with self.assertRaises(InvalidArgumentError):
            padSymmetric(u, -1)

    def test_padding_adjoint(self):
        rng = np.random.default_rng(1)
        u = rng.standard_normal((4, 6))
        v = rng.standard_normal((10, 12))
        self.assertAlmostEqual(np.vdot(padSymmetric(u, 3), v),
                               np.vdot(u, padSymmetricAdjoint(v, 3)), places=10)

    def test_rotate180_involution(self):
        k = np.arange(9, dtype=np.float64).reshape(3, 3)
        np.testing.assert_array_equal(rotate180(rotate180(k)), k)
        sym = np.array([[1.0, 2.0, 1.0], [2.0, 4.0, 2.0], [1.0, 2.0, 1.0]])
        np.testing.assert_array_equal(rotate180(sym), sym)


class PsnrTest(SimpleTestCase):

    def test_constant_offset(self):
        a = np.full((8, 8), 100.0)
        res = psnr(a, a + 16.0)
        self.assertAlmostEqual(res.value, 20.0 * math.log10(255.0 / 16.0), places=9)
        self.assertFalse(res.exact)

    def test_identical_images_are_capped(self):
        a = np.random.default_rng(2).uniform(0, 255, (5, 5))
        res = psnr(a, a)
        self.assertEqual(res.value, const.PSNR_CAP)
        self.assertTrue(res.exact)

    def test_symmetric_and_matches_definition(self):
        rng = np.random.default_rng(3)
        a, b = rng.uniform(0, 255, (2, 6, 7))
        mse = sum((a[i, j] - b[i, j]) ** 2 for i in range(6) for j in range(7)) / 42.0
        self.assertAlmostEqual(psnr(a, b).value, psnr(b, a).value, places=12)
        self.assertAlmostEqual(psnr(a, b).value, 10.0 * math.log10(255.0 ** 2 / mse), places=9)

    def test_dimension_mismatch(self):
        with self.assertRaises(InvalidArgumentError):
            psnr(np.zeros((3, 3)), np.zeros((3, 4)))


class NoiseTest(SimpleTestCase):

    def test_zero_sigma_keeps_image(self):
        a = np.random.default_rng(4).uniform(0, 255, (4, 4))
        np.testing.assert_array_equal(addGaussianNoise(a, 0.0, 9), a)

    def test_seeded_and_calibrated(self):
        a = np.zeros((256, 256))
        n1 = addGaussianNoise(a, 25.0, 11)
        np.testing.assert_array_equal(n1, addGaussianNoise(a, 25.0, 11))
        self.assertLess(abs(n1.std() - 25.0), 0.5)

    def test_negative_sigma(self):
        with self.assertRaises(InvalidArgumentError):
            addGaussianNoise(np.zeros((2, 2)), -1.0, 0)


class AutocorrelationTest(SimpleTestCase):

    def test_ramp_checker_and_constant(self):
        yy, xx = np.mgrid[0:6, 0:7].astype(np.float64)
        self.assertAlmostEqual(lagOneAutocorrelation(yy + xx), 1.0, places=12)
        self.assertAlmostEqual(lagOneAutocorrelation(255.0 * ((yy + xx) % 2)), -1.0, places=12)
        self.assertEqual(lagOneAutocorrelation(np.full((5, 5), 7.0)), 0.0)

    def test_white_noise_is_uncorrelated(self):
        noise = np.random.default_rng(5).uniform(0.0, 255.0, (64, 64))
        self.assertLess(abs(lagOneAutocorrelation(noise)), 0.05)
