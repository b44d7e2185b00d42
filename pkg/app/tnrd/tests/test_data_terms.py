import math
import numpy as np
from django.test import SimpleTestCase
from tnrd import const
from tnrd.data_terms import (ProblemKind, activeSetSignature, bicubicDownsample,
                             bicubicDownsampleAdjoint, bicubicUpscale, blockDct, blockIdct,
                             proxDeblock, proxDeblockAdjoint, quantBoxFromJpeg,
                             quantizationTable, reactionDenoise, reactionSisr, resizeMatrix,
                             tiledSteps)
from tnrd.exceptions import InvalidArgumentError


def _scalarDct8(block: np.ndarray) -> np.ndarray:
    """ Orthonormal 2D DCT-II of an 8x8 block straight from the cosine sum."""
    res = np.zeros((8, 8))
    for u in range(8):
        for v in range(8):
            cu = math.sqrt(1 / 8) if u == 0 else math.sqrt(2 / 8)
            cv = math.sqrt(1 / 8) if v == 0 else math.sqrt(2 / 8)
            acc = 0.0
            for x in range(8):
                for y in range(8):
                    acc += block[x, y] * math.cos((2 * x + 1) * u * math.pi / 16) \
                        * math.cos((2 * y + 1) * v * math.pi / 16)
            res[u, v] = cu * cv * acc
    return res


class ProblemKindTest(SimpleTestCase):

    def test_constructors(self):
        self.assertEqual(ProblemKind.denoise(25).kind, const.PROBLEM_DENOISE)
        self.assertEqual(ProblemKind.superResolve(3).factor, 3)
        self.assertEqual(ProblemKind.deblock(10).quality, 10)
        self.assertFalse(ProblemKind.deblock(10).isSmooth)
        self.assertEqual(str(ProblemKind.denoise(25)), 'denoise 25')

    def test_rejects_bad_parameters(self):
        for kind, param in (('denoise', -1.0), ('sisr', 1), ('sisr', 2.5), ('deblock', 0),
                            ('deblock', 101), ('inpaint', 1)):
            with self.assertRaises(InvalidArgumentError):
                ProblemKind(kind, param)

    def test_strict_mode(self):
        ProblemKind.denoise(17).validate(False)
        with self.assertRaises(InvalidArgumentError):
            ProblemKind.denoise(17).validate(True)
        ProblemKind.deblock(20).validate(True)


class BicubicTest(SimpleTestCase):

    def setUp(self) -> None:
        self.rng = np.random.default_rng(11)

    def test_rows_sum_to_one(self):
        for inLen, outLen in ((12, 6), (12, 4), (5, 15)):
            np.testing.assert_allclose(resizeMatrix(inLen, outLen).sum(axis=1), 1.0, atol=1e-12)

    def test_constants_are_preserved(self):
        img = np.full((12, 18), 77.0)
        np.testing.assert_allclose(bicubicDownsample(img, 3), 77.0, atol=1e-10)
        np.testing.assert_allclose(bicubicUpscale(np.full((4, 6), 77.0), 3), 77.0, atol=1e-10)

    def test_adjoint_identity(self):
        for factor in (2, 3, 4):
            hi = self.rng.standard_normal((12, 24))
            lo = self.rng.standard_normal((12 // factor, 24 // factor))
            lhs = float(np.vdot(bicubicDownsample(hi, factor), lo))
            rhs = float(np.vdot(hi, bicubicDownsampleAdjoint(lo, factor, hi.shape)))
            self.assertLess(abs(lhs - rhs), 1e-10 * max(1.0, abs(lhs)))

    def test_shapes(self):
        self.assertEqual(bicubicDownsample(np.zeros((150, 150)), 3).shape, (50, 50))
        self.assertEqual(bicubicUpscale(np.zeros((50, 40)), 3).shape, (150, 120))
        with self.assertRaises(InvalidArgumentError):
            bicubicDownsample(np.zeros((10, 10)), 3)

    def test_reactions(self):
        u = self.rng.uniform(0, 255, (8, 8))
        f = self.rng.uniform(0, 255, (8, 8))
        np.testing.assert_allclose(reactionDenoise(u, f, 0.5), 0.5 * (u - f))
        lo = self.rng.uniform(0, 255, (4, 4))
        expected = 0.2 * bicubicDownsampleAdjoint(bicubicDownsample(u, 2) - lo, 2, u.shape)
        np.testing.assert_allclose(reactionSisr(u, lo, 0.2, 2), expected)
        with self.assertRaises(InvalidArgumentError):
            reactionSisr(u, np.zeros((3, 3)), 0.2, 2)

    def test_upscaled_checker(self):
        # cubic a = -0.5 at distances 0.25, 0.75, 1.25, 1.75
        near, mid, far, farthest = 0.8671875, 0.2265625, -0.0703125, -0.0234375
        self.assertAlmostEqual(near + mid + far + farthest, 1.0, places=15)
        rows = resizeMatrix(4, 8)
        # taps left of the first pixel mirror back onto pixels 0 and 1
        np.testing.assert_allclose(rows[0], [mid + near, farthest + far, 0.0, 0.0], atol=1e-15)
        np.testing.assert_allclose(rows[1], [far + near, mid, farthest, 0.0], atol=1e-15)
        np.testing.assert_allclose(rows[3], [far, near, mid, farthest], atol=1e-15)
        np.testing.assert_allclose(rows[7], rows[0][::-1], atol=1e-15)

        yy, xx = np.mgrid[0:4, 0:4]
        checker = 255.0 * ((yy + xx) % 2)
        # checker = 127.5 (1 - s s^T) with s = (1, -1, 1, -1), rows of R sum to 1
        v = np.array([1.1875, 0.546875, -0.734375, -0.6875, 0.6875, 0.734375, -0.546875, -1.1875])
        expected = 127.5 * (1.0 - np.outer(v, v))
        np.testing.assert_allclose(bicubicUpscale(checker, 2), expected, atol=1e-10)
        self.assertAlmostEqual(float(bicubicUpscale(checker, 2)[0, 0]), -52.294921875, places=9)

    def test_downsampling_an_upscaled_image(self):
        # smooth 48x48 image (lowest cosine of the half-sample symmetric extension)
        c = np.cos(np.pi * (np.arange(48) + 0.5) / 48)
        lo = 128.0 + 100.0 * np.outer(c, c)
        for factor, bound in ((2, 0.75), (3, 1.0), (4, 1.5)):
            with self.subTest(factor=factor):
                err = np.abs(bicubicDownsample(bicubicUpscale(lo, factor), factor) - lo)
                self.assertLess(float(err.max()), bound)


class JpegTest(SimpleTestCase):

    def setUp(self) -> None:
        self.rng = np.random.default_rng(13)

    def test_block_dct_is_orthonormal(self):
        u, v = self.rng.standard_normal((2, 16, 24))
        np.testing.assert_allclose(blockIdct(blockDct(u)), u, atol=1e-10)
        self.assertAlmostEqual(float(np.vdot(blockDct(u), v)), float(np.vdot(u, blockIdct(v))),
                               places=9)
        self.assertAlmostEqual(float(np.linalg.norm(blockDct(u))), float(np.linalg.norm(u)),
                               places=9)

    def test_block_dct_matches_cosine_sum(self):
        u = self.rng.uniform(0, 255, (8, 16))
        coeffs = blockDct(u)
        np.testing.assert_allclose(coeffs[:, :8], _scalarDct8(u[:, :8]), atol=1e-9)
        np.testing.assert_allclose(coeffs[:, 8:], _scalarDct8(u[:, 8:]), atol=1e-9)

    def test_block_dct_needs_the_grid(self):
        with self.assertRaises(InvalidArgumentError):
            blockDct(np.zeros((8, 12)))

    def test_quantization_tables(self):
        np.testing.assert_array_equal(quantizationTable(50), np.array(const.JPEG_LUMINANCE_TABLE))
        np.testing.assert_array_equal(quantizationTable(100), np.ones((8, 8)))
        self.assertEqual(quantizationTable(10)[0, 0], 80.0)
        self.assertTrue(np.all(quantizationTable(1) <= 255))
        self.assertEqual(tiledSteps((16, 8), 30).shape, (16, 8))

    def test_box_around_dequantized_coefficients(self):
        steps = tiledSteps((16, 16), 20)
        levels = self.rng.integers(-5, 6, (16, 16))
        box = quantBoxFromJpeg(levels * steps, 20)
        np.testing.assert_allclose(box.upper - box.lower, steps)
        np.testing.assert_allclose(0.5 * (box.upper + box.lower), levels * steps)
        with self.assertRaises(InvalidArgumentError):
            quantBoxFromJpeg(levels * steps, 40, strict=True)

    def test_prox_is_a_projection(self):
        steps = tiledSteps((16, 16), 10)
        decoded = blockIdct(self.rng.integers(-3, 4, (16, 16)) * steps)
        box = quantBoxFromJpeg(blockDct(decoded), 10)
        np.testing.assert_allclose(proxDeblock(decoded, box), decoded, atol=1e-9)
        u = decoded + 40.0 * self.rng.standard_normal((16, 16))
        p = proxDeblock(u, box)
        np.testing.assert_allclose(proxDeblock(p, box), p, atol=1e-9)
        coeffs = blockDct(p)
        self.assertTrue(np.all(coeffs >= box.lower - 1e-9))
        self.assertTrue(np.all(coeffs <= box.upper + 1e-9))

    def test_prox_adjoint(self):
        steps = tiledSteps((16, 16), 10)
        decoded = blockIdct(self.rng.integers(-3, 4, (16, 16)) * steps)
        box = quantBoxFromJpeg(blockDct(decoded), 10)
        u = decoded + 40.0 * self.rng.standard_normal((16, 16))
        d, g = self.rng.standard_normal((2, 16, 16))
        h = 1e-6
        jd = (proxDeblock(u + h * d, box) - proxDeblock(u - h * d, box)) / (2 * h)
        lhs = float(np.vdot(jd, g))
        rhs = float(np.vdot(d, proxDeblockAdjoint(u, box, g)))
        self.assertLess(abs(lhs - rhs), 1e-6 * max(1.0, abs(rhs)))
        # strictly feasible points see the identity
        np.testing.assert_allclose(proxDeblockAdjoint(decoded, box, g), g, atol=1e-10)

    def test_active_set_signature(self):
        steps = tiledSteps((8, 8), 10)
        decoded = blockIdct(self.rng.integers(-3, 4, (8, 8)) * steps)
        box = quantBoxFromJpeg(blockDct(decoded), 10)
        far = decoded + blockIdct(steps)
        self.assertNotEqual(activeSetSignature(decoded, box), activeSetSignature(far, box))
        self.assertEqual(activeSetSignature(decoded, box),
                         activeSetSignature(decoded + 1e-3 * blockIdct(steps), box))
