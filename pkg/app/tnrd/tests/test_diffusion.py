import math
import numpy as np
from django.test import SimpleTestCase
from tnrd import const
from tnrd.data_terms import ProblemKind, blockDct, quantBoxFromJpeg
from tnrd.dataset import jpegRoundtrip
from tnrd.diffusion import (Model, StageParams, energy, infer, inferStages, stageForward,
                            synthesizePattern)
from tnrd.exceptions import InvalidArgumentError, ProblemMismatchError
from tnrd.filter_bank import buildDctBasis
from tnrd.image_core import crop, lagOneAutocorrelation, padSymmetric
from tnrd.influence import RbfSpec, evalPhi
from tnrd.training import TrainConfig, TrainingSample, plainInit, train


def _randomStage(rng: np.random.Generator, numFilters: int, m: int = 3, lam: float = 0.1,
                 scale: float = 0.1) -> StageParams:
    basis = buildDctBasis(m)
    rbf = RbfSpec()
    return StageParams(math.log(lam), rng.standard_normal((numFilters, basis.count)),
                       scale * rng.standard_normal((numFilters, rbf.count)))


def _zeroStage(numFilters: int, m: int = 3, lambdaRaw: float = -math.inf) -> StageParams:
    basis = buildDctBasis(m)
    filters = np.eye(numFilters, basis.count)
    return StageParams(lambdaRaw, filters, np.zeros((numFilters, RbfSpec().count)))


def _convolutionMatrix(k: np.ndarray, h: int, w: int) -> np.ndarray:
    """ Dense matrix of the symmetric-boundary convolution, built index by index."""
    def mirror(i, n):
        return -i - 1 if i < 0 else 2 * n - i - 1 if i >= n else i
    r = k.shape[0] // 2
    res = np.zeros((h * w, h * w))
    for y in range(h):
        for x in range(w):
            for a in range(k.shape[0]):
                for b in range(k.shape[1]):
                    yy, xx = mirror(y - (a - r), h), mirror(x - (b - r), w)
                    res[y * w + x, yy * w + xx] += k[a, b]
    return res


class ModelTest(SimpleTestCase):

    def test_parameter_count_and_name(self):
        model = plainInit(7, 48, RbfSpec(), 5, ProblemKind.denoise(25))
        self.assertEqual(model.parameterCount(), 5 * (48 * (48 + 63) + 1))
        self.assertEqual(model.name, 'tnrd_T5_7x7')
        self.assertEqual(model.padBorder, 30)

    def test_rejects_inconsistent_stages(self):
        rbf = RbfSpec()
        with self.assertRaises(InvalidArgumentError):
            Model([], 3, rbf, ProblemKind.denoise(25))
        with self.assertRaises(InvalidArgumentError):
            Model([_zeroStage(2), _zeroStage(3)], 3, rbf, ProblemKind.denoise(25))
        with self.assertRaises(InvalidArgumentError):
            StageParams(0.0, np.ones((2, 8)), np.zeros((3, 63)))


class StageForwardTest(SimpleTestCase):

    def setUp(self) -> None:
        self.rng = np.random.default_rng(17)
        self.basis = buildDctBasis(3)
        self.rbf = RbfSpec()

    def test_null_stage_keeps_the_estimate(self):
        u = self.rng.uniform(0, 255, (8, 8))
        f = self.rng.uniform(0, 255, (8, 8))
        out = stageForward(u, f, _zeroStage(2), ProblemKind.denoise(25), self.basis, self.rbf)
        np.testing.assert_array_equal(out, u)

    def test_plain_stage_keeps_constants(self):
        model = plainInit(3, 8, self.rbf, 1, ProblemKind.denoise(25))
        u = np.full((8, 8), 120.0)
        out = stageForward(u, u, model.stages[0], model.problem, self.basis, self.rbf)
        np.testing.assert_allclose(out, u, atol=1e-8)

    def test_matches_dense_matrices(self):
        h = w = 8
        s = _randomStage(self.rng, 2, scale=1.0)
        u = self.rng.uniform(0, 255, (h, w))
        f = self.rng.uniform(0, 255, (h, w))
        expected = u.ravel().copy()
        for k, weights in zip(s.kernels(self.basis), s.influences):
            mat = _convolutionMatrix(k, h, w)
            matBar = _convolutionMatrix(k[::-1, ::-1], h, w)
            expected -= matBar @ evalPhi(weights, self.rbf, mat @ u.ravel())
        expected -= s.lam * (u - f).ravel()
        out = stageForward(u, f, s, ProblemKind.denoise(25), self.basis, self.rbf)
        np.testing.assert_allclose(out.ravel(), expected, rtol=1e-10, atol=1e-8)

    def test_update_is_a_gradient_step_of_the_energy(self):
        h = 1e-4
        for problem, fShape in ((ProblemKind.denoise(25), (8, 8)),
                                (ProblemKind.superResolve(2), (4, 4))):
            s = _randomStage(self.rng, 2, scale=1.0)
            u = self.rng.uniform(0, 255, (8, 8))
            f = self.rng.uniform(0, 255, fShape)
            step = u - stageForward(u, f, s, problem, self.basis, self.rbf,
                                    boundary=const.BOUNDARY_ZERO)
            fd = np.zeros_like(u)
            for idx in np.ndindex(u.shape):
                up, um = u.copy(), u.copy()
                up[idx] += h
                um[idx] -= h
                fd[idx] = (energy(up, f, s, problem, self.basis, self.rbf, const.BOUNDARY_ZERO)
                           - energy(um, f, s, problem, self.basis, self.rbf,
                                    const.BOUNDARY_ZERO)) / (2 * h)
            self.assertLess(float(np.linalg.norm(step - fd)), 1e-5 * float(np.linalg.norm(step)))

    def test_energy_needs_a_smooth_problem(self):
        u = np.zeros((8, 8))
        with self.assertRaises(ProblemMismatchError):
            energy(u, u, _zeroStage(2, lambdaRaw=0.0), ProblemKind.deblock(10), self.basis,
                   self.rbf)

    def test_canvas_must_fit_the_observation(self):
        with self.assertRaises(InvalidArgumentError):
            stageForward(np.zeros((8, 8)), np.zeros((6, 6)), _zeroStage(2),
                         ProblemKind.denoise(25), self.basis, self.rbf)


class InferTest(SimpleTestCase):

    def setUp(self) -> None:
        self.rng = np.random.default_rng(19)
        self.rbf = RbfSpec()

    def test_null_model_returns_the_observation(self):
        f = self.rng.uniform(0, 255, (10, 12))
        model = Model([_zeroStage(2), _zeroStage(2)], 3, self.rbf, ProblemKind.denoise(25))
        np.testing.assert_array_equal(infer(model, f), f)
        self.assertEqual(len(inferStages(model, f)), 2)

    def test_padding_covers_the_stencil(self):
        model = Model([_randomStage(self.rng, 3, scale=1.0)], 3, self.rbf,
                      ProblemKind.denoise(25))
        f = self.rng.uniform(0, 255, (12, 12))
        wide = crop(infer(model, padSymmetric(f, 4)), 4)
        np.testing.assert_allclose(infer(model, f), wide, atol=1e-8)

    def test_deterministic_and_single_precision(self):
        model = Model([_randomStage(self.rng, 2, scale=1.0) for _ in range(2)], 3, self.rbf,
                      ProblemKind.denoise(25))
        f = self.rng.uniform(0, 255, (16, 16))
        np.testing.assert_array_equal(infer(model, f), infer(model, f))
        single = infer(model, f, dtype=np.float32)
        self.assertEqual(single.dtype, np.float32)
        np.testing.assert_allclose(single, infer(model, f), atol=1e-2)

    def test_super_resolution_output_shape(self):
        model = Model([_randomStage(self.rng, 2)], 3, self.rbf, ProblemKind.superResolve(3))
        self.assertEqual(infer(model, self.rng.uniform(0, 255, (5, 6))).shape, (15, 18))

    def test_deblocking_stays_feasible(self):
        gt = self.rng.uniform(0, 255, (16, 24))
        jpeg = jpegRoundtrip(gt, 10)
        box = quantBoxFromJpeg(blockDct(jpeg.decoded), 10)
        null = Model([_zeroStage(2, lambdaRaw=0.0)], 3, self.rbf, ProblemKind.deblock(10))
        np.testing.assert_allclose(infer(null, jpeg.decoded), jpeg.decoded, atol=1e-9)
        model = Model([_randomStage(self.rng, 2, scale=5.0)], 3, self.rbf,
                      ProblemKind.deblock(10))
        coeffs = blockDct(infer(model, jpeg.decoded))
        self.assertTrue(np.all(coeffs >= box.lower - 1e-8))
        self.assertTrue(np.all(coeffs <= box.upper + 1e-8))

    def test_deblocking_off_the_block_grid(self):
        model = Model([_randomStage(self.rng, 2)], 3, self.rbf, ProblemKind.deblock(20))
        f = jpegRoundtrip(self.rng.uniform(0, 255, (13, 10)), 20).decoded
        self.assertEqual(infer(model, f).shape, (13, 10))

    def test_observation_of_the_wrong_size(self):
        model = Model([_randomStage(self.rng, 2)], 3, self.rbf, ProblemKind.deblock(20))
        box = quantBoxFromJpeg(np.zeros((8, 8)), 20)
        with self.assertRaises(ProblemMismatchError):
            infer(model, np.zeros((16, 16)), box)


class SynthesizeTest(SimpleTestCase):

    def test_range_and_determinism(self):
        rng = np.random.default_rng(23)
        basis, rbf = buildDctBasis(3), RbfSpec()
        s = _randomStage(rng, 4, scale=50.0)
        a = synthesizePattern(s, basis, rbf, (20, 30), 5, seed=3)
        self.assertEqual(a.shape, (20, 30))
        self.assertTrue(np.all((a >= 0.0) & (a <= 255.0)))
        np.testing.assert_array_equal(a, synthesizePattern(s, basis, rbf, (20, 30), 5, seed=3))

    def test_null_diffusion_returns_the_noise(self):
        basis, rbf = buildDctBasis(3), RbfSpec()
        expected = np.random.default_rng(4).uniform(0.0, 255.0, size=(6, 7))
        np.testing.assert_array_equal(synthesizePattern(_zeroStage(2), basis, rbf, (6, 7), 3, 4),
                                      expected)
        with self.assertRaises(InvalidArgumentError):
            synthesizePattern(_zeroStage(2), basis, rbf, (6, 7), 0, 4)

    def test_trained_denoising_stage_forms_structure(self):
        rng = np.random.default_rng(31)
        yy, xx = np.mgrid[0:24, 0:24] / 24.0
        samples = []
        for _ in range(4):
            a, b, c = rng.uniform(1.0, 3.0, 3)
            gt = 127.5 + 100.0 * np.sin(2 * np.pi * (a * xx + c)) * np.cos(2 * np.pi * b * yy)
            samples.append(TrainingSample(gt + 25.0 * rng.standard_normal(gt.shape), gt))
        skeleton = plainInit(3, 8, RbfSpec(), 1, ProblemKind.denoise(25))
        model = train(samples, skeleton, TrainConfig(scheme=const.SCHEME_GREEDY, lbfgsIters=30))

        noise = np.random.default_rng(0).uniform(0.0, 255.0, size=(48, 48))
        pattern = synthesizePattern(model.stages[0], model.basis, model.rbf, (48, 48), 50, seed=0)
        self.assertTrue(np.all((pattern >= 0.0) & (pattern <= 255.0)))
        self.assertLess(abs(lagOneAutocorrelation(noise)), 0.1)
        self.assertGreater(lagOneAutocorrelation(pattern), lagOneAutocorrelation(noise) + 0.5)
