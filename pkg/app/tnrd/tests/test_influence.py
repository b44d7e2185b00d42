import numpy as np
from django.test import SimpleTestCase
from tnrd import const
from tnrd.exceptions import InvalidArgumentError
from tnrd.influence import (RbfSpec, evalPhi, evalPhiPrime, evalPhiWeightGradient, evalRho,
                            fitGrid, fitWeights)
from tnrd.training import plainInfluence


class RbfSpecTest(SimpleTestCase):

    def test_default_grid(self):
        spec = RbfSpec()
        self.assertEqual(spec.count, 63)
        self.assertEqual(spec.centers[0], -310.0)
        self.assertEqual(spec.max, 310.0)
        self.assertEqual(spec.centers[31], 0.0)

    def test_rejects_bad_grid(self):
        with self.assertRaises(InvalidArgumentError):
            RbfSpec(kind='cubic')
        with self.assertRaises(InvalidArgumentError):
            RbfSpec(gamma=0.0)
        with self.assertRaises(InvalidArgumentError):
            RbfSpec(count=1)


class EvaluationTest(SimpleTestCase):

    def setUp(self) -> None:
        self.rng = np.random.default_rng(5)

    def test_single_weight_gives_the_basis_peak(self):
        for kind in const.RBF_KINDS:
            spec = RbfSpec(kind=kind)
            w = np.zeros(spec.count)
            w[40] = 2.5
            self.assertAlmostEqual(float(evalPhi(w, spec, spec.centers[40])), 2.5, places=12)
            self.assertEqual(float(evalPhi(np.zeros(spec.count), spec, 17.0)), 0.0)

    def test_shape_is_preserved(self):
        spec = RbfSpec()
        z = self.rng.uniform(-300, 300, (4, 5))
        self.assertEqual(evalPhi(self.rng.standard_normal(spec.count), spec, z).shape, (4, 5))
        self.assertEqual(evalPhiWeightGradient(spec, z).shape, (4, 5, spec.count))

    def test_derivative_against_differences(self):
        spec = RbfSpec()
        w = self.rng.standard_normal(spec.count)
        z = self.rng.uniform(-300, 300, 200)
        h = 1e-5
        fd = (evalPhi(w, spec, z + h) - evalPhi(w, spec, z - h)) / (2 * h)
        np.testing.assert_allclose(evalPhiPrime(w, spec, z), fd, rtol=1e-6, atol=1e-8)

    def test_triangular_derivative_takes_the_left_limit(self):
        spec = RbfSpec(kind=const.RBF_TRIANGULAR)
        w = np.zeros(spec.count)
        w[20] = 1.0
        self.assertAlmostEqual(float(evalPhiPrime(w, spec, spec.centers[20])), 1.0 / spec.gamma)
        self.assertAlmostEqual(float(evalPhiPrime(w, spec, spec.centers[20] + 5.0)),
                               -1.0 / spec.gamma)

    def test_rho_is_the_antiderivative(self):
        h = 1e-3
        for kind in const.RBF_KINDS:
            spec = RbfSpec(kind=kind)
            w = self.rng.standard_normal(spec.count)
            # away from the triangular corners
            z = spec.centers[:-1] + 3.7
            self.assertEqual(float(evalRho(w, spec, 0.0)), 0.0)
            fd = (evalRho(w, spec, z + h) - evalRho(w, spec, z - h)) / (2 * h)
            np.testing.assert_allclose(fd, evalPhi(w, spec, z), rtol=1e-6, atol=1e-6)

    def test_weight_gradient_is_linear_in_weights(self):
        spec = RbfSpec()
        w = self.rng.standard_normal(spec.count)
        z = self.rng.uniform(-300, 300, 50)
        np.testing.assert_allclose(evalPhiWeightGradient(spec, z) @ w, evalPhi(w, spec, z),
                                   atol=1e-12)

    def test_gaussian_vanishes_far_outside(self):
        spec = RbfSpec()
        w = np.ones(spec.count)
        self.assertLess(abs(float(evalPhi(w, spec, spec.max + 11 * spec.gamma))), 1e-21)

    def test_weights_of_wrong_length(self):
        with self.assertRaises(InvalidArgumentError):
            evalPhi(np.zeros(5), RbfSpec(), 0.0)


class FitTest(SimpleTestCase):

    def test_plain_influence_fit(self):
        spec = RbfSpec()
        w = fitWeights(plainInfluence, spec)
        z = fitGrid(spec)
        z = z[np.abs(z) <= 300]
        self.assertLess(float(np.max(np.abs(evalPhi(w, spec, z) - plainInfluence(z)))), 0.01)

    def test_recovers_a_single_basis_function(self):
        for kind in const.RBF_KINDS:
            spec = RbfSpec(kind=kind)
            target = np.zeros(spec.count)
            target[12] = 1.0
            w = fitWeights(lambda z, t=target, s=spec: evalPhi(t, s, z), spec)
            np.testing.assert_allclose(w, target, atol=1e-8)

    def test_zero_target(self):
        spec = RbfSpec()
        np.testing.assert_allclose(fitWeights(np.zeros_like, spec), 0.0, atol=1e-12)

    def test_sparse_grid(self):
        spec = RbfSpec()
        with self.assertRaises(InvalidArgumentError):
            fitWeights(np.zeros_like, spec, grid=spec.centers)
