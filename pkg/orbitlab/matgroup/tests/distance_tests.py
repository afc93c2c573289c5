import numpy as np
from django.test import SimpleTestCase

from orbitlab.matgroup.distance import DistanceFunction, distance
from orbitlab.matgroup.matrices import ExactMatrix, RealMatrix
from orbitlab.matgroup.norms import EntrywisePNorm


class DistanceTest(SimpleTestCase):
    def setUp(self):
        self.frobenius = DistanceFunction(EntrywisePNorm(2))

    def test_identity(self):
        self.assertAlmostEqual(distance(self.frobenius, RealMatrix.identity(2)), np.sqrt(2))

    def test_diagonal(self):
        for s in (1.0, 2.5, 7.0):
            g = RealMatrix(np.diag([np.exp(s), np.exp(-s)]))
            self.assertAlmostEqual(
                distance(self.frobenius, g), np.sqrt(np.exp(2 * s) + np.exp(-2 * s)), delta=1e-12 * np.exp(s)
            )

    def test_clamped_at_one(self):
        self.assertEqual(distance(self.frobenius, RealMatrix([[0.1, 0], [0, 0.2]])), 1.0)
        self.assertEqual(self.frobenius(np.zeros((2, 2))), 1.0)

    def test_exact_matrices_are_accepted(self):
        self.assertAlmostEqual(self.frobenius(ExactMatrix([[1, 1], [0, 1]])), np.sqrt(3))

    def test_proper_along_divergent_sequence(self):
        values = [self.frobenius(np.array([[1.0, n], [0.0, 1.0]])) for n in (10, 100, 1000, 10000)]
        self.assertTrue(all(b > a for a, b in zip(values, values[1:])))
        self.assertGreater(values[-1], 9999)

    def test_custom_representation(self):
        class Doubler(object):
            def represent(self, g):
                return 2 * np.asarray(g, dtype=float)

        dist = DistanceFunction(EntrywisePNorm(2), representation=Doubler())
        self.assertAlmostEqual(dist(np.eye(2)), 2 * np.sqrt(2))

    def test_evaluate_many(self):
        stack = np.array([np.eye(2), 0.1 * np.eye(2), 3 * np.eye(2)])
        np.testing.assert_allclose(self.frobenius.evaluate_many(stack), [np.sqrt(2), 1.0, 3 * np.sqrt(2)])
