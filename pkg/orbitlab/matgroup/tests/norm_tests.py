import numpy as np
from django.test import SimpleTestCase

from orbitlab.matgroup.matrices import DimMismatch, RealMatrix
from orbitlab.matgroup.norms import (
    EntrywisePNorm, MaxColumnNorm, SpiralNorm, WeightedEntrywise, InvalidNorm, norm_eval, norm_from_dict,
)


def all_norms():
    return [
        EntrywisePNorm(1, dim=2),
        EntrywisePNorm(2, dim=2),
        EntrywisePNorm(4, dim=2),
        EntrywisePNorm(np.inf, dim=2),
        EntrywisePNorm(2, dim=3),
        MaxColumnNorm(2, dim=3),
        MaxColumnNorm(1, dim=2),
        SpiralNorm(1.1),
        WeightedEntrywise([[1.0, 2.0], [0.5, 3.0]], p=2),
    ]


class NormAxiomTest(SimpleTestCase):
    def test_axioms_on_random_matrices(self):
        rng = np.random.default_rng(2024)
        for norm in all_norms():
            a = rng.normal(size=(1000, norm.dim, norm.dim)) * rng.lognormal(size=(1000, 1, 1))
            b = rng.normal(size=(1000, norm.dim, norm.dim))
            t = rng.normal(size=(1000, 1, 1)) * 5
            na, nb = norm.evaluate(a), norm.evaluate(b)

            # triangle inequality
            self.assertTrue(np.all(norm.evaluate(a + b) <= (na + nb) * (1 + 1e-12)), norm)
            # absolute homogeneity
            np.testing.assert_allclose(norm.evaluate(t * a), np.abs(t[:, 0, 0]) * na, rtol=1e-12)
            # positivity
            self.assertTrue(np.all(na > 0), norm)
            self.assertEqual(norm.evaluate(np.zeros((norm.dim, norm.dim))), 0.0)

    def test_frobenius_of_identity(self):
        self.assertAlmostEqual(norm_eval(EntrywisePNorm(2), RealMatrix.identity(2)), np.sqrt(2), places=15)

    def test_spiral_of_identity(self):
        self.assertAlmostEqual(norm_eval(SpiralNorm(1.21), np.eye(3)), 1.1, places=14)

    def test_spiral_formula(self):
        a = np.array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0], [7.0, 8.0, 9.0]])
        c = 1.5
        expected = max(np.sqrt(c + 4), np.sqrt(c * 25 + 16), np.sqrt(9 + 36), 7, 8, 9)
        self.assertAlmostEqual(SpiralNorm(c).evaluate(a), expected, places=13)

    def test_homogeneity_by_two(self):
        a = np.array([[0.3, -1.2], [2.5, 0.1]])
        for norm in all_norms():
            if norm.dim == 2:
                self.assertAlmostEqual(norm.evaluate(2 * a), 2 * norm.evaluate(a), places=12)

    def test_frobenius_rotation_invariance(self):
        rng = np.random.default_rng(8)
        norm = EntrywisePNorm(2)
        for _ in range(100):
            a = rng.normal(size=(2, 2))
            r1 = RealMatrix.rotation(rng.uniform(0, 2 * np.pi)).entries
            r2 = RealMatrix.rotation(rng.uniform(0, 2 * np.pi)).entries
            self.assertAlmostEqual(norm.evaluate(r1 @ a @ r2), norm.evaluate(a), delta=1e-12 * norm.evaluate(a))

    def test_entry_bound(self):
        rng = np.random.default_rng(9)
        for norm in all_norms():
            a = rng.normal(size=(500, norm.dim, norm.dim)) * 10
            values = norm.evaluate(a)
            bound = np.abs(a).max(axis=(-2, -1))
            self.assertTrue(np.all(values >= norm.entry_constant() * bound * (1 - 1e-12)))

    def test_dim_mismatch(self):
        with self.assertRaises(DimMismatch):
            EntrywisePNorm(2, dim=2).evaluate(np.eye(3))

    def test_invalid_parameters(self):
        with self.assertRaises(InvalidNorm):
            EntrywisePNorm(0.5)
        with self.assertRaises(InvalidNorm):
            SpiralNorm(1.0)
        with self.assertRaises(InvalidNorm):
            SpiralNorm(2.0, dim=2)
        with self.assertRaises(InvalidNorm):
            WeightedEntrywise([[1, -1], [1, 1]])

    def test_from_dict(self):
        self.assertEqual(norm_from_dict({'kind': 'entrywise', 'p': 'inf', 'dim': 2}), EntrywisePNorm(np.inf, 2))
        self.assertEqual(norm_from_dict({'kind': 'spiral', 'c': 1.1}), SpiralNorm(1.1))
        with self.assertRaises(InvalidNorm):
            norm_from_dict({'kind': 'operator'})
        with self.assertRaises(InvalidNorm):
            norm_from_dict({'kind': 'entrywise', 'radius': 2})
