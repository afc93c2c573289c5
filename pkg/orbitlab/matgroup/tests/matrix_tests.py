import numpy as np
from django.test import SimpleTestCase

from orbitlab.matgroup.matrices import (
    ExactMatrix, RealMatrix, MatrixOverflow, NonUnimodular, NonFiniteEntries, DimMismatch, mat_mul,
    inverse_unimodular, stack_det,
)


def random_unimodular(rng, dim, steps=6):
    """
    Product of random elementary matrices, so the determinant is exactly 1.
    """
    result = ExactMatrix.identity(dim)
    for _ in range(steps):
        i, j = rng.choice(dim, size=2, replace=False)
        elementary = np.eye(dim, dtype=np.int64)
        elementary[i, j] = rng.integers(-3, 4)
        result = mat_mul(result, ExactMatrix(elementary, unimodular=True))
    return result


class ExactMatrixTest(SimpleTestCase):
    def test_identity_product(self):
        identity = ExactMatrix.identity(2)
        self.assertEqual(mat_mul(identity, identity), identity)

    def test_hand_product(self):
        a = ExactMatrix([[1, 1], [0, 1]])
        b = ExactMatrix([[1, 0], [1, 1]])
        self.assertEqual(mat_mul(a, b), ExactMatrix([[2, 1], [1, 1]]))

    def test_associativity(self):
        rng = np.random.default_rng(7)
        for dim in (2, 3):
            a, b, c = [ExactMatrix(rng.integers(-50, 50, size=(dim, dim))) for _ in range(3)]
            self.assertEqual(mat_mul(mat_mul(a, b), c), mat_mul(a, mat_mul(b, c)))

    def test_overflow_is_an_error(self):
        big = ExactMatrix([[2 ** 62, 0], [0, 1]])
        with self.assertRaises(MatrixOverflow):
            mat_mul(big, ExactMatrix([[4, 0], [0, 1]]))

    def test_constructor_rejects_out_of_range(self):
        with self.assertRaises(MatrixOverflow):
            ExactMatrix([[2 ** 64, 0], [0, 1]])

    def test_unimodular_tag_rejects_other_determinants(self):
        with self.assertRaises(NonUnimodular):
            ExactMatrix([[2, 0], [0, 1]], unimodular=True)
        self.assertEqual(ExactMatrix([[0, 1], [1, 0]], unimodular=True).det(), -1)

    def test_dim_mismatch(self):
        with self.assertRaises(DimMismatch):
            mat_mul(ExactMatrix.identity(2), ExactMatrix.identity(3))
        with self.assertRaises(DimMismatch):
            ExactMatrix([[1, 2, 3], [4, 5, 6]])

    def test_determinant_is_multiplicative(self):
        rng = np.random.default_rng(11)
        for dim in (2, 3):
            for _ in range(20):
                a = random_unimodular(rng, dim)
                b = -random_unimodular(rng, dim) if dim == 3 else random_unimodular(rng, dim)
                self.assertEqual(mat_mul(a, b).det(), a.det() * b.det())

    def test_stack_det_matches_exact(self):
        rng = np.random.default_rng(5)
        for dim in (2, 3):
            stack = rng.integers(-9, 10, size=(25, dim, dim))
            expected = [ExactMatrix(m).det() for m in stack]
            self.assertEqual(stack_det(stack).tolist(), expected)


class InverseUnimodularTest(SimpleTestCase):
    def test_identity(self):
        self.assertEqual(inverse_unimodular(ExactMatrix.identity(3)), ExactMatrix.identity(3))

    def test_unipotent(self):
        self.assertEqual(inverse_unimodular(ExactMatrix([[1, 1], [0, 1]])), ExactMatrix([[1, -1], [0, 1]]))

    def test_random_inverse(self):
        rng = np.random.default_rng(3)
        for dim in (2, 3):
            for _ in range(20):
                a = random_unimodular(rng, dim)
                self.assertEqual(mat_mul(inverse_unimodular(a), a), ExactMatrix.identity(dim))

    def test_determinant_minus_one(self):
        a = ExactMatrix([[0, 1, 0], [1, 0, 0], [0, 0, 1]])
        self.assertEqual(mat_mul(inverse_unimodular(a), a), ExactMatrix.identity(3))

    def test_non_unimodular(self):
        with self.assertRaises(NonUnimodular):
            inverse_unimodular(ExactMatrix([[2, 1], [1, 2]]))


class RealMatrixTest(SimpleTestCase):
    def test_rejects_nan_and_inf(self):
        with self.assertRaises(NonFiniteEntries):
            RealMatrix([[np.nan, 0], [0, 1]])
        with self.assertRaises(NonFiniteEntries):
            RealMatrix([[np.inf, 0], [0, 1]])

    def test_rotation_is_orthogonal(self):
        r = RealMatrix.rotation(0.3)
        np.testing.assert_allclose((r @ r.inverse()).entries, np.eye(2), atol=1e-14)
        np.testing.assert_allclose(r.inverse().entries, r.entries.T, atol=1e-14)

    def test_rotation_block_in_three_dimensions(self):
        r = RealMatrix.rotation(np.pi / 2, dim=3)
        np.testing.assert_allclose(r.entries, [[0, -1, 0], [1, 0, 0], [0, 0, 1]], atol=1e-15)
