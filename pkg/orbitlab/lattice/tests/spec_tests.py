import numpy as np
from django.test import SimpleTestCase

from orbitlab.lattice.spec import (
    CARTAN, DET_PM1, SL, ZETA_2, ZETA_3, LatticeSpec, UnsupportedLattice, lattice_covolume,
)


class LatticeSpecTest(SimpleTestCase):
    def test_membership(self):
        self.assertTrue(LatticeSpec(SL, 2).contains([[2, 1], [1, 1]]))
        self.assertFalse(LatticeSpec(SL, 2).contains([[1, 1], [1, 0]]))
        self.assertTrue(LatticeSpec(DET_PM1, 2).contains([[1, 1], [1, 0]]))
        self.assertFalse(LatticeSpec(SL, 3).contains([[1, 0], [0, 1]]))

    def test_unsupported(self):
        with self.assertRaises(UnsupportedLattice):
            LatticeSpec(SL, 4)
        with self.assertRaises(UnsupportedLattice):
            LatticeSpec('Gamma0', 2)

    def test_equality(self):
        self.assertEqual(LatticeSpec(SL, 2), LatticeSpec())
        self.assertNotEqual(LatticeSpec(SL, 2), LatticeSpec(DET_PM1, 2))
        self.assertEqual(len({LatticeSpec(), LatticeSpec(SL, 2)}), 1)


class CovolumeTest(SimpleTestCase):
    def test_delta_normalization(self):
        self.assertAlmostEqual(lattice_covolume(LatticeSpec(SL, 2)), np.pi ** 2 / 6)
        self.assertAlmostEqual(lattice_covolume(LatticeSpec(DET_PM1, 3)), ZETA_2 * ZETA_3)

    def test_cartan_normalization(self):
        self.assertAlmostEqual(lattice_covolume(LatticeSpec(SL, 2), CARTAN), 1 / 12)
        with self.assertRaises(UnsupportedLattice):
            lattice_covolume(LatticeSpec(SL, 3), CARTAN)
