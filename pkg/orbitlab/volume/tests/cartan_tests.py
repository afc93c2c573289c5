import numpy as np
from django.test import SimpleTestCase
from scipy import integrate

from orbitlab.rootsys.groups import SLn, SL2xSL2Tensor
from orbitlab.rootsys.tests.group_tests import all_groups
from orbitlab.volume.cartan import (
    AsymptoticLaw, ExponentialPolynomial, MonteCarlo, OutsideChamber, Quadrature, VolumeEstimate, xi,
)


class XiTest(SimpleTestCase):
    def test_rank_one(self):
        rs = SLn(2).root_system
        for t in (0.1, 1.0, 3.5):
            self.assertAlmostEqual(xi(rs, [t / 2]), np.sinh(t))

    def test_zero(self):
        self.assertEqual(xi(SLn(2).root_system, [0.0]), 0.0)
        self.assertEqual(xi(SLn(3).root_system, [0.0, 0.0]), 0.0)

    def test_product_of_rank_one_factors(self):
        rs = SL2xSL2Tensor(3).root_system
        self.assertAlmostEqual(xi(rs, [0.4 / 2, 1.3 / 2]), np.sinh(0.4) * np.sinh(1.3))

    def test_outside_chamber(self):
        with self.assertRaises(OutsideChamber):
            xi(SLn(2).root_system, [-0.1])


class ExponentialPolynomialTest(SimpleTestCase):
    def test_matches_xi_in_the_chamber(self):
        rng = np.random.default_rng(11)
        for gs in all_groups():
            rs = gs.root_system
            expansion = ExponentialPolynomial.from_root_system(rs)
            dual = np.array(rs.dual_basis, dtype=np.float64)
            for y in rng.uniform(0.2, 1.5, size=(10, rs.rank)) @ dual:
                self.assertAlmostEqual(expansion.evaluate(y) / xi(rs, y), 1.0, places=6)

    def test_segment_integral(self):
        expansion = ExponentialPolynomial.from_root_system(SLn(2).root_system)
        self.assertAlmostEqual(expansion.integrate_segment([0.5], [0.0], 0, 3), np.cosh(3) - 1, places=12)

    def test_segment_integral_against_quadrature(self):
        rs = SLn(3).root_system
        expansion = ExponentialPolynomial.from_root_system(rs)
        direction, offset = np.array([0.5, 0.25]), np.array([0.3, 0.1])
        expected, _ = integrate.quad(lambda t: xi(rs, offset + t * direction), 0.2, 2.5, epsrel=1e-12)
        self.assertAlmostEqual(expansion.integrate_segment(direction, offset, 0.2, 2.5) / expected, 1.0, places=9)


class MonteCarloTest(SimpleTestCase):
    def test_streams_depend_on_seed_and_stratum_only(self):
        mc = MonteCarlo(samples=100, seed=7, strata=4)
        np.testing.assert_array_equal(mc.stream(2).uniform(size=5), MonteCarlo(seed=7).stream(2).uniform(size=5))
        self.assertFalse(np.array_equal(mc.stream(1).uniform(size=5), mc.stream(2).uniform(size=5)))

    def test_stratum_sizes(self):
        self.assertEqual(MonteCarlo(samples=10, strata=4).stratum_sizes(), [3, 3, 2, 2])


class VolumeEstimateTest(SimpleTestCase):
    def test_rejects_bad_values(self):
        for value in (-1.0, np.nan, np.inf):
            with self.assertRaises(ValueError):
                VolumeEstimate(value)

    def test_from_samples(self):
        estimate = VolumeEstimate.from_samples([1.0, 3.0], MonteCarlo())
        self.assertEqual(estimate.value, 2.0)
        self.assertAlmostEqual(estimate.stderr, 1.0)
        self.assertEqual(estimate.to_dict()['method'], 'mc')

    def test_quadrature_default(self):
        self.assertEqual(VolumeEstimate(1.0).to_dict(), {
            'value': 1.0, 'stderr': 0.0, 'method': 'quadrature', 'nodes': 32, 'rel_tol': 1e-8,
        })
        self.assertIsInstance(VolumeEstimate(1.0).method, Quadrature)


class AsymptoticLawTest(SimpleTestCase):
    def test_matrix_norm(self):
        law = AsymptoticLaw.matrix_norm(0.5, 2, 0)
        self.assertAlmostEqual(law.evaluate(10), 50.0)
        self.assertEqual(law.to_dict()['kind'], 'MatrixNorm')

    def test_log_power(self):
        law = AsymptoticLaw.matrix_norm(1.0, 1, 1)
        self.assertAlmostEqual(law.evaluate(np.e ** 2), 2 * np.e ** 2)

    def test_riemannian(self):
        law = AsymptoticLaw.riemannian(0.5, 0.0, 2.0)
        self.assertAlmostEqual(law.evaluate(1.0), 0.5 * np.e ** 2)

    def test_unknown_constant(self):
        with self.assertRaises(ValueError):
            AsymptoticLaw.matrix_norm(None, 2, None).evaluate(10)

    def test_invalid(self):
        with self.assertRaises(ValueError):
            AsymptoticLaw.matrix_norm(1.0, 0, 0)
        with self.assertRaises(ValueError):
            AsymptoticLaw.riemannian(-1.0, 0.5, 2.0)
