import numpy as np
from django.test import SimpleTestCase

from orbitlab.audit.auditors import (
    audit_d1, audit_d2, audit_i1, audit_i2, audit_uc, largest_reversal, traceless_directions, uc_ratio,
    wide_range_elements,
)
from orbitlab.audit.reports import AuditVerdict
from orbitlab.density.densities import DEFAULT_SCHEDULE, ledrappier_density, section, unipotent_volume_fn
from orbitlab.lattice.spec import SL, LatticeSpec
from orbitlab.matgroup.distance import DistanceFunction
from orbitlab.matgroup.norms import EntrywisePNorm
from orbitlab.rootsys.groups import SLn
from orbitlab.volume.cartan import Quadrature
from orbitlab.volume.skew import spiral_h_volume, spiral_rotation, spiral_thresholds, spiral_volume_fn


FROBENIUS = EntrywisePNorm(2, dim=2)


class Wobbly(object):
    """
    g -> g (2 + sin(sum of squared entries)), which oscillates ever faster as g grows.
    """
    group_dim = 2

    def represent(self, g):
        g = np.asarray(g, dtype=np.float64)
        return g * (2 + np.sin(np.sum(g ** 2)))


class SamplingTest(SimpleTestCase):
    def test_wide_range_elements_are_unimodular(self):
        elements = wide_range_elements(np.random.default_rng(4), 3, 20)
        np.testing.assert_allclose(np.linalg.det(elements), 1.0, rtol=1e-6)
        self.assertLessEqual(np.abs(elements).max(), 1e6 * 3)

    def test_directions_are_traceless_unit(self):
        directions = traceless_directions(np.random.default_rng(4), 3, 10)
        np.testing.assert_allclose(np.trace(directions, axis1=1, axis2=2), 0.0, atol=1e-12)
        np.testing.assert_allclose(np.linalg.norm(directions, axis=(1, 2)), 1.0)


class UcAuditTest(SimpleTestCase):
    def test_ratio_at_identity(self):
        D = DistanceFunction(FROBENIUS)
        self.assertEqual(uc_ratio(D, np.diag([5.0, 0.2]), np.eye(2)), 1.0)

    def test_ratio_closed_form(self):
        D = DistanceFunction(FROBENIUS)
        R, eta = 30.0, 1e-3
        expected = np.sqrt(1 + R ** 2 * eta ** 2 / (R ** 2 + R ** -2))
        self.assertAlmostEqual(uc_ratio(D, np.diag([R, 1 / R]), [[1.0, eta], [0.0, 1.0]]), expected, places=12)

    def test_frobenius_passes(self):
        report = audit_uc(DistanceFunction(FROBENIUS), 0.1, g_samples=16, u_samples=8, seed=3)
        self.assertEqual(report.verdict, AuditVerdict.PASS)
        # ||exp(r X)||_op <= e^r for a unit direction X
        self.assertGreaterEqual(report.details['radius'], 0.09)
        self.assertLess(report.max_violation, 0)

    def test_wobbly_representation_fails(self):
        report = audit_uc(DistanceFunction(FROBENIUS, Wobbly()), 0.1, g_samples=64, u_samples=8, seed=3)
        self.assertEqual(report.verdict, AuditVerdict.FAIL)
        self.assertGreaterEqual(report.witness['ratio'], 1.1)
        self.assertTrue(report.replay())

    def test_non_positive_epsilon(self):
        report = audit_uc(DistanceFunction(FROBENIUS), 0.0)
        self.assertEqual(report.verdict, AuditVerdict.INCONCLUSIVE)


class I1AuditTest(SimpleTestCase):
    def test_frobenius_growth(self):
        # m(G_T) = T^2 / 2 - 1, so delta approaches sqrt(1 + epsilon) - 1
        report = audit_i1(SLn(2), FROBENIUS, 0.1, thresholds=(1e2, 1e3), method=Quadrature(4))
        self.assertEqual(report.verdict, AuditVerdict.PASS)
        self.assertAlmostEqual(report.details['delta'] / (np.sqrt(1.1) - 1), 1.0, delta=0.01)
        self.assertEqual(report.details['T0'], 100.0)

    def test_zero_epsilon_is_inconclusive(self):
        report = audit_i1(SLn(2), FROBENIUS, 0.0)
        self.assertEqual(report.verdict, AuditVerdict.INCONCLUSIVE)
        self.assertIn('reason', report.details)

    def test_spiral_volume(self):
        report = audit_i1(None, None, 0.1, volume=lambda T: spiral_h_volume(1.1, T))
        self.assertEqual(report.verdict, AuditVerdict.PASS)
        self.assertGreater(report.details['delta'], 0)


class D1AuditTest(SimpleTestCase):
    def test_unipotent_growth_is_linear(self):
        sample = [(section([1.0, 2.0]), section([0.3, 1.0])), (np.eye(2), np.eye(2))]
        report = audit_d1(None, FROBENIUS, sample, 0.1, volume=unipotent_volume_fn(FROBENIUS))
        self.assertEqual(report.verdict, AuditVerdict.PASS)
        self.assertAlmostEqual(report.details['delta'] / 0.1, 1.0, delta=0.01)
        self.assertEqual(report.details['pairs'], 2)
        self.assertEqual(len(report.grid), 6)

    def test_spiral_translates(self):
        sample = [(np.eye(3), spiral_rotation(np.pi / 2)), (spiral_rotation(0.3), np.eye(3))]
        report = audit_d1(None, None, sample, 0.1, volume=spiral_volume_fn(1.1))
        self.assertEqual(report.verdict, AuditVerdict.PASS)

    def test_empty_sample(self):
        report = audit_d1(None, FROBENIUS, [], 0.1, volume=unipotent_volume_fn(FROBENIUS))
        self.assertEqual(report.verdict, AuditVerdict.INCONCLUSIVE)


class I2AuditTest(SimpleTestCase):
    lattice = LatticeSpec(SL, 2)

    def test_frobenius_constant(self):
        # #Gamma_T ~ 6 T^2 against m(G_T) ~ T^2 / 2
        report = audit_i2(self.lattice, SLn(2), FROBENIUS, (1.5, 100, 200), method=Quadrature(8))
        self.assertEqual(report.verdict, AuditVerdict.PASS)
        self.assertAlmostEqual(report.details['constant'] / 12, 1.0, delta=0.1)
        self.assertAlmostEqual(report.details['covolume_estimate'] * 12, 1.0, delta=0.1)
        self.assertAlmostEqual(report.details['count_slope'], 2.0, delta=0.1)
        self.assertEqual(report.details['noisy'], [1.5])
        self.assertTrue(report.grid[0]['noisy'])

    def test_zero_tolerance_fails_and_replays(self):
        report = audit_i2(self.lattice, SLn(2), FROBENIUS, (50, 100), method=Quadrature(8), tolerance=0.0)
        self.assertEqual(report.verdict, AuditVerdict.FAIL)
        self.assertTrue(report.replay())

    def test_empty_schedule(self):
        self.assertEqual(audit_i2(self.lattice, SLn(2), FROBENIUS, ()).verdict, AuditVerdict.INCONCLUSIVE)

    def test_only_noisy_thresholds(self):
        report = audit_i2(self.lattice, SLn(2), FROBENIUS, (1.2, 1.5), method=Quadrature(8))
        self.assertEqual(report.verdict, AuditVerdict.INCONCLUSIVE)


class LargestReversalTest(SimpleTestCase):
    def test_monotone(self):
        self.assertEqual(largest_reversal([1.0, 2.0, 3.0])[0], 0.0)
        self.assertEqual(largest_reversal([3.0, 2.0, 1.0])[0], 0.0)

    def test_rising_with_a_drawdown(self):
        self.assertEqual(largest_reversal([1.0, 3.0, 2.0, 4.0]), (1.0, 1, 2))

    def test_falling_with_a_run_up(self):
        self.assertEqual(largest_reversal([4.0, 2.0, 3.0, 1.0]), (1.0, 1, 2))


class D2AuditTest(SimpleTestCase):
    c = 1.1

    def test_unipotent_limit_is_the_density(self):
        v, w = [1.0, 2.0], [0.3, 1.0]
        report = audit_d2(None, section(v), section(w), FROBENIUS, DEFAULT_SCHEDULE,
                          volume=unipotent_volume_fn(FROBENIUS))
        self.assertEqual(report.verdict, AuditVerdict.PASS)
        self.assertAlmostEqual(report.details['limit'] / ledrappier_density(v, w, FROBENIUS), 1.0, delta=0.01)

    def test_identity_pair(self):
        report = audit_d2(SLn(2), np.eye(2), np.eye(2), FROBENIUS, (10, 100, 1000))
        self.assertEqual(report.verdict, AuditVerdict.PASS)
        self.assertEqual(report.details['limit'], 1.0)
        self.assertEqual(report.details['oscillation'], 0.0)

    def test_spiral_oscillation_fails(self):
        full, quarter = spiral_thresholds(self.c, 4)
        report = audit_d2(None, np.eye(3), spiral_rotation(np.pi / 2), None, sorted(full + quarter),
                          volume=spiral_volume_fn(self.c))
        self.assertEqual(report.verdict, AuditVerdict.FAIL)
        low, high = report.witness['band']
        self.assertAlmostEqual(low * self.c ** 2, 1.0, delta=0.05)
        self.assertAlmostEqual(high / self.c ** 2, 1.0, delta=0.05)
        self.assertTrue(report.replay())

    def test_two_thresholds_needed(self):
        report = audit_d2(SLn(2), np.eye(2), np.eye(2), FROBENIUS, (10,))
        self.assertEqual(report.verdict, AuditVerdict.INCONCLUSIVE)
