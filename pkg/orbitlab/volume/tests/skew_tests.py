import numpy as np
from django.test import SimpleTestCase

from orbitlab.matgroup.norms import EntrywisePNorm
from orbitlab.volume.skew import (
    DegenerateDirection, NonMonotoneProfile, check_spiral_profile, limit_ratio_alpha, richardson_limit,
    spiral_h_volume, spiral_profile, spiral_rotation, spiral_skew_volume, spiral_thresholds, spiral_volume_fn,
    unipotent_skewball_volume,
)


MAX_NORM = EntrywisePNorm(np.inf, dim=2)
IDENTITY = np.eye(2)


class UnipotentSkewBallTest(SimpleTestCase):
    def test_identity_max_norm(self):
        # ||I + t E21|| = max(1, |t|)
        self.assertAlmostEqual(unipotent_skewball_volume(IDENTITY, IDENTITY, MAX_NORM, 50), 100.0, places=8)

    def test_asymptotic_length(self):
        g1 = np.array([[2.0, 1.0], [1.0, 1.0]])
        g2 = np.array([[1.0, 0.5], [-0.3, 0.85]])
        norm = EntrywisePNorm(3, dim=2)
        b = g1 @ np.array([[0.0, 0.0], [1.0, 0.0]]) @ g2
        T = 1e4
        value = unipotent_skewball_volume(g1, g2, norm, T)
        self.assertAlmostEqual(value / (2 * T / norm.evaluate(b)), 1.0, delta=1e-3)

    def test_empty_slice(self):
        self.assertEqual(unipotent_skewball_volume(IDENTITY, IDENTITY, MAX_NORM, 0.5), 0.0)

    def test_degenerate_direction(self):
        with self.assertRaises(DegenerateDirection):
            unipotent_skewball_volume(np.zeros((2, 2)), IDENTITY, MAX_NORM, 10)


class SpiralVolumeTest(SimpleTestCase):
    c = 1.1

    def test_volume_along_full_turns(self):
        for n in (2, 3):
            T = self.c * np.exp(2 * np.pi * n)
            self.assertAlmostEqual(spiral_h_volume(self.c, T) / T ** 4 / (np.pi / (2 * self.c ** 2)), 1.0, places=8)

    def test_volume_along_quarter_turns(self):
        for n in (2, 3):
            S = float(spiral_profile(self.c, 0.0, (2 * n + 0.5) * np.pi))
            self.assertAlmostEqual(spiral_h_volume(self.c, S) / S ** 4 / (np.pi / 2), 1.0, places=8)

    def test_monotone_in_threshold(self):
        values = [spiral_h_volume(self.c, T) for T in np.linspace(2, 400, 50)]
        self.assertEqual(values, sorted(values))

    def test_empty_below_one(self):
        self.assertEqual(spiral_h_volume(self.c, 1.0), 0.0)

    def test_non_monotone_profile(self):
        check_spiral_profile(2.0)
        with self.assertRaises(NonMonotoneProfile):
            check_spiral_profile(3.0)
        with self.assertRaises(NonMonotoneProfile):
            spiral_h_volume(3.0, 100)

    def test_one_sided_ratio_oscillates(self):
        full_turns = [self.c * np.exp(2 * np.pi * n) for n in (2, 3)]
        quarter_turns = [float(spiral_profile(self.c, 0.0, (2 * n + 0.5) * np.pi)) for n in (2, 3)]

        for T in full_turns:
            ratio = spiral_skew_volume(self.c, np.pi / 2, T) / spiral_h_volume(self.c, T)
            self.assertAlmostEqual(ratio, self.c ** 2, delta=0.01)
        for S in quarter_turns:
            ratio = spiral_skew_volume(self.c, np.pi / 2, S) / spiral_h_volume(self.c, S)
            self.assertAlmostEqual(ratio, 1 / self.c ** 2, delta=0.01)

    def test_limit_ratio_reports_instability(self):
        def volume(left, right, T):
            phase = np.arctan2(right[1, 0], right[0, 0])
            return spiral_skew_volume(self.c, phase, T)

        quarter = np.array([[0.0, -1.0], [1.0, 0.0]])
        schedule = [self.c * np.exp(2 * np.pi * n) for n in (1, 2)] + [
            float(spiral_profile(self.c, 0.0, (2 * n + 0.5) * np.pi)) for n in (1, 2)
        ]
        result = limit_ratio_alpha(None, IDENTITY, quarter, None, schedule, volume=volume)
        self.assertGreater(result.stability, 0.3)

    def test_thresholds(self):
        full, quarter = spiral_thresholds(self.c, 3)
        self.assertEqual(len(full), 3)
        self.assertAlmostEqual(spiral_h_volume(self.c, full[-1]) / full[-1] ** 4, np.pi / (2 * self.c ** 2), delta=1e-6)
        self.assertAlmostEqual(spiral_h_volume(self.c, quarter[-1]) / quarter[-1] ** 4, np.pi / 2, delta=1e-6)

    def test_volume_fn_adds_phases(self):
        volume = spiral_volume_fn(self.c)
        T = 1e4
        self.assertAlmostEqual(volume(np.eye(3), spiral_rotation(np.pi / 2), T),
                               spiral_skew_volume(self.c, np.pi / 2, T))
        self.assertAlmostEqual(volume(spiral_rotation(0.3), spiral_rotation(0.4), T),
                               spiral_skew_volume(self.c, 0.7, T))

    def test_two_sided_rotation_is_invisible(self):
        # R^-1 h R = h for the rotation part, so the ratio is 1 along every threshold
        quarter = spiral_rotation(np.pi / 2)
        full, quarters = spiral_thresholds(self.c, 2)
        result = limit_ratio_alpha(None, quarter, quarter, None, full + quarters, volume=spiral_volume_fn(self.c))
        np.testing.assert_allclose(result.ratios, 1.0, rtol=1e-9)

    def test_volume_fn_rejects_other_translates(self):
        with self.assertRaises(ValueError):
            spiral_volume_fn(self.c)(np.eye(3), np.diag([2.0, 0.5, 1.0]), 100)


class LimitRatioTest(SimpleTestCase):
    def unipotent(self, left, right, T):
        return unipotent_skewball_volume(left, right, MAX_NORM, T)

    def test_identity_is_exactly_one(self):
        result = limit_ratio_alpha(None, IDENTITY, IDENTITY, MAX_NORM, [10, 100, 1000], volume=self.unipotent)
        self.assertEqual(result.estimate, 1.0)
        self.assertEqual(result.stability, 0.0)
        self.assertEqual(result.ratios, [1.0, 1.0, 1.0])

    def test_unipotent_limit(self):
        # g1^-1 E21 g2 = [[-1, 0], [2, 0]] has max-norm 2
        g1 = np.array([[2.0, 1.0], [1.0, 1.0]])
        result = limit_ratio_alpha(None, g1, IDENTITY, MAX_NORM, [10, 100, 1000], volume=self.unipotent)
        self.assertAlmostEqual(result.estimate, 0.5, places=6)
        self.assertEqual(list(result.to_dataframe().columns), ['T', 'ratio'])

    def test_richardson_recovers_the_limit(self):
        thresholds = [10.0, 20.0, 40.0, 80.0]
        ratios = [0.7 + 3.0 * T ** -1.5 for T in thresholds]
        estimate, kappa = richardson_limit(thresholds, ratios)
        self.assertAlmostEqual(estimate, 0.7, places=8)
        self.assertAlmostEqual(kappa, 1.5, places=6)

    def test_richardson_falls_back_on_oscillation(self):
        estimate, kappa = richardson_limit([1.0, 2.0, 3.0], [1.0, 2.0, 1.5])
        self.assertEqual(estimate, 1.5)
        self.assertIsNone(kappa)
