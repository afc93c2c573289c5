import numpy as np
from django.test import SimpleTestCase, override_settings
from scipy import integrate

from orbitlab.density.densities import DensityField, ledrappier_density
from orbitlab.density.integrals import (
    SupportEscapesDomain, UnsupportedGroup, g_orbit_integral, ledrappier_prediction, nu_integral,
    orbit_integral_by_duality, plain_unipotent_volume,
)
from orbitlab.lattice.observables import AnnulusBump, AnnulusIndicator, SmoothBump, WholeSpace, Zero
from orbitlab.matgroup.norms import EntrywisePNorm
from orbitlab.rootsys.groups import SLn
from orbitlab.volume.cartan import MonteCarlo


FROBENIUS = EntrywisePNorm(2, dim=2)
V0 = np.array([1.0, np.sqrt(2)])


class NuIntegralTest(SimpleTestCase):
    def test_annulus_closed_form(self):
        # int over 1 <= |w| <= 2 of 1 / |w| dw = 2 pi
        for kind in ('p_norm', 'general'):
            field = DensityField([1.0, 0.0], FROBENIUS, kind)
            self.assertAlmostEqual(nu_integral(AnnulusIndicator(1, 2), field), 2 * np.pi, delta=1e-6)

    def test_zero(self):
        self.assertEqual(nu_integral(Zero(), DensityField(V0, FROBENIUS)), 0.0)

    def test_additive_over_annuli(self):
        field = DensityField(V0, EntrywisePNorm(4, dim=2))
        inner = nu_integral(AnnulusIndicator(1, 2), field)
        outer = nu_integral(AnnulusIndicator(2, 3), field)
        self.assertAlmostEqual((inner + outer) / nu_integral(AnnulusIndicator(1, 3), field), 1.0, delta=1e-6)

    def test_matches_cartesian_quadrature(self):
        norm = EntrywisePNorm(4, dim=2)
        bump = SmoothBump([3.0, 0.5], 1.0)

        def integrand(y, x):
            w = np.array([x, y])
            return float(bump(w)[0]) * ledrappier_density(V0, w, norm)

        expected, _ = integrate.dblquad(integrand, 2.0, 4.0, -0.5, 1.5, epsabs=1e-12, epsrel=1e-9)
        self.assertAlmostEqual(nu_integral(bump, DensityField(V0, norm)) / expected, 1.0, delta=1e-5)

    def test_support_must_stay_in_the_domain(self):
        with self.assertRaises(SupportEscapesDomain):
            nu_integral(WholeSpace(), DensityField(V0, FROBENIUS))
        with self.assertRaises(SupportEscapesDomain):
            nu_integral(AnnulusIndicator(1, 2), DensityField(V0, FROBENIUS, domain=([0, 0], [5, 5])))

    def test_inside_the_domain(self):
        field = DensityField([1.0, 0.0], FROBENIUS, domain=([-3, -3], [3, 3]))
        self.assertAlmostEqual(nu_integral(AnnulusIndicator(1, 2), field), 2 * np.pi, delta=1e-6)


class PredictionTest(SimpleTestCase):
    def test_plain_unipotent_volume(self):
        # ||I + t E21||_F^2 = 2 + t^2
        self.assertAlmostEqual(plain_unipotent_volume(FROBENIUS, 10), 2 * np.sqrt(98), delta=1e-9)

    def test_prediction_halves_with_the_basepoint(self):
        bump = AnnulusBump(1, 2)
        base = ledrappier_prediction(bump, V0, FROBENIUS, 500)
        doubled = ledrappier_prediction(bump, 2 * V0, FROBENIUS, 500)
        self.assertAlmostEqual(doubled / base, 0.5, delta=1e-6)

    def test_constant(self):
        field = DensityField([1.0, 0.0], FROBENIUS)
        prediction = ledrappier_prediction(AnnulusIndicator(1, 2), [1.0, 0.0], FROBENIUS, 10, field)
        expected = 6 / np.pi ** 2 * 2 * np.sqrt(98) * 2 * np.pi
        self.assertAlmostEqual(prediction / expected, 1.0, delta=1e-6)


class GOrbitIntegralTest(SimpleTestCase):
    def test_positive_near_the_basepoint(self):
        estimate = g_orbit_integral(SmoothBump(V0, 0.5), V0, FROBENIUS, 3, MonteCarlo(samples=2, seed=1, strata=2))
        self.assertGreater(estimate.value, 0)

    def test_agrees_with_duality(self):
        bump = AnnulusBump(1, 2)
        estimate = g_orbit_integral(bump, V0, FROBENIUS, 20, MonteCarlo(samples=2, seed=1, strata=2))
        self.assertAlmostEqual(estimate.value / orbit_integral_by_duality(bump, V0, FROBENIUS, 20), 1.0, delta=1e-3)

    def test_frobenius_does_not_depend_on_k2(self):
        estimate = g_orbit_integral(AnnulusBump(1, 2), V0, FROBENIUS, 20, MonteCarlo(samples=4, seed=3, strata=2))
        self.assertLess(estimate.stderr, 1e-5 * estimate.value)

    def test_independent_of_worker_count(self):
        mc = MonteCarlo(samples=4, seed=5, strata=2)
        norm = EntrywisePNorm(4, dim=2)
        with override_settings(ORBITLAB={'THREADS': 1}):
            serial = g_orbit_integral(AnnulusBump(1, 2), V0, norm, 10, mc)
        with override_settings(ORBITLAB={'THREADS': 2}):
            threaded = g_orbit_integral(AnnulusBump(1, 2), V0, norm, 10, mc)
        self.assertEqual(serial.value, threaded.value)
        self.assertEqual(serial.stderr, threaded.stderr)

    def test_empty_support(self):
        self.assertEqual(g_orbit_integral(Zero(), V0, FROBENIUS, 50).value, 0.0)

    def test_unsupported_group(self):
        with self.assertRaises(UnsupportedGroup):
            g_orbit_integral(AnnulusBump(1, 2), V0, FROBENIUS, 10, gs=SLn(3))

    def test_needs_compact_support(self):
        with self.assertRaises(SupportEscapesDomain):
            g_orbit_integral(WholeSpace(), V0, FROBENIUS, 10)
