import json
import os
import shutil
import tempfile

import numpy as np
import pandas as pd
from django.test import SimpleTestCase
from unittest.mock import patch

from orbitlab.experiments.forms import SCENARIO_FORMS, parse_config
from orbitlab.experiments.manifest import StepStatus
from orbitlab.experiments.scenarios import SCENARIOS, run_scenario, tolerance
from orbitlab.volume.cartan import VolumeEstimate
from orbitlab.volume.skew import NonMonotoneProfile


FROBENIUS = {'kind': 'entrywise', 'p': 2, 'dim': 2}


class ScenarioTestCase(SimpleTestCase):
    def setUp(self):
        super(ScenarioTestCase, self).setUp()
        self.directory = tempfile.mkdtemp()
        self.addCleanup(shutil.rmtree, self.directory)

    def run_config(self, scenario, output_dir=None, **kwargs):
        data = {'schema_version': 1, 'scenario': scenario, 'output_dir': output_dir or self.directory}
        data.update(kwargs)
        return run_scenario(parse_config(data))

    def read_table(self, manifest, name):
        return pd.read_csv(manifest.outputs[name])


class RegistryTest(SimpleTestCase):
    def test_every_scenario_has_a_runner(self):
        self.assertEqual(set(SCENARIOS), set(SCENARIO_FORMS))

    def test_tolerances(self):
        self.assertEqual(tolerance('ledrappier', 'ratio_at_largest_T'), 0.10)
        self.assertEqual(tolerance('oppenheim-frames', 'slope'), 0.3)


class LedrappierScenarioTest(ScenarioTestCase):
    def test_zero_observable(self):
        manifest = self.run_config('ledrappier', observable={'kind': 'zero'}, thresholds=[10, 20])
        table = self.read_table(manifest, 'ledrappier')
        self.assertEqual(table['S'].tolist(), [0.0, 0.0])
        self.assertEqual(table['S_tilde'].tolist(), [0.0, 0.0])
        self.assertEqual(table['nu'].tolist(), [0.0, 0.0])
        self.assertTrue(np.all(table['count'] > 0))
        self.assertTrue(manifest.passed)
        self.assertEqual([step.name for step in manifest.steps], ['orbit_sums'])
        self.assertTrue(os.path.exists(manifest.path))
        self.assertEqual(set(manifest.series), {'ledrappier_ratio', 'ledrappier_error'})


class TorusScenarioTest(ScenarioTestCase):
    def test_rational_basepoint_control(self):
        manifest = self.run_config('torus', x0=[0, 0], control=True, thresholds=[15])
        table = self.read_table(manifest, 'torus')
        np.testing.assert_allclose(table['W'], 1.0)
        self.assertEqual(set(manifest.verdicts), {'weyl_sum_0_0', 'weyl_sum_1_0', 'weyl_sum_0_1'})
        self.assertTrue(manifest.passed)

    def test_zero_frequency(self):
        manifest = self.run_config('torus', frequencies=[[0, 0], [2, 1]], thresholds=[15])
        self.assertTrue(manifest.verdicts['weyl_sum_0_0']['passed'])
        table = self.read_table(manifest, 'torus')
        self.assertEqual(table['k'].tolist(), ['0 0', '2 1'])
        self.assertTrue(0 <= table['W'].iloc[1] <= 1)

    def test_reproducible(self):
        first = self.run_config('torus', output_dir=os.path.join(self.directory, 'a'), thresholds=[15])
        second = self.run_config('torus', output_dir=os.path.join(self.directory, 'b'), thresholds=[15])
        with open(first.outputs['torus'], 'rb') as f, open(second.outputs['torus'], 'rb') as g:
            self.assertEqual(f.read(), g.read())


class TranslateModularScenarioTest(ScenarioTestCase):
    def test_identity_control(self):
        manifest = self.run_config('translate-modular', g0=[[1, 0], [0, 1]], control=True, thresholds=[20])
        table = self.read_table(manifest, 'translate_modular')
        self.assertEqual(len(table), 6)
        self.assertEqual(table['count'].sum(), table['total'].iloc[0])
        self.assertTrue(manifest.verdicts['total_mass']['passed'])
        self.assertTrue(manifest.verdicts['single_cell']['passed'])
        self.assertAlmostEqual(table['expected'].sum(), 1.0)


class CounterexampleD2ScenarioTest(ScenarioTestCase):
    def test_spiral(self):
        manifest = self.run_config('counterexample-d2', c=1.1, n=3)
        self.assertTrue(manifest.passed)
        self.assertEqual(set(manifest.verdicts), {'volume_T', 'volume_S', 'skew_T', 'skew_S', 'd2_violated'})

        table = self.read_table(manifest, 'spiral')
        self.assertEqual(table['n'].tolist(), [1, 2, 3])
        np.testing.assert_allclose(table['two_sided_T'], 1.0, rtol=1e-9)

        with open(manifest.outputs['audit_d2']) as f:
            self.assertEqual(json.load(f)['verdict'], 'Fail')

    def test_non_monotone_profile(self):
        with self.assertRaises(NonMonotoneProfile):
            self.run_config('counterexample-d2', c=3.0, n=1)


class NonbalancedScenarioTest(ScenarioTestCase):
    def volumes(self, capped):
        def volume(gs, norm, T, method=None, caps=None):
            return VolumeEstimate(capped(T) if caps else 100.0)
        return volume

    def test_positive_fraction(self):
        with patch('orbitlab.experiments.scenarios.chamber_sector_volume', self.volumes(lambda T: 60.0)):
            manifest = self.run_config('nonbalanced')
        table = self.read_table(manifest, 'nonbalanced')
        self.assertEqual(table['p'].tolist(), [1.0, 1.0, 2.0, 2.0])
        np.testing.assert_allclose(table['fraction'], 0.6)
        self.assertTrue(manifest.passed)

    def test_vanishing_fraction(self):
        with patch('orbitlab.experiments.scenarios.chamber_sector_volume', self.volumes(lambda T: 1e4 / T)):
            manifest = self.run_config('nonbalanced', thresholds=[1e3, 1e4])
        self.assertFalse(manifest.verdicts['fraction_floor_p1']['passed'])
        self.assertFalse(manifest.verdicts['fraction_drift_p2']['passed'])
        self.assertTrue(manifest.verdicts['same_verdict']['passed'])
        self.assertTrue(manifest.verdicts['structural_verdict']['passed'])
        self.assertFalse(manifest.passed)


class OppenheimScenarioTest(ScenarioTestCase):
    def test_empty_box(self):
        box = {'lo': np.ones((3, 3)).tolist(), 'hi': np.zeros((3, 3)).tolist()}
        manifest = self.run_config('oppenheim-frames', box=box, thresholds=[5, 10])
        self.assertEqual(self.read_table(manifest, 'oppenheim')['count'].tolist(), [0, 0])
        self.assertEqual(set(manifest.verdicts), {'empty_box'})
        self.assertTrue(manifest.passed)


class VolumeSweepScenarioTest(ScenarioTestCase):
    def test_closed_form(self):
        manifest = self.run_config('volume-sweep', group={'family': 'SLn', 'n': 2}, norm=FROBENIUS,
                                   thresholds=[10, 100, 1000])
        table = self.read_table(manifest, 'volume_sweep')
        np.testing.assert_allclose(table['value'], [T ** 2 / 2 - 1 for T in (10, 100, 1000)], rtol=1e-5)
        with open(manifest.outputs['volume_sweep_summary']) as f:
            self.assertAlmostEqual(json.load(f)['slope'], 2.0, delta=0.02)
        self.assertEqual(manifest.steps[0].status, StepStatus.SUCCESS)


class AuditScenarioTest(ScenarioTestCase):
    def test_unipotent_identity_pair(self):
        manifest = self.run_config('audit', condition='d2', subgroup='unipotent', norm=FROBENIUS)
        self.assertTrue(manifest.verdicts['audit_d2']['passed'])
        with open(manifest.outputs['audit_d2']) as f:
            report = json.load(f)
        self.assertEqual(report['verdict'], 'Pass')
        self.assertEqual(report['details']['limit'], 1.0)

    def test_spiral_oscillation(self):
        manifest = self.run_config('audit', condition='d2', subgroup='spiral', thresholds=[1e3, 1e4, 1e5, 1e6])
        self.assertIn('audit_d2', manifest.verdicts)
        self.assertEqual([step.name for step in manifest.steps], ['audit'])

    def test_zero_epsilon_is_inconclusive(self):
        manifest = self.run_config('audit', condition='i1', group={'family': 'SLn', 'n': 2}, norm=FROBENIUS,
                                   epsilon=0)
        self.assertFalse(manifest.passed)
        with open(manifest.outputs['audit_i1']) as f:
            self.assertEqual(json.load(f)['verdict'], 'Inconclusive')
