import datetime
import json
import os
import shutil
import tempfile

import pytz
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase
from io import StringIO
from unittest.mock import patch

from orbitlab.experiments.manifest import RunManifest
from orbitlab.experiments.pilot import PILOT_RUNS, PilotFailed, freeze_expected_values, run_pilot
from orbitlab.experiments.scenarios import EXPECTED_VALUES
from orbitlab.version import __version__


FROZEN_AT = datetime.datetime(2024, 6, 1, tzinfo=pytz.utc)


class PilotTestCase(SimpleTestCase):
    def setUp(self):
        super(PilotTestCase, self).setUp()
        self.directory = tempfile.mkdtemp()
        self.addCleanup(shutil.rmtree, self.directory)
        self.path = os.path.join(self.directory, 'expected_values.json')
        shutil.copy(EXPECTED_VALUES, self.path)

    def manifests(self, weyl_sum=0.01, passed=True):
        torus = RunManifest('torus', 'hash-torus', 7, self.directory)
        torus.set_verdict('weyl_sum_1_0', passed, weyl_sum, 0.05, 'weyl_sum')
        torus.set_verdict('weyl_sum_0_0', True, 1.0, 1e-12, 'zero_frequency')
        control = RunManifest('torus', 'hash-control', 7, self.directory)
        control.set_verdict('weyl_sum_1_0', True, 1.0, 0.5, 'control')
        modular = RunManifest('translate-modular', 'hash-modular', 7, self.directory)
        modular.set_verdict('total_mass', True, 1200)
        return {'torus': torus, 'torus-control': control, 'translate-modular': modular}

    def read(self):
        with open(self.path) as f:
            return json.load(f)


class FreezeExpectedValuesTest(PilotTestCase):
    def test_records_observations(self):
        expected = freeze_expected_values(self.manifests(), self.path, FROZEN_AT)
        self.assertEqual(expected, self.read())

        weyl_sum = expected['torus']['weyl_sum']
        self.assertEqual(weyl_sum['tolerance'], 0.05)
        self.assertEqual(weyl_sum['pilot'], {
            'observed': {'weyl_sum_1_0': 0.01},
            'runs': {'torus': 'hash-torus'},
            'seed': 7,
            'version': __version__,
            'frozen_at': '2024-06-01T00:00:00+00:00',
        })
        self.assertEqual(expected['torus']['control']['pilot']['runs'], {'torus-control': 'hash-control'})
        self.assertEqual(expected['torus']['zero_frequency']['pilot']['observed'], {'weyl_sum_0_0': 1.0})
        self.assertNotIn('pilot', expected['translate-modular']['cell_proportions'])

    def test_failed_pilot_is_not_frozen(self):
        with open(self.path, 'rb') as f:
            before = f.read()
        with self.assertRaises(PilotFailed) as cm:
            freeze_expected_values(self.manifests(weyl_sum=0.3, passed=False), self.path, FROZEN_AT)
        self.assertEqual(cm.exception.failures, ['torus:weyl_sum_1_0'])
        with open(self.path, 'rb') as f:
            self.assertEqual(f.read(), before)

    def test_refreeze_replaces_the_record(self):
        freeze_expected_values(self.manifests(weyl_sum=0.02), self.path, FROZEN_AT)
        manifests = self.manifests(weyl_sum=0.01)
        del manifests['torus-control']
        expected = freeze_expected_values(manifests, self.path, FROZEN_AT)
        self.assertEqual(expected['torus']['weyl_sum']['pilot']['observed'], {'weyl_sum_1_0': 0.01})
        self.assertNotIn('pilot', expected['torus']['control'])

    @patch('orbitlab.experiments.pilot.LOG')
    def test_unknown_check(self, log):
        manifest = RunManifest('torus', 'hash-torus', 7, self.directory)
        manifest.set_verdict('weyl_sum_1_0', True, 0.01, None, 'unknown_check')
        freeze_expected_values({'torus': manifest}, self.path, FROZEN_AT)
        self.assertEqual(log.warning.call_count, 1)


class RunPilotTest(SimpleTestCase):
    def test_runs_every_configuration(self):
        configs = []

        def run(config):
            configs.append(config)
            return RunManifest(config.scenario, config.config_hash, config.seed, config.output_dir)

        with patch('orbitlab.experiments.pilot.scenarios.run_scenario', side_effect=run):
            manifests = run_pilot('/tmp/pilot', seed=11)

        self.assertEqual(list(manifests), [label for label, _ in PILOT_RUNS])
        self.assertEqual({config.seed for config in configs}, {11})
        self.assertEqual(manifests['torus-control'].output_dir, '/tmp/pilot/torus-control')
        control = configs[[label for label, _ in PILOT_RUNS].index('torus-control')]
        self.assertTrue(control.params['control'])


class PilotCommandTest(SimpleTestCase):
    def call(self, *args):
        stdout = StringIO()
        call_command('orbitlab_pilot', *args, '--out', '/tmp/pilot', stdout=stdout)
        return stdout.getvalue()

    def manifest(self, passed):
        manifest = RunManifest('torus', 'abc', 1, '/tmp/pilot')
        manifest.set_verdict('weyl_sum_1_0', passed, 0.01, 0.05, 'weyl_sum')
        return {'torus': manifest}

    @patch('orbitlab.management.commands.orbitlab_pilot.freeze_expected_values')
    def test_dry_run(self, freeze):
        with patch('orbitlab.management.commands.orbitlab_pilot.run_pilot', return_value=self.manifest(True)):
            output = self.call('--dry-run')
        self.assertIn('torus: Pass', output)
        freeze.assert_not_called()

    @patch('orbitlab.management.commands.orbitlab_pilot.freeze_expected_values')
    def test_freeze(self, freeze):
        manifests = self.manifest(True)
        with patch('orbitlab.management.commands.orbitlab_pilot.run_pilot', return_value=manifests):
            output = self.call('--expected-values', '/tmp/pilot/expected.json')
        freeze.assert_called_once_with(manifests, '/tmp/pilot/expected.json')
        self.assertIn('Froze pilot observations', output)

    def test_failed_pilot(self):
        with patch('orbitlab.management.commands.orbitlab_pilot.run_pilot', return_value=self.manifest(False)):
            with self.assertRaises(CommandError) as cm:
                self.call('--expected-values', '/tmp/pilot/expected.json')
        self.assertEqual(cm.exception.returncode, 2)
