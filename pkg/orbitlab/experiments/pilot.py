"""
The pilot phase: runs every acceptance scenario once at its default settings and freezes what it observed
into the expected-values file next to each tolerance.

Tolerances stay the acceptance bounds. The pilot refuses to freeze a run in which any check fails, so a frozen
file always documents observed values that sit inside their bounds, together with the seed, the config hash
and the package version that produced them.
"""
import datetime
import json
import logging
import os

import pytz

from orbitlab.conf import get_setting
from orbitlab.experiments import forms, scenarios
from orbitlab.experiments.forms import SCHEMA_VERSION, parse_config


LOG = logging.getLogger(__name__)

PILOT_RUNS = (
    ('ledrappier', {'scenario': forms.LEDRAPPIER}),
    ('torus', {'scenario': forms.TORUS}),
    ('torus-control', {'scenario': forms.TORUS, 'x0': [0, 0], 'control': True}),
    ('translate-modular', {'scenario': forms.TRANSLATE_MODULAR}),
    ('counterexample-d2', {'scenario': forms.COUNTEREXAMPLE_D2}),
    ('nonbalanced', {'scenario': forms.NONBALANCED}),
    ('oppenheim-frames', {'scenario': forms.OPPENHEIM}),
)


class PilotFailed(Exception):
    def __init__(self, failures):
        self.failures = failures
        super(PilotFailed, self).__init__('Pilot checks failed: {0}'.format(', '.join(failures)))


def run_pilot(output_dir, seed=None) -> dict:
    """
    Runs each pilot configuration into its own subdirectory of ``output_dir``.

    :return: run label -> RunManifest
    """
    seed = get_setting('DEFAULT_SEED') if seed is None else seed
    manifests = {}
    for label, data in PILOT_RUNS:
        config = parse_config(dict(data, schema_version=SCHEMA_VERSION, seed=seed,
                                   output_dir=os.path.join(output_dir, label)))
        LOG.info('Pilot run %s', label)
        manifests[label] = scenarios.run_scenario(config)
    return manifests


def freeze_expected_values(manifests, path=scenarios.EXPECTED_VALUES, frozen_at=None) -> dict:
    """
    Writes the pilot observations into the expected-values file at ``path`` and returns its new contents.
    Each tolerance entry gets a ``pilot`` record with the observed value of every verdict checked against it,
    the config hash of each contributing run, the seed and the package version. Earlier records are replaced.

    :param manifests: run label -> RunManifest, as returned by run_pilot
    :raises PilotFailed: when a pilot check failed; the file is left untouched
    """
    failures = sorted(
        '{0}:{1}'.format(label, name)
        for label, manifest in manifests.items()
        for name, verdict in manifest.verdicts.items() if not verdict['passed']
    )
    if failures:
        raise PilotFailed(failures)

    with open(path, 'r') as f:
        expected = json.load(f)
    for checks in expected.values():
        for entry in checks.values():
            entry.pop('pilot', None)

    frozen_at = (frozen_at or datetime.datetime.now(pytz.utc)).isoformat()
    for label, manifest in sorted(manifests.items()):
        for name, verdict in sorted(manifest.verdicts.items()):
            check = verdict.get('check')
            if check is None or verdict['value'] is None:
                continue
            entry = expected.get(manifest.scenario, {}).get(check)
            if entry is None:
                LOG.warning('No expected-values entry for %s/%s, skipping', manifest.scenario, check)
                continue
            pilot = entry.setdefault('pilot', {'observed': {}, 'runs': {}})
            pilot['observed'][name] = verdict['value']
            pilot['runs'][label] = manifest.config_hash
            pilot.update(seed=manifest.seed, version=manifest.version, frozen_at=frozen_at)

    with open(path, 'w') as f:
        json.dump(expected, f, indent=2)
        f.write('\n')
    scenarios.clear_expected_values()
    LOG.info('Froze pilot observations into %s', path)
    return expected
