"""
Run manifests: what a scenario run computed, where it wrote it and whether each acceptance check passed.
"""
import json
import logging
import os
from datetime import datetime
from enum import Enum

import pytz
import wrapt
from dateutil import parser as date_parser

from orbitlab.version import __version__


LOG = logging.getLogger(__name__)

MANIFEST_NAME = 'manifest.json'


class StepStatus(Enum):
    ACTIVE = 'ACTIVE'
    SUCCESS = 'SUCCESS'
    FAILURE = 'FAILURE'


def utc_now():
    return datetime.now(pytz.utc)


def _timestamp(value):
    return value.isoformat() if value is not None else None


def _parse_timestamp(value):
    if value is None:
        return None
    parsed = date_parser.isoparse(value)
    return parsed if parsed.tzinfo else pytz.utc.localize(parsed)


class ManifestStep(object):
    """
    The state of one scenario step.
    """

    def __init__(self, name, status=StepStatus.ACTIVE, time_started=None, time_finished=None, error_message=None):
        self.name = name
        self.status = status
        self.time_started = time_started or utc_now()
        self.time_finished = time_finished
        self.error_message = error_message

    def finish(self, status=StepStatus.SUCCESS, error_message=None):
        self.status = status
        self.time_finished = utc_now()
        self.error_message = error_message
        return self

    def success(self):
        return self.finish(StepStatus.SUCCESS)

    def failure(self, error_message):
        return self.finish(StepStatus.FAILURE, error_message)

    def to_dict(self):
        return {
            'name': self.name,
            'status': self.status.value,
            'time_started': _timestamp(self.time_started),
            'time_finished': _timestamp(self.time_finished),
            'error_message': self.error_message,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(data['name'], StepStatus(data['status']), _parse_timestamp(data['time_started']),
                   _parse_timestamp(data.get('time_finished')), data.get('error_message'))


class RunManifest(object):
    """
    :param outputs: artifact name -> file path
    :param verdicts: check name -> dict with ``passed`` and the observed value and tolerance
    :param series: plot series name -> dict with the table path and the two column names
    """

    def __init__(self, scenario, config_hash, seed, output_dir, version=__version__, timestamp=None, steps=None,
                 outputs=None, verdicts=None, series=None):
        self.scenario = scenario
        self.config_hash = config_hash
        self.seed = seed
        self.output_dir = output_dir
        self.version = version
        self.timestamp = timestamp or utc_now()
        self.steps = steps or []
        self.outputs = outputs or {}
        self.verdicts = verdicts or {}
        self.series = series or {}

    def start_step(self, name) -> ManifestStep:
        step = ManifestStep(name)
        self.steps.append(step)
        return step

    def add_output(self, name, path):
        self.outputs[name] = path

    def add_series(self, name, table, x, y):
        self.series[name] = {'table': table, 'x': x, 'y': y}

    def set_verdict(self, name, passed, value=None, tolerance=None, check=None):
        """
        ``check`` names the expected-values entry the tolerance came from.
        """
        self.verdicts[name] = {'passed': bool(passed), 'value': value, 'tolerance': tolerance, 'check': check}
        log = LOG.info if passed else LOG.warning
        log('%s check %s: %s (value %s, tolerance %s)', self.scenario, name, 'Pass' if passed else 'Fail', value,
            tolerance)

    @property
    def passed(self) -> bool:
        return all(verdict['passed'] for verdict in self.verdicts.values())

    @property
    def path(self):
        return os.path.join(self.output_dir, MANIFEST_NAME)

    def to_dict(self):
        return {
            'scenario': self.scenario,
            'config_hash': self.config_hash,
            'seed': self.seed,
            'output_dir': self.output_dir,
            'version': self.version,
            'timestamp': _timestamp(self.timestamp),
            'steps': [step.to_dict() for step in self.steps],
            'outputs': self.outputs,
            'verdicts': self.verdicts,
            'series': self.series,
        }

    def save(self, path=None):
        path = path or self.path
        with open(path, 'w') as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
        LOG.info('Wrote the %s manifest to %s', self.scenario, path)
        return path

    @classmethod
    def from_dict(cls, data):
        return cls(
            data['scenario'], data['config_hash'], data['seed'], data['output_dir'], data['version'],
            _parse_timestamp(data['timestamp']), [ManifestStep.from_dict(step) for step in data.get('steps', [])],
            data.get('outputs'), data.get('verdicts'), data.get('series'),
        )

    @classmethod
    def load(cls, path) -> 'RunManifest':
        with open(path, 'r') as f:
            return cls.from_dict(json.load(f))

    def __repr__(self):
        return 'RunManifest({0}, {1})'.format(self.scenario, 'Pass' if self.passed else 'Fail')


def scenario_step(name=None):
    """
    Records a step of a scenario in the manifest of the run passed as the first argument, marking it failed
    with the error message when the step raises.
    """
    @wrapt.decorator
    def wrapper(wrapped, instance, args, kwargs):
        run = args[0]
        step = run.manifest.start_step(name or wrapped.__name__)
        LOG.info('Starting step %s of %s', step.name, run.manifest.scenario)
        try:
            result = wrapped(*args, **kwargs)
        except Exception as e:
            step.failure(str(e))
            raise
        step.success()
        return result
    return wrapper
