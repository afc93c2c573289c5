"""
Runs one scenario: ``orbitlab <scenario> --config <file> [--seed N] [--out DIR] [--threads K]``.

Exit codes: 0 when every verdict passes, 2 when a numeric verdict fails, 3 when an enumeration budget is
exceeded or the scenario is infeasible, 4 for configuration errors.
"""
import json
import logging

import numpy as np
from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from orbitlab.experiments.forms import SCENARIO_FORMS, SCHEMA_VERSION, ConfigError, parse_config
from orbitlab.experiments.plots import UnknownSeries, emit_plot_data
from orbitlab.experiments.scenarios import run_scenario
from orbitlab.lattice.enumeration import BudgetExceeded
from orbitlab.volume.skew import NonMonotoneProfile


LOG = logging.getLogger(__name__)

EXIT_VERDICT_FAILED = 2
EXIT_INFEASIBLE = 3
EXIT_CONFIG = 4


def _json_object(value):
    try:
        data = json.loads(value)
    except ValueError as e:
        raise ConfigError({'__all__': ['Expected a JSON object, got {0!r}: {1}'.format(value, e)]})
    if not isinstance(data, dict):
        raise ConfigError({'__all__': ['Expected a JSON object, got {0!r}'.format(value)]})
    return data


def _read_config(path):
    try:
        with open(path, 'r') as f:
            return json.load(f)
    except (OSError, ValueError) as e:
        raise ConfigError({'__all__': ['Cannot read {0}: {1}'.format(path, e)]})


class Command(BaseCommand):
    help = 'Runs an orbitlab scenario and writes its tables and run manifest to the output directory.'

    def add_arguments(self, parser):
        parser.add_argument('scenario', choices=sorted(SCENARIO_FORMS))
        parser.add_argument('--config', help='JSON scenario configuration')
        parser.add_argument('--seed', type=int)
        parser.add_argument('--out', dest='output_dir', help='Output directory')
        parser.add_argument('--threads', type=int)
        parser.add_argument('--condition', choices=['uc', 'i1', 'i2', 'd1', 'd2'])
        parser.add_argument('--group', help='JSON group spec, for instance {"family": "SLn", "n": 2}')
        parser.add_argument('--norm', help='JSON norm spec, for instance {"kind": "entrywise", "p": "2"}')
        parser.add_argument('--tmin', type=float)
        parser.add_argument('--tmax', type=float)
        parser.add_argument('--points', type=int, default=5)
        parser.add_argument('--plot', action='store_true', help='Emit the plot series of the run')

    def config_data(self, options):
        """
        The configuration file merged with the command line overrides.
        """
        data = _read_config(options['config']) if options['config'] else {}
        data.setdefault('schema_version', SCHEMA_VERSION)
        if data.setdefault('scenario', options['scenario']) != options['scenario']:
            raise ConfigError({'scenario': ['The config describes {0}, not {1}'.format(
                data['scenario'], options['scenario']
            )]})

        for key in ('seed', 'output_dir', 'threads', 'condition'):
            if options[key] is not None:
                data[key] = options[key]
        for key in ('group', 'norm'):
            if options[key] is not None:
                data[key] = _json_object(options[key])

        if options['tmin'] is not None or options['tmax'] is not None:
            if options['tmin'] is None or options['tmax'] is None or options['points'] < 2:
                raise ConfigError({'thresholds': ['--tmin and --tmax go together, with at least two --points']})
            if not 0 < options['tmin'] < options['tmax']:
                raise ConfigError({'thresholds': ['Expected 0 < tmin < tmax']})
            data['thresholds'] = np.geomspace(options['tmin'], options['tmax'], options['points']).tolist()
        return data

    def handle(self, *args, **options):
        try:
            config = parse_config(self.config_data(options))
        except ConfigError as e:
            raise CommandError(str(e), returncode=EXIT_CONFIG)

        previous = getattr(settings, 'ORBITLAB', {})
        settings.ORBITLAB = dict(previous, THREADS=config.threads)
        try:
            manifest = run_scenario(config)
        except (BudgetExceeded, NonMonotoneProfile) as e:
            raise CommandError(str(e), returncode=EXIT_INFEASIBLE)
        finally:
            settings.ORBITLAB = previous

        if options['plot']:
            try:
                emit_plot_data(manifest)
            except UnknownSeries as e:
                raise CommandError(str(e), returncode=EXIT_CONFIG)

        self.stdout.write('{0}: {1} ({2})'.format(config.scenario, 'Pass' if manifest.passed else 'Fail',
                                                  manifest.path))
        if not manifest.passed:
            failed = sorted(name for name, verdict in manifest.verdicts.items() if not verdict['passed'])
            raise CommandError('Failed checks: {0}'.format(', '.join(failed)), returncode=EXIT_VERDICT_FAILED)
