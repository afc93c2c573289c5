"""
Runs the acceptance scenarios once and freezes the observed values into the expected-values file:
``orbitlab_pilot [--out DIR] [--seed N] [--dry-run]``.
"""
from django.core.management.base import BaseCommand, CommandError

from orbitlab.conf import get_setting
from orbitlab.experiments.pilot import PilotFailed, freeze_expected_values, run_pilot
from orbitlab.experiments.scenarios import EXPECTED_VALUES
from orbitlab.lattice.enumeration import BudgetExceeded
from orbitlab.management.commands.orbitlab import EXIT_INFEASIBLE, EXIT_VERDICT_FAILED
from orbitlab.volume.skew import NonMonotoneProfile


class Command(BaseCommand):
    help = 'Runs the pilot phase and records its observations next to the tolerances.'

    def add_arguments(self, parser):
        parser.add_argument('--out', dest='output_dir', help='Directory for the pilot runs')
        parser.add_argument('--seed', type=int)
        parser.add_argument('--expected-values', dest='path', default=EXPECTED_VALUES)
        parser.add_argument('--dry-run', action='store_true', help='Run the pilot without writing the file')

    def handle(self, *args, **options):
        output_dir = options['output_dir'] or get_setting('OUTPUT_DIR')
        try:
            manifests = run_pilot(output_dir, options['seed'])
        except (BudgetExceeded, NonMonotoneProfile) as e:
            raise CommandError(str(e), returncode=EXIT_INFEASIBLE)

        for label, manifest in sorted(manifests.items()):
            self.stdout.write('{0}: {1}'.format(label, 'Pass' if manifest.passed else 'Fail'))
        if options['dry_run']:
            return

        try:
            freeze_expected_values(manifests, options['path'])
        except PilotFailed as e:
            raise CommandError(str(e), returncode=EXIT_VERDICT_FAILED)
        self.stdout.write('Froze pilot observations into {0}'.format(options['path']))
