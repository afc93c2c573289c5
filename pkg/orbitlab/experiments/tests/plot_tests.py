import os
import shutil
import tempfile

import pandas as pd
from django.test import SimpleTestCase

from orbitlab.experiments.manifest import RunManifest
from orbitlab.experiments.plots import UnknownSeries, emit_plot_data


class EmitPlotDataTest(SimpleTestCase):
    def setUp(self):
        super(EmitPlotDataTest, self).setUp()
        self.directory = tempfile.mkdtemp()
        self.addCleanup(shutil.rmtree, self.directory)

        table = os.path.join(self.directory, 'ledrappier.csv')
        pd.DataFrame({'T': [250, 500], 'count': [10, 40], 'ratio': [1.2, 1.1]}).to_csv(table, index=False)
        self.manifest = RunManifest('ledrappier', 'abc', 1, self.directory)
        self.manifest.add_series('ratio', table, 'T', 'ratio')
        self.manifest.add_series('count', table, 'T', 'count')

    def test_two_columns_and_a_script(self):
        path, = emit_plot_data(self.manifest, ['ratio'])
        self.assertEqual(path, os.path.join(self.directory, 'ratio.plot.csv'))
        frame = pd.read_csv(path)
        self.assertEqual(list(frame.columns), ['T', 'ratio'])
        self.assertEqual(frame['ratio'].tolist(), [1.2, 1.1])

        with open(os.path.join(self.directory, 'ratio.gp')) as f:
            script = f.read()
        self.assertIn("plot 'ratio.plot.csv' using 1:2", script)
        self.assertIn("set ylabel 'ratio'", script)

    def test_all_series(self):
        paths = emit_plot_data(self.manifest)
        self.assertEqual([os.path.basename(path) for path in paths], ['count.plot.csv', 'ratio.plot.csv'])

    def test_unknown_series(self):
        with self.assertRaises(UnknownSeries):
            emit_plot_data(self.manifest, ['ratio', 'error'])
        self.assertFalse(os.path.exists(os.path.join(self.directory, 'ratio.plot.csv')))
