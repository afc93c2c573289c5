import logging
import os

import pandas as pd

from orbitlab.experiments.manifest import RunManifest


LOG = logging.getLogger(__name__)

GNUPLOT_TEMPLATE = """set datafile separator ','
set key off
set logscale x
set xlabel '{x}'
set ylabel '{y}'
plot '{data}' using 1:2 skip 1 with linespoints
"""


class UnknownSeries(KeyError):
    pass


def emit_plot_data(manifest: RunManifest, series=None):
    """
    Writes each plot series of a run as a two column CSV next to a gnuplot stub that draws it.

    :param series: series names to emit, all of them by default
    :raises UnknownSeries: for a name the manifest does not record
    :return: the paths of the written CSV files
    """
    names = sorted(manifest.series) if series is None else list(series)
    missing = [name for name in names if name not in manifest.series]
    if missing:
        raise UnknownSeries('Unknown plot series {0}, the run recorded {1}'.format(
            ', '.join(missing), ', '.join(sorted(manifest.series)) or 'none'
        ))

    paths = []
    for name in names:
        entry = manifest.series[name]
        frame = pd.read_csv(entry['table'])[[entry['x'], entry['y']]]
        data_path = os.path.join(manifest.output_dir, '{0}.plot.csv'.format(name))
        frame.to_csv(data_path, index=False)
        with open(os.path.join(manifest.output_dir, '{0}.gp'.format(name)), 'w') as f:
            f.write(GNUPLOT_TEMPLATE.format(x=entry['x'], y=entry['y'], data=os.path.basename(data_path)))
        LOG.info('Wrote plot series %s to %s', name, data_path)
        paths.append(data_path)
    return paths
