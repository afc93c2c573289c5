import json
import logging
from typing import Sequence

import numpy as np
import pandas as pd


LOG = logging.getLogger(__name__)


class LengthMismatch(ValueError):
    pass


class EquidistReport(object):
    """
    Empirical against predicted values along a threshold schedule. ``relative_errors`` holds |emp / pred - 1|
    per threshold and ``decreasing_steps`` counts the steps where that error does not grow.
    """

    def __init__(self, thresholds: Sequence[float], empirical: Sequence[float], predicted: Sequence[float]):
        self.thresholds = [float(T) for T in thresholds]
        self.empirical = [float(x) for x in empirical]
        self.predicted = [float(x) for x in predicted]
        self.relative_errors = [relative_error(e, p) for e, p in zip(self.empirical, self.predicted)]

    @property
    def steps(self) -> int:
        return max(len(self.relative_errors) - 1, 0)

    @property
    def decreasing_steps(self) -> int:
        errors = self.relative_errors
        return sum(1 for earlier, later in zip(errors, errors[1:]) if later <= earlier)

    @property
    def trend_decreasing(self) -> bool:
        """
        True when the error does not grow in most steps.
        """
        return self.steps > 0 and 2 * self.decreasing_steps > self.steps

    @property
    def final_error(self) -> float:
        return self.relative_errors[-1] if self.relative_errors else float('nan')

    def to_dataframe(self) -> pd.DataFrame:
        return pd.DataFrame({
            'T': self.thresholds, 'empirical': self.empirical, 'predicted': self.predicted,
            'relative_error': self.relative_errors,
        })

    def to_dict(self):
        return {
            'thresholds': self.thresholds,
            'empirical': self.empirical,
            'predicted': self.predicted,
            'relative_errors': self.relative_errors,
            'decreasing_steps': self.decreasing_steps,
            'trend_decreasing': self.trend_decreasing,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_csv(self, path):
        self.to_dataframe()[['T', 'relative_error']].to_csv(path, index=False)
        LOG.info('Wrote equidistribution errors to %s', path)


def relative_error(empirical: float, predicted: float) -> float:
    if predicted == 0:
        return 0.0 if empirical == 0 else float('inf')
    return abs(empirical / predicted - 1)


def equidist_compare(empirical: Sequence[float], predicted: Sequence[float], thresholds=None) -> EquidistReport:
    """
    Aligns an empirical series with its prediction.

    :param thresholds: the T-schedule, defaults to 0, 1, 2, ...
    :raises LengthMismatch: when the series or the schedule differ in length
    """
    empirical, predicted = np.asarray(empirical, dtype=np.float64), np.asarray(predicted, dtype=np.float64)
    thresholds = np.arange(len(empirical)) if thresholds is None else np.asarray(thresholds, dtype=np.float64)
    if not len(empirical) == len(predicted) == len(thresholds):
        raise LengthMismatch('Series of lengths {0}, {1} over {2} thresholds'.format(
            len(empirical), len(predicted), len(thresholds)
        ))
    report = EquidistReport(thresholds, empirical, predicted)
    LOG.info('Relative errors %s', ', '.join('{0:.4g}'.format(e) for e in report.relative_errors))
    return report
