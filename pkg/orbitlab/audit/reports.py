"""
Audit reports. A verdict of Pass means no violation was found on the sampled grid with the stated margins; it
is not a proof of the condition. A Fail carries a witness that ``replay`` re-checks with one direct
evaluation.
"""
import json
import logging
from enum import Enum
from typing import Callable, List, Optional

import numpy as np


LOG = logging.getLogger(__name__)


class AuditVerdict(Enum):
    PASS = 'Pass'
    FAIL = 'Fail'
    INCONCLUSIVE = 'Inconclusive'


class NoWitness(Exception):
    pass


def _jsonable(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, dict):
        return {key: _jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    return value


class AuditReport(object):
    """
    :param condition: one of uc, i1, i2, d1, d2
    :param max_violation: the largest observed excess over the allowed bound (negative when every sample passes)
    :param grid: one dict per sampled point
    :param details: condition specific findings such as the admissible radius or the fitted constant
    :param replay: callable re-evaluating the witness, returns True when the violation reproduces
    """

    def __init__(self, condition: str, verdict: AuditVerdict, max_violation: float = float('nan'),
                 witness: Optional[dict] = None, grid: Optional[List[dict]] = None, details: Optional[dict] = None,
                 replay: Optional[Callable[[], bool]] = None):
        self.condition = condition
        self.verdict = verdict
        self.max_violation = float(max_violation)
        self.witness = witness
        self.grid = grid or []
        self.details = details or {}
        self._replay = replay
        log = LOG.info if verdict == AuditVerdict.PASS else LOG.warning
        log('Audit %s: %s (max violation %.4g)', condition, verdict.value, self.max_violation)

    @property
    def passed(self) -> bool:
        return self.verdict == AuditVerdict.PASS

    def replay(self) -> bool:
        if self.witness is None or self._replay is None:
            raise NoWitness('Audit {0} has no witness to replay'.format(self.condition))
        return bool(self._replay())

    def to_dict(self):
        return _jsonable({
            'condition': self.condition,
            'verdict': self.verdict.value,
            'max_violation': None if np.isnan(self.max_violation) else self.max_violation,
            'witness': self.witness,
            'grid': self.grid,
            'details': self.details,
        })

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def __repr__(self):
        return 'AuditReport({0}, {1})'.format(self.condition, self.verdict.value)
