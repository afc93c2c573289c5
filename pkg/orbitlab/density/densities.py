"""
Limiting densities of SL(2, Z)-orbits on the plane. With H the lower unipotent subgroup, H \\ SL(2, R) is the
punctured plane through the first row, and the orbit density of v at w is

    alpha_v(w) = ||E21|| / ||M(v, w)||,  M(v, w) = [[-v2 w1, -v2 w2], [v1 w1, v1 w2]]

which is the limit ratio alpha(sigma(v), sigma(w)) of unipotent skew balls for any section sigma.
"""
import logging
from typing import Optional, Sequence

import numpy as np

from orbitlab.matgroup.norms import EntrywisePNorm, NormSpec
from orbitlab.volume.skew import LOWER_UNIPOTENT, LimitRatio, limit_ratio_alpha, unipotent_skewball_volume


LOG = logging.getLogger(__name__)

DEFAULT_SCHEDULE = (1e2, 1e3, 1e4, 1e5)


class ZeroVector(ValueError):
    pass


class ChartFailure(Exception):
    pass


def plane_vector(x, name='vector'):
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (2,):
        raise ValueError('Expected a plane vector for {0}, got shape {1}'.format(name, x.shape))
    return x


def density_matrix(v, w) -> np.ndarray:
    """
    M(v, w) = (-v2, v1)^T w, the outer product that sigma(v)^-1 E21 sigma(w) reduces to for every section.
    """
    v, w = plane_vector(v, 'v'), plane_vector(w, 'w')
    return np.outer([-v[1], v[0]], w)


def ledrappier_density(v, w, norm: NormSpec) -> float:
    """
    alpha_v(w) = ||E21|| / ||M(v, w)||.

    :raises ZeroVector: if v or w vanishes
    """
    v, w = plane_vector(v, 'v'), plane_vector(w, 'w')
    if not v.any() or not w.any():
        raise ZeroVector('The orbit density needs nonzero v and w, got {0} and {1}'.format(v, w))
    return float(norm.evaluate(LOWER_UNIPOTENT) / norm.evaluate(density_matrix(v, w)))


def unipotent(t: float) -> np.ndarray:
    return np.array([[1.0, 0.0], [float(t), 1.0]])


def choose_chart(x) -> int:
    x = plane_vector(x)
    if not x.any():
        raise ChartFailure('No chart covers the zero vector')
    return 1 if abs(x[0]) >= abs(x[1]) else 2


def section(x, chart: Optional[int] = None) -> np.ndarray:
    """
    A matrix of SL(2, R) with first row x. Chart 1 needs x1 != 0 and chart 2 needs x2 != 0; by default the
    chart with the larger coordinate is used.

    :raises ChartFailure: if the requested chart does not cover x
    """
    x = plane_vector(x)
    chart = chart or choose_chart(x)
    x1, x2 = x
    if chart == 1:
        if x1 == 0:
            raise ChartFailure('The first chart needs a nonzero first coordinate, got {0}'.format(x))
        return np.array([[x1, x2], [1.0, (x2 + 1) / x1]])
    if chart == 2:
        if x2 == 0:
            raise ChartFailure('The second chart needs a nonzero second coordinate, got {0}'.format(x))
        return np.array([[x1, x2], [(x1 - 1) / x2, 1.0]])
    raise ChartFailure('Unknown chart {0}'.format(chart))


def unipotent_volume_fn(norm: NormSpec):
    def volume(left, right, T):
        return unipotent_skewball_volume(left, right, norm, T)
    return volume


def numeric_alpha_ratio(v, w, norm: NormSpec, schedule: Sequence[float] = DEFAULT_SCHEDULE,
                        chart: Optional[int] = None) -> LimitRatio:
    """
    The full ratio sequence behind numeric_alpha.
    """
    return limit_ratio_alpha(
        None, section(v, chart), section(w, chart), norm, schedule, volume=unipotent_volume_fn(norm)
    )


def numeric_alpha(v, w, norm: NormSpec, schedule: Sequence[float] = DEFAULT_SCHEDULE,
                  chart: Optional[int] = None) -> float:
    """
    alpha_v(w) as the extrapolated limit of lambda(H_T[sigma(v)^-1, sigma(w)]) / lambda(H_T).
    """
    return numeric_alpha_ratio(v, w, norm, schedule, chart).estimate


def alpha_closed_form(g1, g2, norm: NormSpec) -> float:
    """
    alpha(g1, g2) = ||E21|| / ||g1^-1 E21 g2|| for the lower unipotent subgroup.
    """
    g1, g2 = np.asarray(g1, dtype=np.float64), np.asarray(g2, dtype=np.float64)
    return float(norm.evaluate(LOWER_UNIPOTENT) / norm.evaluate(np.linalg.inv(g1) @ LOWER_UNIPOTENT @ g2))


class DensityField(object):
    """
    The density w -> alpha_v(w) on the plane, or on the box ``domain`` = (lo, hi) when given.

    ``kind`` selects the evaluation: 'p_norm' uses 1 / (||v||_p ||w||_p) for an entrywise p-norm, 'general'
    the closed form for any norm and 'numeric' the skew-ball limit ratios along ``schedule``.
    """
    KINDS = ('p_norm', 'general', 'numeric')

    def __init__(self, v, norm: NormSpec, kind: str = 'general', schedule: Sequence[float] = DEFAULT_SCHEDULE,
                 domain=None):
        if kind not in self.KINDS:
            raise ValueError('Unknown density kind {0}'.format(kind))
        if kind == 'p_norm' and not isinstance(norm, EntrywisePNorm):
            raise ValueError('The p_norm density needs an entrywise p-norm, got {0}'.format(norm))
        v = plane_vector(v, 'v')
        if not v.any():
            raise ZeroVector('The orbit density needs a nonzero basepoint')
        self.v = v
        self.norm = norm
        self.kind = kind
        self.schedule = tuple(schedule)
        self.domain = None if domain is None else tuple(np.asarray(c, dtype=np.float64) for c in domain)

    def __call__(self, w) -> float:
        w = plane_vector(w, 'w')
        if self.kind == 'p_norm':
            if not w.any():
                raise ZeroVector('The orbit density is singular at the origin')
            p = self.norm.p
            return float(1 / (np.linalg.norm(self.v, p) * np.linalg.norm(w, p)))
        if self.kind == 'general':
            return ledrappier_density(self.v, w, self.norm)
        return numeric_alpha(self.v, w, self.norm, self.schedule)

    def to_dict(self):
        return {
            'v': self.v.tolist(), 'norm': self.norm.to_dict(), 'kind': self.kind,
            'schedule': list(self.schedule),
            'domain': None if self.domain is None else [c.tolist() for c in self.domain],
        }


class InvarianceReport(object):
    def __init__(self, alpha: float, moved_alpha: float, method: str):
        self.alpha = float(alpha)
        self.moved_alpha = float(moved_alpha)
        self.method = method

    @property
    def ratio(self) -> float:
        return self.moved_alpha / self.alpha

    @property
    def deviation(self) -> float:
        return abs(self.ratio - 1)

    def to_dict(self):
        return {
            'alpha': self.alpha, 'moved_alpha': self.moved_alpha, 'ratio': self.ratio,
            'deviation': self.deviation, 'method': self.method,
        }


def alpha_invariance_check(h1, h2, g1, g2, norm: NormSpec, schedule: Optional[Sequence[float]] = None):
    """
    Compares alpha(h1 g1, h2 g2) with alpha(g1, g2) for h1, h2 in the lower unipotent subgroup, whose modular
    function is trivial. The closed form is used unless a ``schedule`` asks for skew-ball limit ratios.

    :raises ValueError: if h1 or h2 is not lower unipotent
    """
    h1, h2 = np.asarray(h1, dtype=np.float64), np.asarray(h2, dtype=np.float64)
    for h in (h1, h2):
        if not np.allclose(h, unipotent(h[1, 0]), atol=1e-12, rtol=0):
            raise ValueError('{0} is not in the lower unipotent subgroup'.format(h.tolist()))
    g1, g2 = np.asarray(g1, dtype=np.float64), np.asarray(g2, dtype=np.float64)

    if schedule is None:
        report = InvarianceReport(alpha_closed_form(g1, g2, norm), alpha_closed_form(h1 @ g1, h2 @ g2, norm),
                                  'closed_form')
    else:
        volume = unipotent_volume_fn(norm)
        report = InvarianceReport(
            limit_ratio_alpha(None, g1, g2, norm, schedule, volume=volume).estimate,
            limit_ratio_alpha(None, h1 @ g1, h2 @ g2, norm, schedule, volume=volume).estimate,
            'limit_ratio',
        )
    LOG.info('Unipotent invariance ratio %.12g (%s)', report.ratio, report.method)
    return report
