"""
Skew balls of one-parameter and low-dimensional subgroups that have closed-form Haar measures, and the limit
ratio alpha(g1, g2) = lim lambda(H_T[g1^-1, g2]) / lambda(H_T).
"""
import logging
from typing import Callable, Optional, Sequence

import numpy as np
import pandas as pd
from scipy import optimize

from orbitlab.matgroup.norms import NormSpec
from orbitlab.rootsys.groups import rotation
from orbitlab.volume.engine import SkewBallSpec, haar_volume


LOG = logging.getLogger(__name__)

LOWER_UNIPOTENT = np.array([[0.0, 0.0], [1.0, 0.0]])


class DegenerateDirection(Exception):
    pass


class NonMonotoneProfile(Exception):
    pass


def _entries(g):
    return np.asarray(getattr(g, 'entries', g), dtype=np.float64)


def unipotent_skewball_volume(g1, g2, norm: NormSpec, T: float) -> float:
    """
    Length of {t : ||a + t b|| < T} with a = g1 g2 and b = g1 E21 g2, which is lambda(H_T[g1, g2]) for the
    lower unipotent subgroup H = {[[1, 0], [t, 1]]} of SL(2, R) with Haar measure dt.

    :raises DegenerateDirection: if b vanishes
    """
    g1, g2 = _entries(g1), _entries(g2)
    a = g1 @ g2
    b = g1 @ LOWER_UNIPOTENT @ g2
    b_norm = float(norm.evaluate(b))
    if b_norm == 0:
        raise DegenerateDirection('The unipotent direction g1 E21 g2 vanishes')

    def profile(t):
        return float(norm.evaluate(a + t * b))

    # Convex in t, so the sublevel set is an interval around the minimiser
    a_norm = float(norm.evaluate(a))
    reach = (T + a_norm) / b_norm + 1.0
    center = optimize.minimize_scalar(profile, bounds=(-reach, reach), method='bounded',
                                      options={'xatol': 1e-12}).x
    if profile(center) >= T:
        return 0.0

    lo = optimize.brentq(lambda t: profile(t) - T, center - reach - abs(center), center, xtol=1e-13)
    hi = optimize.brentq(lambda t: profile(t) - T, center, center + reach + abs(center), xtol=1e-13)
    return hi - lo


def _profile_shape(c: float, u):
    return np.sqrt(c ** 2 * np.cos(u) ** 2 + np.sin(u) ** 2)


def check_spiral_profile(c: float, samples: int = 4096):
    """
    f_c(t) = e^t sqrt(c^2 cos^2 t + sin^2 t) is increasing iff g + g' > 0 for g(u) = sqrt(c^2 cos^2 u + sin^2 u).

    :raises NonMonotoneProfile: when the derivative changes sign
    """
    if not c > 1:
        raise ValueError('The spiral profile needs c > 1, got {0}'.format(c))
    u = np.linspace(0, np.pi, samples)
    shape = _profile_shape(c, u)
    derivative = (1 - c ** 2) * np.sin(u) * np.cos(u) / shape
    if np.min(shape + derivative) <= 0:
        raise NonMonotoneProfile('f_c is not monotone for c={0}'.format(c))


def spiral_profile(c: float, phase: float, t):
    """
    f_(c, phase)(t) = e^t sqrt(c^2 cos^2(t + phase) + sin^2(t + phase)).
    """
    return np.exp(t) * _profile_shape(c, np.asarray(t) + phase)


def spiral_radius(c: float, phase: float, T: float) -> float:
    """
    The unique tau with f_(c, phase)(tau) = T.
    """
    check_spiral_profile(c)

    def excess(t):
        return t + np.log(_profile_shape(c, t + phase)) - np.log(T)

    # The shape factor lies in [1, c]
    return optimize.brentq(excess, np.log(T) - np.log(c) - 1e-9, np.log(T) + 1e-9, xtol=1e-14)


def spiral_skew_volume(c: float, phase: float, T: float) -> float:
    """
    lambda(H_T[e, R_phase]) for the spiral subgroup

        H = {h(t, x, y)} with upper-left block e^t R_t, last column (x, y, e^-2t)

    of SL(3, R), Haar measure e^2t dt dx dy, and the spiral norm with parameter c^2. Right translation by the
    rotation R_phase shifts the profile phase, so the ball is {sqrt(x^2 + y^2) < T, e^-2t < T,
    f_(c, phase)(t) < T} and its volume is (pi / 2) T^2 (e^(2 tau) - 1 / T) with tau = f_(c, phase)^-1(T).

    :raises NonMonotoneProfile: if f_c is not monotone
    """
    if T <= 1:
        return 0.0
    tau = spiral_radius(c, phase, T)
    if tau <= -np.log(T) / 2:
        return 0.0
    return float(np.pi / 2 * T ** 2 * (np.exp(2 * tau) - 1 / T))


def spiral_h_volume(c: float, T: float) -> float:
    """
    lambda(H_T) for the spiral subgroup; see spiral_skew_volume.
    """
    return spiral_skew_volume(c, 0.0, T)


def spiral_rotation(phase: float) -> np.ndarray:
    """
    The rotation R_phase embedded in the upper-left block of SL(3, R).
    """
    g = np.eye(3)
    g[:2, :2] = rotation(phase)
    return g


def _block_angle(g) -> float:
    g = _entries(g)
    if not np.allclose(g, spiral_rotation(np.arctan2(g[1, 0], g[0, 0])), atol=1e-12):
        raise ValueError('Spiral skew balls are translated by block rotations only, got {0}'.format(g.tolist()))
    return float(np.arctan2(g[1, 0], g[0, 0]))


def spiral_volume_fn(c: float) -> Callable:
    """
    (left, right, T) -> lambda(H_T[left, right]) for block rotations left and right. Both commute with the
    rotation part of H and leave the remaining entries of the norm alone, so only the total phase matters.
    """
    def volume(left, right, T):
        return spiral_skew_volume(c, _block_angle(left) + _block_angle(right), T)
    return volume


def spiral_thresholds(c: float, count: int):
    """
    The thresholds T_n = f_c(2 pi n) and S_n = f_c((2n + 1/2) pi) for n = 1..count, where lambda(H_T) / T^4
    approaches pi / (2 c^2) and pi / 2 respectively.
    """
    turns = np.arange(1, count + 1)
    full = [float(c * np.exp(2 * np.pi * n)) for n in turns]
    quarter = [float(spiral_profile(c, 0.0, (2 * n + 0.5) * np.pi)) for n in turns]
    return full, quarter


class LimitRatio(object):
    """
    The sequence of volume ratios along a schedule with its extrapolated limit. ``stability`` is the largest
    pairwise deviation of the ratios in the second half of the schedule.
    """

    def __init__(self, thresholds, ratios, estimate: float, stability: float, kappa: Optional[float]):
        self.thresholds = [float(T) for T in thresholds]
        self.ratios = [float(r) for r in ratios]
        self.estimate = float(estimate)
        self.stability = float(stability)
        self.kappa = kappa

    def to_dataframe(self) -> pd.DataFrame:
        return pd.DataFrame({'T': self.thresholds, 'ratio': self.ratios})

    def to_dict(self):
        return {
            'estimate': self.estimate, 'stability': self.stability, 'kappa': self.kappa,
            'thresholds': self.thresholds, 'ratios': self.ratios,
        }


def richardson_limit(thresholds: Sequence[float], ratios: Sequence[float]):
    """
    Fits ratio(T) = alpha + a T^-kappa through the last three points and returns (alpha, kappa). Falls back to
    the last ratio (kappa None) when the points do not determine a decaying correction.
    """
    if len(ratios) < 3:
        return float(ratios[-1]), None
    (t1, t2, t3), (r1, r2, r3) = thresholds[-3:], ratios[-3:]
    d12, d23 = r1 - r2, r2 - r3
    if d23 == 0 or d12 == 0 or np.sign(d12) != np.sign(d23):
        return float(r3), None

    target = d12 / d23

    def mismatch(kappa):
        return (t1 ** -kappa - t2 ** -kappa) / (t2 ** -kappa - t3 ** -kappa) - target

    try:
        kappa = optimize.brentq(mismatch, 1e-3, 20.0)
    except ValueError:
        return float(r3), None
    amplitude = d23 / (t2 ** -kappa - t3 ** -kappa)
    return float(r3 - amplitude * t3 ** -kappa), float(kappa)


def haar_volume_fn(gs, norm: NormSpec, method=None) -> Callable:
    """
    (left, right, T) -> lambda(H_T[left, right]) through the Cartan engine.
    """
    def volume(left, right, T):
        return haar_volume(SkewBallSpec(gs, norm, T, left, right), method).value
    return volume


def limit_ratio_alpha(gs, g1, g2, norm: Optional[NormSpec], schedule: Sequence[float], method=None,
                      volume: Optional[Callable] = None) -> LimitRatio:
    """
    lambda(H_T[g1^-1, g2]) / lambda(H_T) along ``schedule`` with Richardson extrapolation.

    :param volume: optional (left, right, T) -> volume callable for subgroups outside the Cartan engine; when
        given, ``gs`` and ``norm`` are not used
    """
    g1, g2 = _entries(g1), _entries(g2)
    volume = volume or haar_volume_fn(gs, norm, method)
    identity = np.eye(len(g1))
    thresholds = sorted(float(T) for T in schedule)

    if np.array_equal(g1, identity) and np.array_equal(g2, identity):
        ratios = [1.0] * len(thresholds)
    else:
        inverse = np.linalg.inv(g1)
        ratios = [volume(inverse, g2, T) / volume(identity, identity, T) for T in thresholds]

    estimate, kappa = richardson_limit(thresholds, ratios)
    tail = ratios[len(ratios) // 2:]
    stability = max(tail) - min(tail) if tail else 0.0
    LOG.info('Limit ratio estimate %.6g (stability %.3g) over %d thresholds', estimate, stability, len(ratios))
    return LimitRatio(thresholds, ratios, estimate, stability, kappa)
