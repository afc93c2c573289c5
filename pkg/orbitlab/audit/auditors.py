"""
Numeric auditors for the hypotheses of the counting theorems on a concrete instance:

    uc  D(g u) < (1 + eps) D(g) for u in a neighbourhood of the identity, uniformly in g
    i1  m(G_(1+delta)T) <= (1 + eps) m(G_T) for T >= T0
    i2  #Gamma_T ~ m(G_T), up to the covolume
    d1  lambda(H_(1+delta)T[g1, g2]) <= (1 + eps) lambda(H_T[g1, g2]) uniformly on a compact set
    d2  lambda(H_T[g1^-1, g2]) / lambda(H_T) converges to a positive finite limit
"""
import logging
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import linalg

from orbitlab.audit.reports import AuditReport, AuditVerdict
from orbitlab.conf import get_setting
from orbitlab.lattice.enumeration import enumerate_ball
from orbitlab.lattice.spec import LatticeSpec
from orbitlab.matgroup.distance import IDENTITY, DistanceFunction
from orbitlab.matgroup.norms import NormSpec
from orbitlab.parallel import parallel_map
from orbitlab.volume.engine import SkewBallSpec, haar_volume, loglog_slope
from orbitlab.volume.skew import haar_volume_fn, limit_ratio_alpha


LOG = logging.getLogger(__name__)

UC = 'uc'
I1 = 'i1'
I2 = 'i2'
D1 = 'd1'
D2 = 'd2'

# Smallest neighbourhood radius, or growth factor delta, that an auditor tries before reporting a failure
SMALLEST_STEP = 1e-9
BISECTION_STEPS = 14
# Below this threshold lattice counts are too small for a meaningful ratio
NOISY_THRESHOLD = 2.0


def _largest_admissible(excess: Callable, lo: float, hi: float, steps: int = BISECTION_STEPS):
    """
    Geometric bisection for the largest x in [lo, hi] with excess(x)[0] <= 0. Returns (x, result) with x None
    when even ``lo`` violates, in which case result describes the violation at ``lo``.
    """
    result = excess(lo)
    if result[0] > 0:
        return None, result
    top = excess(hi)
    if top[0] <= 0:
        return hi, top
    good, bad = lo, hi
    for _ in range(steps):
        mid = np.sqrt(good * bad)
        attempt = excess(mid)
        if attempt[0] <= 0:
            good, result = mid, attempt
        else:
            bad = mid
    return good, result


def _inconclusive(condition: str, reason: str, **details) -> AuditReport:
    return AuditReport(condition, AuditVerdict.INCONCLUSIVE, details=dict(details, reason=reason))


def _group_dim(D: DistanceFunction) -> int:
    return D.norm.dim if D.representation == IDENTITY else D.representation.group_dim


def _distances(D: DistanceFunction, stack: np.ndarray) -> np.ndarray:
    if D.representation == IDENTITY:
        return D.evaluate_many(stack)
    flat = stack.reshape(-1, *stack.shape[-2:])
    return np.array([D(g) for g in flat]).reshape(stack.shape[:-2])


def _rotation_matrix(rng, d: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.normal(size=(d, d)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def wide_range_elements(rng, d: int, count: int, max_entry: float = 1e6) -> np.ndarray:
    """
    k1 exp(Y) k2 with random rotations and a random traceless Y scaled so the entries reach up to about
    ``max_entry``.
    """
    elements = []
    for _ in range(count):
        y = rng.uniform(-1, 1, size=d)
        y -= y.mean()
        y *= rng.uniform(0, 1) * np.log(max_entry) / np.abs(y).max()
        elements.append(_rotation_matrix(rng, d) @ np.diag(np.exp(y)) @ _rotation_matrix(rng, d))
    return np.array(elements)


def traceless_directions(rng, d: int, count: int) -> np.ndarray:
    directions = rng.normal(size=(count, d, d))
    directions -= np.trace(directions, axis1=1, axis2=2)[:, None, None] / d * np.eye(d)
    return directions / np.linalg.norm(directions, axis=(1, 2))[:, None, None]


def uc_ratio(D: DistanceFunction, g, u) -> float:
    g = np.asarray(g, dtype=np.float64)
    return D(g @ np.asarray(u, dtype=np.float64)) / D(g)


def audit_uc(D: DistanceFunction, epsilon: float, g_samples: int = 64, u_samples: int = 32,
             seed: Optional[int] = None) -> AuditReport:
    """
    Searches the largest radius r such that D(g u) / D(g) < 1 + epsilon for every sampled g and every
    u = exp(r X) with X a sampled unit traceless direction.
    """
    if not epsilon > 0:
        return _inconclusive(UC, 'epsilon must be positive', epsilon=epsilon)
    seed = get_setting('DEFAULT_SEED') if seed is None else seed
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    d = _group_dim(D)
    elements = wide_range_elements(rng, d, g_samples)
    directions = traceless_directions(rng, d, u_samples)
    base = _distances(D, elements)

    def excess(radius):
        neighbours = np.array([linalg.expm(radius * x) for x in directions])
        ratios = _distances(D, np.einsum('aij,bjk->abik', elements, neighbours)) / base[:, None]
        i, j = np.unravel_index(np.argmax(ratios), ratios.shape)
        return ratios[i, j] - (1 + epsilon), elements[i], neighbours[j], ratios

    radius, (violation, g, u, ratios) = _largest_admissible(excess, SMALLEST_STEP, 1.0)
    grid = [{'max_entry': float(np.abs(element).max()), 'max_ratio': float(row.max())}
            for element, row in zip(elements, ratios)]
    if radius is None:
        witness = {'g': g, 'u': u, 'ratio': violation + 1 + epsilon, 'epsilon': epsilon}
        return AuditReport(UC, AuditVerdict.FAIL, violation, witness, grid,
                           replay=lambda: uc_ratio(D, g, u) >= 1 + epsilon)
    return AuditReport(UC, AuditVerdict.PASS, violation, grid=grid,
                       details={'radius': radius, 'max_ratio': violation + 1 + epsilon, 'epsilon': epsilon})


def _growth_excess(volume: Callable, base: dict, epsilon: float):
    """
    excess(delta) for one-parameter families: the worst volume(key, (1 + delta) T) / volume(key, T) minus
    1 + epsilon over the keys and thresholds in ``base``.
    """
    def excess(delta):
        keys = [key for key, value in base.items() if value > 0]
        ratios = parallel_map(lambda key: volume(key[0], (1 + delta) * key[1]) / base[key], keys)
        worst = int(np.argmax(ratios))
        return ratios[worst] - (1 + epsilon), keys[worst], ratios[worst], dict(zip(keys, ratios))
    return excess


def audit_i1(gs, norm: NormSpec, epsilon: float, thresholds: Sequence[float] = (1e2, 1e3, 1e4), method=None,
             volume: Optional[Callable] = None) -> AuditReport:
    """
    Finds the largest delta with m(G_(1+delta)T) <= (1 + epsilon) m(G_T) over the log-spaced ``thresholds``
    (T0 is the smallest one).

    :param volume: optional T -> volume callable replacing the Cartan engine, for the spiral family say
    """
    if not epsilon > 0:
        return _inconclusive(I1, 'no positive delta can pass with epsilon <= 0', epsilon=epsilon)
    if volume is None:
        def volume(T):
            return haar_volume(SkewBallSpec(gs, norm, T), method).value

    def keyed(_, T):
        return volume(T)

    base = {(None, float(T)): volume(T) for T in thresholds}
    delta, (violation, key, ratio, ratios) = _largest_admissible(_growth_excess(keyed, base, epsilon),
                                                                 SMALLEST_STEP, 1.0)
    grid = [{'T': T, 'volume': base[(k, T)], 'ratio': r} for (k, T), r in ratios.items()]
    if delta is None:
        T = key[1]
        witness = {'T': T, 'delta': SMALLEST_STEP, 'ratio': ratio, 'epsilon': epsilon}
        return AuditReport(I1, AuditVerdict.FAIL, violation, witness, grid,
                           replay=lambda: volume((1 + SMALLEST_STEP) * T) > (1 + epsilon) * volume(T))
    return AuditReport(I1, AuditVerdict.PASS, violation, grid=grid,
                       details={'delta': delta, 'T0': float(min(thresholds)), 'epsilon': epsilon})


def audit_d1(gs, norm: NormSpec, sample, epsilon: float, thresholds: Sequence[float] = (1e2, 1e3, 1e4),
             method=None, volume: Optional[Callable] = None) -> AuditReport:
    """
    Uniform version of audit_i1 over skew balls H_T[g1, g2] for the pairs (g1, g2) in ``sample``.

    :param volume: optional (left, right, T) -> volume callable, for subgroups outside the Cartan engine
    """
    if not epsilon > 0:
        return _inconclusive(D1, 'no positive delta can pass with epsilon <= 0', epsilon=epsilon)
    volume = volume or haar_volume_fn(gs, norm, method)
    pairs = [(np.asarray(g1, dtype=np.float64), np.asarray(g2, dtype=np.float64)) for g1, g2 in sample]
    if not pairs:
        return _inconclusive(D1, 'empty sample')

    def keyed(index, T):
        g1, g2 = pairs[index]
        return volume(g1, g2, T)

    base = {(i, float(T)): keyed(i, T) for i in range(len(pairs)) for T in thresholds}
    delta, (violation, key, ratio, ratios) = _largest_admissible(_growth_excess(keyed, base, epsilon),
                                                                 SMALLEST_STEP, 1.0)
    grid = [{'pair': i, 'T': T, 'volume': base[(i, T)], 'ratio': r} for (i, T), r in ratios.items()]
    if delta is None:
        index, T = key
        g1, g2 = pairs[index]
        witness = {'g1': g1, 'g2': g2, 'T': T, 'delta': SMALLEST_STEP, 'ratio': ratio, 'epsilon': epsilon}
        return AuditReport(
            D1, AuditVerdict.FAIL, violation, witness, grid,
            replay=lambda: volume(g1, g2, (1 + SMALLEST_STEP) * T) > (1 + epsilon) * volume(g1, g2, T),
        )
    return AuditReport(D1, AuditVerdict.PASS, violation, grid=grid,
                       details={'delta': delta, 'T0': float(min(thresholds)), 'pairs': len(pairs),
                                'epsilon': epsilon})


def audit_i2(lattice: LatticeSpec, gs, norm: NormSpec, schedule: Sequence[float], method=None,
             tolerance: float = 0.1) -> AuditReport:
    """
    Tabulates #Gamma_T / m(G_T). Passes when the ratio at the two largest thresholds agrees within
    ``tolerance``; the ratio is reported as the empirical constant and its inverse as the covolume estimate.

    :raises BudgetExceeded: when an enumeration is too large
    """
    if not len(schedule):
        return _inconclusive(I2, 'empty schedule')
    distance = DistanceFunction(norm)

    def ratio_at(T):
        count = enumerate_ball(lattice, distance, T).count
        volume = haar_volume(SkewBallSpec(gs, norm, T), method).value
        return count, volume

    grid = []
    for T in sorted(float(T) for T in schedule):
        count, volume = ratio_at(T)
        grid.append({'T': T, 'count': count, 'volume': volume,
                     'ratio': count / volume if volume > 0 else float('nan'), 'noisy': T < NOISY_THRESHOLD})
    noisy = [row['T'] for row in grid if row['noisy']]
    if noisy:
        LOG.warning('Thresholds %s are below %s; their ratios are noisy', noisy, NOISY_THRESHOLD)

    usable = [row for row in grid if not row['noisy'] and row['volume'] > 0 and row['count'] > 0]
    if len(usable) < 2:
        return _inconclusive(I2, 'fewer than two usable thresholds', noisy=noisy)

    details = {'noisy': noisy, 'count_slope': loglog_slope([row['T'] for row in usable],
                                                           [row['count'] for row in usable])}
    first, last = usable[-2], usable[-1]
    drift = abs(last['ratio'] / first['ratio'] - 1)
    if drift > tolerance:
        witness = {'T_a': first['T'], 'T_b': last['T'], 'ratio_a': first['ratio'], 'ratio_b': last['ratio'],
                   'tolerance': tolerance}

        def replay():
            count, volume = ratio_at(last['T'])
            return abs(count / volume / first['ratio'] - 1) > tolerance

        return AuditReport(I2, AuditVerdict.FAIL, drift - tolerance, witness, grid, details, replay)

    details.update({'constant': last['ratio'], 'covolume_estimate': 1 / last['ratio'], 'drift': drift})
    return AuditReport(I2, AuditVerdict.PASS, drift - tolerance, grid=grid, details=details)


def largest_reversal(ratios: Sequence[float]):
    """
    The largest move against the net direction of the sequence, as (amount, i, j) with i < j: the worst
    drawdown r_i - r_j of a rising sequence or run-up r_j - r_i of a falling one. Zero for monotone sequences.
    """
    ratios = np.asarray(ratios, dtype=np.float64)
    sign = 1.0 if len(ratios) < 2 or ratios[-1] >= ratios[0] else -1.0
    best = (0.0, 0, 0)
    for j in range(1, len(ratios)):
        i = int(np.argmax(sign * ratios[:j]))
        amount = float(sign * (ratios[i] - ratios[j]))
        if amount > best[0]:
            best = (amount, i, j)
    return best


def audit_d2(gs, g1, g2, norm: Optional[NormSpec], schedule: Sequence[float], method=None,
             volume: Optional[Callable] = None) -> AuditReport:
    """
    Stability of lambda(H_T[g1^-1, g2]) / lambda(H_T) along ``schedule``. Fails when the largest reversal in the
    second half of the sequence exceeds three times the integration error, taken as CONSTANT_TOLERANCE relative
    to the ratios, or when the extrapolated limit is not positive and finite. The band [min, max] of the tail
    is reported.

    :param volume: optional (left, right, T) -> volume callable, see limit_ratio_alpha
    """
    if len(schedule) < 2:
        return _inconclusive(D2, 'a ratio sequence needs at least two thresholds')
    result = limit_ratio_alpha(gs, g1, g2, norm, schedule, method, volume)
    half = len(result.ratios) // 2
    tail_thresholds, tail = result.thresholds[half:], result.ratios[half:]
    if len(tail) < 2:
        tail_thresholds, tail = result.thresholds, result.ratios

    oscillation, i, j = largest_reversal(tail)
    error = get_setting('CONSTANT_TOLERANCE') * max(abs(r) for r in tail)
    band = [min(tail), max(tail)]
    grid = [{'T': T, 'ratio': r} for T, r in zip(result.thresholds, result.ratios)]
    details = {'band': band, 'oscillation': oscillation, 'error': error, 'kappa': result.kappa}
    replay_volume = volume or haar_volume_fn(gs, norm, method)
    inverse, g2_matrix = np.linalg.inv(np.asarray(g1, dtype=np.float64)), np.asarray(g2, dtype=np.float64)
    identity = np.eye(len(inverse))

    def ratio_at(T):
        return replay_volume(inverse, g2_matrix, T) / replay_volume(identity, identity, T)

    if oscillation > 3 * error:
        witness = {'T_first': tail_thresholds[i], 'T_second': tail_thresholds[j], 'reversal': oscillation,
                   'band': band, 'error': error}
        sign = 1.0 if tail[-1] >= tail[0] else -1.0

        def replay():
            ratios = [ratio_at(T) for T in (witness['T_first'], witness['T_second'])]
            return sign * (ratios[0] - ratios[1]) > 3 * error

        return AuditReport(D2, AuditVerdict.FAIL, oscillation - 3 * error, witness, grid, details, replay)

    if not result.estimate > 0 or not np.isfinite(result.estimate):
        last = result.thresholds[-1]
        return AuditReport(D2, AuditVerdict.FAIL, float('inf'), {'estimate': result.estimate, 'T': last}, grid,
                           details, lambda: not 0 < ratio_at(last) < np.inf)
    details['limit'] = result.estimate
    return AuditReport(D2, AuditVerdict.PASS, oscillation - 3 * error, grid=grid, details=details)
