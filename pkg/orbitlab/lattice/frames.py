"""
Integer frames for Oppenheim-type counts: matrices g = [f1 | f2 | f3] in Mat_3(Z) with det g = +-1, every
column of Euclidean length below T and Gram matrix g^T A g inside a box of intervals. The counting function
grows like the mu_delta volume of the matching region of SL+-(3, R), which frame_region_volume estimates.
"""
import logging

import numpy as np

from orbitlab.conf import get_setting
from orbitlab.lattice.enumeration import BudgetExceeded, complete_last_column
from orbitlab.parallel import parallel_map
from orbitlab.volume.cartan import MonteCarlo, VolumeEstimate


LOG = logging.getLogger(__name__)

DEFAULT_FORM = np.diag([1.0, 1.0, -np.sqrt(2)])


class GramBox(object):
    """
    Closed intervals [lo_ij, hi_ij] for the entries of a symmetric Gram matrix; only i <= j is used.
    """

    def __init__(self, lo, hi):
        lo, hi = np.array(lo, dtype=np.float64), np.array(hi, dtype=np.float64)
        if lo.shape != (3, 3) or hi.shape != (3, 3):
            raise ValueError('Gram boxes are given by two 3x3 arrays')
        self.lo, self.hi = lo, hi

    @classmethod
    def uniform(cls, lo: float, hi: float) -> 'GramBox':
        return cls(np.full((3, 3), lo), np.full((3, 3), hi))

    @property
    def empty(self) -> bool:
        return bool(np.any(np.triu(self.lo > self.hi)))

    def width(self, i: int, j: int) -> float:
        return max(0.0, self.hi[i, j] - self.lo[i, j])

    def holds(self, values, i: int, j: int):
        return (values >= self.lo[i, j]) & (values <= self.hi[i, j])

    def to_dict(self):
        return {'lo': self.lo.tolist(), 'hi': self.hi.tolist()}


def _form(Q) -> np.ndarray:
    form = np.asarray(Q, dtype=np.float64)
    if form.ndim == 1:
        form = np.diag(form)
    if form.shape != (3, 3) or not np.allclose(form, form.T):
        raise ValueError('The quadratic form must be a symmetric 3x3 matrix')
    return form


def form_pool(form: np.ndarray, box: GramBox, T: float, index: int) -> np.ndarray:
    """
    Integer vectors f with |f|_2 < T and Q(f) in the diagonal interval ``index`` of the box.
    """
    limit = max(0, int(np.ceil(T)) - 1)
    values = np.arange(-limit, limit + 1)
    y, z = [grid.ravel() for grid in np.meshgrid(values, values, indexing='ij')]

    slices = []
    for x in values:
        vectors = np.stack([np.full_like(y, x), y, z], axis=1)
        vectors = vectors[np.sum(vectors ** 2, axis=1) < T ** 2]
        q = np.einsum('ni,ij,nj->n', vectors, form, vectors)
        slices.append(vectors[box.holds(q, index, index) & np.any(vectors != 0, axis=1)])
    return np.concatenate(slices)


def enumerate_frames(Q, box: GramBox, T: float) -> np.ndarray:
    """
    All frames with max-column Euclidean norm below T and Gram matrix in ``box``, as an (n, 3, 3) int64 array
    with the frames as columns. Columns are searched depth first, pruning on the Gram entries known at each
    depth, and the last column is completed through the determinant condition.

    :raises BudgetExceeded: when the pair search exceeds ENUMERATION_BUDGET
    """
    form = _form(Q)
    if box.empty or T <= 1:
        return np.empty((0, 3, 3), dtype=np.int64)

    pools = [form_pool(form, box, T, i) for i in range(3)]
    candidates = len(pools[0]) * len(pools[1])
    if candidates > get_setting('ENUMERATION_BUDGET'):
        raise BudgetExceeded('Frame search would visit {0} column pairs'.format(candidates))

    firsts = pools[0][np.gcd.reduce(np.abs(pools[0]), axis=1) == 1]
    seconds, thirds = pools[1], pools[2]
    second_images = seconds @ form
    third_images = thirds @ form

    def extend(f1):
        f2s = seconds[box.holds(second_images @ f1, 0, 1)]
        if not len(f2s):
            return np.empty((0, 3, 3), dtype=np.int64)
        pairs = np.stack([np.broadcast_to(f1, f2s.shape), f2s], axis=1)
        frames = complete_last_column(pairs, thirds[box.holds(third_images @ f1, 0, 2)], (1, -1))
        if not len(frames):
            return frames
        g23 = np.einsum('ni,ij,nj->n', frames[:, :, 1], form, frames[:, :, 2])
        return frames[box.holds(g23, 1, 2)]

    chunks = parallel_map(extend, firsts)
    frames = np.concatenate(chunks) if chunks else np.empty((0, 3, 3), dtype=np.int64)
    LOG.info('Found %d frames with columns below T=%s', len(frames), T)
    return frames


def frame_count(Q, box: GramBox, T: float) -> int:
    return len(enumerate_frames(Q, box, T))


def _quadratic_band(c0: float, c1: float, c2: float, lo: float, hi: float, r_max: float):
    """
    Intervals of r in [0, r_max] with lo <= c0 + c1 r + c2 r^2 <= hi.
    """
    cuts = [0.0, r_max]
    for level in (lo, hi):
        roots = np.roots([c2, c1, c0 - level]) if (c2 or c1) else []
        for root in roots:
            if abs(root.imag) < 1e-12 and 0 < root.real < r_max:
                cuts.append(float(root.real))
    cuts = sorted(cuts)

    intervals = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        mid = (a + b) / 2
        if b > a and lo <= c0 + c1 * mid + c2 * mid ** 2 <= hi:
            if intervals and intervals[-1][1] == a:
                intervals[-1] = (intervals[-1][0], b)
            else:
                intervals.append((a, b))
    return intervals


def _sample_radial(rng, intervals, power: int):
    """
    Draws r from the density proportional to r^(power - 1) on the intervals. Returns (r, int r^(power - 1) dr).
    """
    masses = np.array([(b ** power - a ** power) / power for a, b in intervals])
    total = masses.sum()
    if total <= 0:
        return None, 0.0
    a, b = intervals[rng.choice(len(intervals), p=masses / total)]
    u = rng.uniform(a ** power, b ** power)
    return u ** (1 / power), float(total)


def _frame_sample(rng, form: np.ndarray, box: GramBox, T: float) -> float:
    # f1 = r omega with omega uniform on the sphere: dF1 = r^2 dr d omega
    omega = rng.normal(size=3)
    omega /= np.linalg.norm(omega)
    q_omega = omega @ form @ omega
    intervals = _quadratic_band(0.0, 0.0, q_omega, box.lo[0, 0], box.hi[0, 0], T)
    r, radial = _sample_radial(rng, intervals, 3)
    if r is None:
        return 0.0
    f1 = r * omega
    weight = 4 * np.pi * radial

    # f2 = b e / |e|^2 + rho (cos theta u1 + sin theta u2) with e = A f1 and <e, f2> = G12 = b
    e = form @ f1
    e_norm = np.linalg.norm(e)
    if e_norm == 0 or box.width(0, 1) == 0:
        return 0.0
    b = rng.uniform(box.lo[0, 1], box.hi[0, 1])
    u1 = np.cross(e, [1.0, 0.0, 0.0] if abs(e[0]) < 0.9 * e_norm else [0.0, 1.0, 0.0])
    u1 /= np.linalg.norm(u1)
    u2 = np.cross(e / e_norm, u1)
    theta = rng.uniform(0, 2 * np.pi)
    direction = np.cos(theta) * u1 + np.sin(theta) * u2
    offset = b * e / e_norm ** 2
    rho_max_sq = T ** 2 - offset @ offset
    if rho_max_sq <= 0:
        return 0.0
    intervals = _quadratic_band(
        offset @ form @ offset, 2 * (offset @ form @ direction), direction @ form @ direction,
        box.lo[1, 1], box.hi[1, 1], np.sqrt(rho_max_sq),
    )
    rho, planar = _sample_radial(rng, intervals, 2)
    if rho is None:
        return 0.0
    f2 = offset + rho * direction
    weight *= box.width(0, 1) * 2 * np.pi * planar / e_norm

    # f3 = s n / |n|^2 + u f1 + w f2 has det = s and dF3 = ds du dw; (u, w) -> (G13, G23) is linear
    n = np.cross(f1, f2)
    n_sq = n @ n
    gram = np.array([[f1 @ form @ f1, f1 @ form @ f2], [f1 @ form @ f2, f2 @ form @ f2]])
    jacobian = abs(np.linalg.det(gram))
    if n_sq == 0 or jacobian < 1e-300 or box.width(0, 2) == 0 or box.width(1, 2) == 0:
        return 0.0
    s = rng.choice((-1.0, 1.0))
    targets = np.array([rng.uniform(box.lo[0, 2], box.hi[0, 2]), rng.uniform(box.lo[1, 2], box.hi[1, 2])])
    normal = s * n / n_sq
    u, w = np.linalg.solve(gram, targets - np.array([f1 @ form @ normal, f2 @ form @ normal]))
    f3 = normal + u * f1 + w * f2
    weight *= 2 * box.width(0, 2) * box.width(1, 2) / jacobian

    inside = box.holds(f3 @ form @ f3, 2, 2) and f3 @ f3 < T ** 2
    return float(weight) if inside else 0.0


def frame_region_volume(Q, box: GramBox, T: float, mc: MonteCarlo = None) -> VolumeEstimate:
    """
    Monte Carlo estimate of the mu_delta volume of {g in SL+-(3, R) : |f_i|_2 < T, g^T A g in box}, sampling
    f1, f2 and f3 in coordinates adapted to the Gram entries.
    """
    form = _form(Q)
    mc = mc or MonteCarlo(samples=20000, seed=get_setting('DEFAULT_SEED'))
    if box.empty or T <= 1:
        return VolumeEstimate(0.0, 0.0, mc)

    def stratum_values(stratum):
        rng = mc.stream(stratum)
        return [_frame_sample(rng, form, box, T) for _ in range(mc.stratum_sizes()[stratum])]

    values = np.concatenate([np.asarray(chunk, dtype=np.float64)
                             for chunk in parallel_map(stratum_values, range(mc.strata))])
    estimate = VolumeEstimate.from_samples(values, mc)
    LOG.info('Frame region volume at T=%s: %s', T, estimate)
    return estimate


def default_box(half_width: float = 2.5) -> GramBox:
    return GramBox.uniform(-half_width, half_width)

