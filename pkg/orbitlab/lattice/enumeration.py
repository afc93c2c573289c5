"""
Exact enumeration of norm balls Gamma_T = {gamma in Gamma : D(gamma) < T} in SL(d, Z) and DetPM1(d, Z).

Every supported norm is absolute and monotone, so zeroing entries never increases it. In dimension 2 the
search runs over primitive first columns (a, c); the second columns completing (a, c) to determinant s are
s (b0, d0) + k (a, c) for an extended-gcd solution a d0 - b0 c = 1 and k in Z, and since k -> ||gamma(k)|| is
convex the admissible k form an interval found by integer ternary search and bisection. Balls are therefore
stored as strata of (first column, base column, k-interval) and only expanded on demand. In dimension 3 the
first two columns run over per-column candidate pools and the last column is found by the completion test
(c1 x c2) . c3 = det.
"""
import logging
from typing import Iterator, List

import numpy as np
import pandas as pd
from django.utils.functional import cached_property

from orbitlab.conf import get_setting
from orbitlab.lattice.spec import LatticeSpec
from orbitlab.matgroup.distance import IDENTITY, DistanceFunction
from orbitlab.matgroup.matrices import DimMismatch, ExactMatrix, stack_det
from orbitlab.matgroup.norms import NormSpec
from orbitlab.parallel import parallel_map


LOG = logging.getLogger(__name__)

CHUNK_SIZE = 2 ** 18


class BudgetExceeded(Exception):
    pass


def entry_limit(norm: NormSpec, T: float) -> int:
    """
    The largest integer strictly below the entry bound of the norm ball of radius T.
    """
    return max(0, int(np.ceil(norm.entry_bound(T))) - 1)


def extended_gcd(a, b):
    """
    Vectorised extended Euclid. Returns (g, x, y) with a x + b y = g and g >= 0.
    """
    old_r, r = np.array(a, dtype=np.int64), np.array(b, dtype=np.int64)
    old_s, s = np.ones_like(old_r), np.zeros_like(old_r)
    old_t, t = np.zeros_like(old_r), np.ones_like(old_r)

    while np.any(r != 0):
        active = r != 0
        q = np.where(active, old_r // np.where(active, r, 1), 0)
        old_r, r = np.where(active, r, old_r), np.where(active, old_r - q * r, r)
        old_s, s = np.where(active, s, old_s), np.where(active, old_s - q * s, s)
        old_t, t = np.where(active, t, old_t), np.where(active, old_t - q * t, t)

    sign = np.where(old_r < 0, -1, 1)
    return old_r * sign, old_s * sign, old_t * sign


def column_norms(norm: NormSpec, columns: np.ndarray, position: int) -> np.ndarray:
    """
    Norms of the matrices carrying each column at ``position`` and zeros elsewhere.
    """
    dim = columns.shape[1]
    stack = np.zeros((len(columns), dim, dim))
    stack[:, :, position] = columns
    return norm.evaluate(stack)


class PlanarStratum(object):
    """
    2x2 matrices [first | base + k first] for k_lo[i] <= k <= k_hi[i].
    """

    def __init__(self, first: np.ndarray, base: np.ndarray, k_lo: np.ndarray, k_hi: np.ndarray):
        self.first = first
        self.base = base
        self.k_lo = k_lo
        self.k_hi = k_hi

    @property
    def lengths(self) -> np.ndarray:
        return np.maximum(self.k_hi - self.k_lo + 1, 0)

    @property
    def count(self) -> int:
        return int(self.lengths.sum())

    def restrict(self, mask, k_lo=None, k_hi=None) -> 'PlanarStratum':
        """
        Keeps the rows in ``mask``, optionally narrowing their k-intervals.
        """
        lo = self.k_lo[mask] if k_lo is None else np.maximum(self.k_lo[mask], k_lo)
        hi = self.k_hi[mask] if k_hi is None else np.minimum(self.k_hi[mask], k_hi)
        return PlanarStratum(self.first[mask], self.base[mask], lo, hi)

    def materialize(self) -> np.ndarray:
        lengths = self.lengths
        rows = np.repeat(np.arange(len(lengths)), lengths)
        starts = np.cumsum(lengths) - lengths
        k = self.k_lo[rows] + (np.arange(len(rows)) - starts[rows])

        elements = np.empty((len(rows), 2, 2), dtype=np.int64)
        elements[:, :, 0] = self.first[rows]
        elements[:, :, 1] = self.base[rows] + k[:, None] * self.first[rows]
        return elements


class ExplicitStratum(object):
    """
    A stratum holding its elements as a (n, d, d) array.
    """

    def __init__(self, elements: np.ndarray):
        self.elements = elements

    @property
    def count(self) -> int:
        return len(self.elements)

    def materialize(self) -> np.ndarray:
        return self.elements


def _affine_norms(norm: NormSpec, first, base, k):
    stack = np.empty((len(k), 2, 2))
    stack[:, :, 0] = first
    stack[:, :, 1] = base + k[:, None] * first
    return norm.evaluate(stack)


def _admissible_k(norm: NormSpec, first: np.ndarray, base: np.ndarray, T: float, limit: int):
    """
    For each row the integer interval of k with ||[first | base + k first]|| < T, empty when k_lo > k_hi.
    """
    span = np.abs(first).max(axis=1)
    reach = (limit + np.abs(base).max(axis=1)) // span + 1
    lo, hi = -reach, reach.copy()

    def norms(rows, k):
        return _affine_norms(norm, first[rows], base[rows], k)

    # Integer ternary search for a minimiser of the convex profile
    while True:
        rows = np.nonzero(hi - lo >= 3)[0]
        if not len(rows):
            break
        third = (hi[rows] - lo[rows]) // 3
        m1, m2 = lo[rows] + third, hi[rows] - third
        f1, f2 = norms(rows, m1), norms(rows, m2)
        lo[rows] = np.where(f1 > f2, m1 + 1, np.where(f1 < f2, lo[rows], m1))
        hi[rows] = np.where(f1 < f2, m2 - 1, np.where(f1 > f2, hi[rows], m2))

    everything = np.arange(len(first))
    best_k, best = lo.copy(), norms(everything, lo)
    for offset in (1, 2):
        k = np.minimum(lo + offset, hi)
        values = norms(everything, k)
        better = values < best
        best_k, best = np.where(better, k, best_k), np.where(better, values, best)

    inside = best < T
    k_lo, k_hi = best_k + 1, best_k.copy()
    if not inside.any():
        return k_lo, k_hi

    def widen(index, good, bad):
        # Bisection keeping ||gamma(good)|| < T <= ||gamma(bad)||; index maps local rows to global ones
        while True:
            rows = np.nonzero(np.abs(bad - good) > 1)[0]
            if not len(rows):
                return good
            mid = (good[rows] + bad[rows]) // 2
            ok = norms(index[rows], mid) < T
            good[rows] = np.where(ok, mid, good[rows])
            bad[rows] = np.where(ok, bad[rows], mid)

    rows = np.nonzero(inside)[0]
    upper = widen(rows, best_k[rows].copy(), reach[rows] + 1)
    lower = widen(rows, best_k[rows].copy(), -reach[rows] - 1)
    k_lo[rows], k_hi[rows] = lower, upper
    return k_lo, k_hi


def _planar_block(lattice: LatticeSpec, norm: NormSpec, T: float, limit: int, c_values) -> List[PlanarStratum]:
    a_values = np.arange(-limit, limit + 1, dtype=np.int64)
    a, c = [grid.ravel() for grid in np.meshgrid(a_values, np.asarray(c_values, dtype=np.int64))]

    first = np.stack([a, c], axis=1)
    primitive = np.gcd(a, c) == 1
    first = first[primitive]
    first = first[column_norms(norm, first, 0) < T]
    if not len(first):
        return []

    _, x, y = extended_gcd(first[:, 0], first[:, 1])
    # a d0 - b0 c = a x + c y = 1
    solution = np.stack([-y, x], axis=1)

    strata = []
    for det in lattice.determinants:
        base = det * solution
        k_lo, k_hi = _admissible_k(norm, first, base, T, limit)
        keep = k_hi >= k_lo
        strata.append(PlanarStratum(first[keep], base[keep], k_lo[keep], k_hi[keep]))
    return strata


def _planar_strata(lattice: LatticeSpec, norm: NormSpec, T: float) -> List[PlanarStratum]:
    limit = entry_limit(norm, T)
    candidates = (2 * limit + 1) ** 2
    _check_budget(candidates)

    rows_per_block = max(1, CHUNK_SIZE // (2 * limit + 1))
    c_values = np.arange(-limit, limit + 1)
    blocks = [c_values[i:i + rows_per_block] for i in range(0, len(c_values), rows_per_block)]
    results = parallel_map(lambda block: _planar_block(lattice, norm, T, limit, block), blocks)
    return [stratum for strata in results for stratum in strata if stratum.count]


def column_pool(norm: NormSpec, T: float, dim: int, position: int) -> np.ndarray:
    """
    Nonzero integer vectors that can stand in column ``position`` of a matrix of norm below T.
    """
    limit = entry_limit(norm, T)
    grid = np.indices((2 * limit + 1,) * dim).reshape(dim, -1).T - limit
    grid = grid[np.any(grid != 0, axis=1)]
    return grid[column_norms(norm, grid, position) < T]


def complete_last_column(pairs: np.ndarray, pool: np.ndarray, determinants) -> np.ndarray:
    """
    All 3x3 matrices [c1 | c2 | c3] with (c1, c2) from ``pairs`` (shape (n, 2, 3)) and c3 from ``pool`` whose
    determinant (c1 x c2) . c3 lies in ``determinants``.
    """
    if not len(pairs) or not len(pool):
        return np.empty((0, 3, 3), dtype=np.int64)
    normals = np.cross(pairs[:, 0], pairs[:, 1])
    dots = normals @ pool.T
    rows, cols = np.nonzero(np.isin(dots, determinants))

    frames = np.empty((len(rows), 3, 3), dtype=np.int64)
    frames[:, :, 0] = pairs[rows, 0]
    frames[:, :, 1] = pairs[rows, 1]
    frames[:, :, 2] = pool[cols]
    return frames


def _spatial_elements(lattice: LatticeSpec, norm: NormSpec, T: float) -> np.ndarray:
    pools = [column_pool(norm, T, 3, position) for position in range(3)]
    _check_budget(len(pools[0]) * len(pools[1]) * len(pools[2]))

    firsts = pools[0][np.gcd.reduce(np.abs(pools[0]), axis=1) == 1]
    seconds = pools[1]

    def extend(c1):
        partial = np.zeros((len(seconds), 3, 3))
        partial[:, :, 0] = c1
        partial[:, :, 1] = seconds
        admissible = seconds[norm.evaluate(partial) < T]
        pairs = np.stack([np.broadcast_to(c1, admissible.shape), admissible], axis=1)
        frames = complete_last_column(pairs, pools[2], lattice.determinants)
        return frames[norm.evaluate(frames.astype(np.float64)) < T] if len(frames) else frames

    chunks = parallel_map(extend, firsts)
    return np.concatenate(chunks) if chunks else np.empty((0, 3, 3), dtype=np.int64)


def _check_budget(candidates: int):
    budget = get_setting('ENUMERATION_BUDGET')
    if candidates > budget:
        raise BudgetExceeded('Enumeration would visit {0} candidates, above the budget of {1}'.format(
            candidates, budget
        ))


class BallEnumeration(object):
    """
    The exact, duplicate-free set Gamma_T, stored as strata and expanded on demand.
    """

    def __init__(self, lattice: LatticeSpec, distance: DistanceFunction, T: float, strata: list):
        self.lattice = lattice
        self.distance = distance
        self.T = float(T)
        self.strata = strata

    @property
    def dim(self) -> int:
        return self.lattice.dim

    @cached_property
    def count(self) -> int:
        return sum(stratum.count for stratum in self.strata)

    def __len__(self):
        return self.count

    def iter_chunks(self) -> Iterator[np.ndarray]:
        """
        Yields the elements as int64 arrays of shape (n, d, d), stratum by stratum.
        """
        for stratum in self.strata:
            if stratum.count:
                yield stratum.materialize()

    def as_array(self) -> np.ndarray:
        chunks = list(self.iter_chunks())
        if not chunks:
            return np.empty((0, self.dim, self.dim), dtype=np.int64)
        return np.concatenate(chunks)

    def elements(self) -> frozenset:
        return frozenset(ExactMatrix(gamma) for gamma in self.as_array())

    def __contains__(self, gamma) -> bool:
        entries = gamma.entries if isinstance(gamma, ExactMatrix) else np.asarray(gamma)
        return self.lattice.contains(entries) and self.distance(np.asarray(entries, dtype=np.float64)) < self.T

    def to_dataframe(self) -> pd.DataFrame:
        """
        One matrix per row, entries in row-major order.
        """
        columns = ['g{0}{1}'.format(i + 1, j + 1) for i in range(self.dim) for j in range(self.dim)]
        values = self.as_array().reshape(-1, self.dim * self.dim)
        frame = pd.DataFrame(values, columns=columns)
        return frame.sort_values(columns).reset_index(drop=True)

    def to_csv(self, path):
        self.to_dataframe().to_csv(path, index=False)
        LOG.info('Wrote %d elements of the ball of radius %s to %s', self.count, self.T, path)

    def __repr__(self):
        return 'BallEnumeration({0!r}, T={1}, count={2})'.format(self.lattice, self.T, self.count)


def enumerate_ball(lattice: LatticeSpec, distance: DistanceFunction, T: float) -> BallEnumeration:
    """
    Gamma_T for a distance with the identity representation.

    :raises BudgetExceeded: when the search would visit more candidates than ENUMERATION_BUDGET
    """
    if distance.representation != IDENTITY:
        raise ValueError('Lattice balls need the identity representation')
    if distance.norm.dim != lattice.dim:
        raise DimMismatch('The norm acts on {0}x{0} matrices, the lattice on {1}x{1}'.format(
            distance.norm.dim, lattice.dim
        ))

    LOG.info('Enumerating %r at T=%s', lattice, T)
    if T <= 1:
        strata = []
    elif lattice.dim == 2:
        strata = _planar_strata(lattice, distance.norm, T)
    else:
        strata = [ExplicitStratum(_spatial_elements(lattice, distance.norm, T))]

    ball = BallEnumeration(lattice, distance, T, strata)
    LOG.info('Enumerated %d elements of %r at T=%s', ball.count, lattice, T)
    return ball


def gamma_count(ball: BallEnumeration) -> int:
    return ball.count


def brute_force_ball(lattice: LatticeSpec, norm: NormSpec, T: float) -> set:
    """
    Gamma_T by trying every integer matrix with entries below the entry bound, as a set of row-major tuples.
    Only for small T.
    """
    if T <= 1:
        return set()
    limit = entry_limit(norm, T)
    d = lattice.dim
    values = np.arange(-limit, limit + 1, dtype=np.int64)
    tail = np.indices((2 * limit + 1,) * (d * d - 1)).reshape(d * d - 1, -1).T - limit

    found = set()
    for head in values:
        stack = np.concatenate([np.full((len(tail), 1), head), tail], axis=1).reshape(-1, d, d)
        keep = np.isin(stack_det(stack), lattice.determinants)
        stack = stack[keep]
        stack = stack[norm.evaluate(stack.astype(np.float64)) < T]
        found.update(tuple(gamma.ravel().tolist()) for gamma in stack)
    return found


def as_tuples(ball: BallEnumeration) -> set:
    return {tuple(gamma.ravel().tolist()) for gamma in ball.as_array()}

