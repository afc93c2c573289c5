"""
Orbit statistics over an enumerated ball:

    S_{phi, v}(T) = sum over gamma in Gamma_T of phi(v . gamma)          (row vectors, right linear action)
    sum over gamma in Gamma_T of phi(gamma^-1 x0 mod Z^d)                (left action on the torus)
    N_T(A, x0) = #{gamma in Gamma_T : x0 . gamma in A}
"""
import logging
from typing import Sequence

import numpy as np

from orbitlab.lattice.enumeration import BallEnumeration, PlanarStratum
from orbitlab.lattice.observables import Indicator, Observable, TrigCharacter
from orbitlab.parallel import parallel_map


LOG = logging.getLogger(__name__)


class ActionMismatch(ValueError):
    pass


class TorusPoint(object):
    """
    A point of R^d / Z^d, stored with coordinates in [0, 1).
    """

    def __init__(self, coords: Sequence[float]):
        coords = np.asarray(coords, dtype=np.float64)
        if coords.ndim != 1 or not np.all(np.isfinite(coords)):
            raise ValueError('Torus points need a finite coordinate vector')
        self.coords = np.mod(coords, 1.0)

    @property
    def dim(self) -> int:
        return len(self.coords)

    def __repr__(self):
        return 'TorusPoint({0})'.format(self.coords.tolist())


def stack_inverse(stack: np.ndarray) -> np.ndarray:
    """
    Exact inverses of a stack of integer matrices with determinant +-1, through the adjugate.
    """
    stack = np.asarray(stack, dtype=np.int64)
    if stack.shape[-1] == 2:
        det = stack[:, 0, 0] * stack[:, 1, 1] - stack[:, 0, 1] * stack[:, 1, 0]
        adjugate = np.empty_like(stack)
        adjugate[:, 0, 0], adjugate[:, 1, 1] = stack[:, 1, 1], stack[:, 0, 0]
        adjugate[:, 0, 1], adjugate[:, 1, 0] = -stack[:, 0, 1], -stack[:, 1, 0]
    else:
        columns = [stack[:, :, j] for j in range(3)]
        # Rows of the inverse are the pairwise cross products of the columns
        adjugate = np.stack([
            np.cross(columns[1], columns[2]), np.cross(columns[2], columns[0]), np.cross(columns[0], columns[1]),
        ], axis=1)
        det = np.einsum('ni,ni->n', adjugate[:, 0], columns[0])
    # det is +-1, so dividing by it is multiplying by it
    return adjugate * det[:, None, None]


class RightLinear(object):
    """
    w = v . gamma for a row vector v in R^d.
    """
    name = 'right_linear'

    def validate(self, point, phi: Observable, dim: int) -> np.ndarray:
        if isinstance(point, TorusPoint):
            raise ActionMismatch('The right linear action takes vectors in R^d, not torus points')
        if phi.complex_valued:
            raise ActionMismatch('Characters are functions on the torus; use InverseLeftTorus')
        v = np.asarray(point, dtype=np.float64)
        if v.shape != (dim,) or phi.dim != dim:
            raise ActionMismatch('Vector, test function and lattice dimensions differ')
        return v

    def apply(self, v: np.ndarray, elements: np.ndarray) -> np.ndarray:
        return np.einsum('i,nij->nj', v, elements)

    def prune(self, v: np.ndarray, stratum, box):
        """
        Drops the rows of a planar stratum whose orbit points cannot enter ``box``. The first coordinate of
        v . gamma is v . (a, c) and the second moves by k (v . (a, c)), so the box cuts the k-interval.
        """
        if box is None or not isinstance(stratum, PlanarStratum):
            return stratum
        lo, hi = box
        x = stratum.first @ v
        y0 = stratum.base @ v
        keep = (x >= lo[0]) & (x <= hi[0])
        x, y0 = x[keep], y0[keep]

        with np.errstate(divide='ignore', invalid='ignore'):
            a, b = (lo[1] - y0) / x, (hi[1] - y0) / x
        reach = np.abs(stratum.k_lo[keep]) + np.abs(stratum.k_hi[keep])
        flat = x == 0
        within = (y0 >= lo[1]) & (y0 <= hi[1])
        # One unit of slack on each side; the test function itself makes the final decision
        k_lo = np.where(flat, np.where(within, -reach, 1), np.floor(np.minimum(a, b)) - 1)
        k_hi = np.where(flat, np.where(within, reach, 0), np.ceil(np.maximum(a, b)) + 1)
        k_lo = np.clip(k_lo, -reach - 1, reach + 1).astype(np.int64)
        k_hi = np.clip(k_hi, -reach - 1, reach + 1).astype(np.int64)
        return stratum.restrict(keep, k_lo, k_hi)


class InverseLeftTorus(object):
    """
    x -> gamma^-1 x mod Z^d for a torus point x.
    """
    name = 'inverse_left_torus'

    def validate(self, point, phi: Observable, dim: int) -> np.ndarray:
        if not isinstance(point, TorusPoint):
            raise ActionMismatch('The torus action takes a TorusPoint')
        if point.dim != dim or phi.dim != dim:
            raise ActionMismatch('Torus point, test function and lattice dimensions differ')
        return point.coords

    def apply(self, x: np.ndarray, elements: np.ndarray) -> np.ndarray:
        return np.mod(np.einsum('nij,j->ni', stack_inverse(elements), x), 1.0)

    def prune(self, x, stratum, box):
        return stratum


RIGHT_LINEAR = RightLinear()
INVERSE_LEFT_TORUS = InverseLeftTorus()


def _folded(ball: BallEnumeration, point, phi: Observable, action, evaluate):
    base = action.validate(point, phi, ball.dim)
    box = phi.support_box()

    def fold(stratum):
        stratum = action.prune(base, stratum, box)
        if not stratum.count:
            return 0
        return evaluate(action.apply(base, stratum.materialize()))

    # In-order reduction keeps the result independent of the worker count
    parts = parallel_map(fold, ball.strata)
    total = 0
    for part in parts:
        total += part
    return total


def orbit_sum(ball: BallEnumeration, point, phi: Observable, action=RIGHT_LINEAR):
    """
    The sum of phi over the orbit points of ``point`` under Gamma_T. Real for real test functions, complex for
    characters.

    :raises ActionMismatch: if the point, the test function and the action do not fit together
    """
    total = _folded(ball, point, phi, action, lambda points: phi(points).sum())
    LOG.debug('Orbit sum of %r over %d elements: %s', phi, ball.count, total)
    return complex(total) if phi.complex_valued else float(total)


def count_in_set(ball: BallEnumeration, point, region: Indicator, action=RIGHT_LINEAR) -> int:
    """
    N_T(A, x0): the number of gamma in Gamma_T whose orbit point lies in ``region``.
    """
    if not isinstance(region, Indicator):
        raise ActionMismatch('Counting needs an indicator region, got {0!r}'.format(region))
    return int(_folded(ball, point, region, action, lambda points: int(region.contains(points).sum())))


def weyl_sum(ball: BallEnumeration, x0: TorusPoint, k: Sequence[int]) -> float:
    """
    |(1 / #Gamma_T) sum exp(2 pi i <k, gamma^-1 x0>)|, zero for an empty ball.
    """
    if not ball.count:
        return 0.0
    return abs(orbit_sum(ball, x0, TrigCharacter(k), INVERSE_LEFT_TORUS)) / ball.count
