"""
Test functions phi for orbit sums. Every function is evaluated on an (n, dim) array of points and reports a
bounding box of its support so that orbit sums can skip lattice strata that never reach it.
"""
from typing import List, Optional, Sequence, Tuple

import numpy as np


def _sphere_crossings(center, radius, direction):
    """
    Positive r with |r * direction - center| = radius.
    """
    direction = np.asarray(direction, dtype=np.float64)
    a = direction @ direction
    b = -2 * direction @ center
    c = center @ center - radius ** 2
    discriminant = b ** 2 - 4 * a * c
    if discriminant < 0:
        return []
    root = np.sqrt(discriminant)
    return sorted(float(r) for r in ((-b - root) / (2 * a), (-b + root) / (2 * a)) if r > 0)


class Observable(object):
    """
    A test function phi. ``support_box`` returns (lo, hi) arrays or None when the support is unbounded.
    """
    kind = None
    complex_valued = False

    def __init__(self, dim: int = 2):
        self.dim = dim

    def __call__(self, points) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=np.float64))
        if points.shape[-1] != self.dim:
            raise ValueError('{0} takes points of dimension {1}, got {2}'.format(
                self.__class__.__name__, self.dim, points.shape[-1]
            ))
        return self._evaluate(points)

    def _evaluate(self, points):
        raise NotImplementedError

    def support_box(self) -> Optional[Tuple[np.ndarray, np.ndarray]]:
        return None

    def ray_breaks(self, direction) -> List[float]:
        """
        Radii r > 0 where r * direction crosses a kink or edge of phi, as breakpoints for radial quadrature.
        """
        return []

    def to_dict(self) -> dict:
        return {'kind': self.kind, 'dim': self.dim}

    def __repr__(self):
        return '{0}({1})'.format(self.__class__.__name__, self.to_dict())


class Indicator(Observable):
    """
    Indicators evaluate through ``contains`` so that counts and sums use one membership test.
    """

    def contains(self, points) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=np.float64))
        return self._contains(points)

    def _contains(self, points):
        raise NotImplementedError

    def _evaluate(self, points):
        return self._contains(points).astype(np.float64)


class SmoothBump(Observable):
    """
    (1 - (|w - center| / radius)^2)^order on the closed ball, zero outside. C^1 for order >= 2.
    """
    kind = 'bump'

    def __init__(self, center: Sequence[float], radius: float, order: int = 2):
        center = np.asarray(center, dtype=np.float64)
        super(SmoothBump, self).__init__(len(center))
        if not radius > 0:
            raise ValueError('The bump radius must be positive')
        self.center = center
        self.radius = float(radius)
        self.order = int(order)

    def _evaluate(self, points):
        u = np.sum((points - self.center) ** 2, axis=-1) / self.radius ** 2
        return np.clip(1 - u, 0, None) ** self.order

    def support_box(self):
        return self.center - self.radius, self.center + self.radius

    def ray_breaks(self, direction):
        return _sphere_crossings(self.center, self.radius, direction)

    def to_dict(self):
        return {'kind': self.kind, 'center': self.center.tolist(), 'radius': self.radius, 'order': self.order}


class BoxIndicator(Indicator):
    kind = 'box'

    def __init__(self, lo: Sequence[float], hi: Sequence[float]):
        lo, hi = np.asarray(lo, dtype=np.float64), np.asarray(hi, dtype=np.float64)
        if lo.shape != hi.shape or np.any(lo > hi):
            raise ValueError('Box corners must have equal shape with lo <= hi')
        super(BoxIndicator, self).__init__(len(lo))
        self.lo, self.hi = lo, hi

    def _contains(self, points):
        return np.all((points >= self.lo) & (points <= self.hi), axis=-1)

    def support_box(self):
        return self.lo, self.hi

    def ray_breaks(self, direction):
        direction = np.asarray(direction, dtype=np.float64)
        moving = direction != 0
        crossings = np.concatenate([self.lo[moving] / direction[moving], self.hi[moving] / direction[moving]])
        return sorted(float(r) for r in crossings if r > 0)

    def to_dict(self):
        return {'kind': self.kind, 'lo': self.lo.tolist(), 'hi': self.hi.tolist()}


class AnnulusIndicator(Indicator):
    """
    r_min <= |w|_2 <= r_max.
    """
    kind = 'annulus'

    def __init__(self, r_min: float, r_max: float, dim: int = 2):
        if not 0 <= r_min <= r_max:
            raise ValueError('Annulus radii must satisfy 0 <= r_min <= r_max')
        super(AnnulusIndicator, self).__init__(dim)
        self.r_min, self.r_max = float(r_min), float(r_max)

    def _contains(self, points):
        radius = np.sqrt(np.sum(points ** 2, axis=-1))
        return (radius >= self.r_min) & (radius <= self.r_max)

    def support_box(self):
        return np.full(self.dim, -self.r_max), np.full(self.dim, self.r_max)

    def ray_breaks(self, direction):
        scale = float(np.linalg.norm(direction))
        return [r / scale for r in (self.r_min, self.r_max) if r > 0]

    def to_dict(self):
        return {'kind': self.kind, 'r_min': self.r_min, 'r_max': self.r_max, 'dim': self.dim}


class AnnulusBump(Observable):
    """
    The C^1 radial bump (1 - u^2)^2 with u = (|w|_2 - r_mid) / r_half, supported on the closed annulus.
    """
    kind = 'annulus_bump'

    def __init__(self, r_min: float, r_max: float, dim: int = 2):
        if not 0 <= r_min < r_max:
            raise ValueError('Annulus radii must satisfy 0 <= r_min < r_max')
        super(AnnulusBump, self).__init__(dim)
        self.r_min, self.r_max = float(r_min), float(r_max)

    def _evaluate(self, points):
        mid, half = (self.r_min + self.r_max) / 2, (self.r_max - self.r_min) / 2
        u = (np.sqrt(np.sum(points ** 2, axis=-1)) - mid) / half
        return np.clip(1 - u ** 2, 0, None) ** 2

    def radial(self, r):
        """
        The profile as a function of |w|_2.
        """
        return self(np.stack([np.asarray(r, dtype=np.float64)] + [np.zeros_like(r)] * (self.dim - 1), axis=-1))

    def support_box(self):
        return np.full(self.dim, -self.r_max), np.full(self.dim, self.r_max)

    def ray_breaks(self, direction):
        scale = float(np.linalg.norm(direction))
        return [r / scale for r in (self.r_min, self.r_max) if r > 0]

    def to_dict(self):
        return {'kind': self.kind, 'r_min': self.r_min, 'r_max': self.r_max, 'dim': self.dim}


class TrigCharacter(Observable):
    """
    w -> exp(2 pi i <k, w>) for an integer frequency k, a function on the torus R^d / Z^d.
    """
    kind = 'character'
    complex_valued = True

    def __init__(self, k: Sequence[int]):
        k = np.asarray(k)
        if not np.array_equal(k, np.round(k)):
            raise ValueError('Character frequencies must be integers')
        super(TrigCharacter, self).__init__(len(k))
        self.k = k.astype(np.int64)

    def _evaluate(self, points):
        return np.exp(2j * np.pi * (points @ self.k))

    def to_dict(self):
        return {'kind': self.kind, 'k': self.k.tolist()}


class WholeSpace(Indicator):
    kind = 'whole'

    def _contains(self, points):
        return np.ones(len(points), dtype=bool)


class EmptyRegion(Indicator):
    kind = 'empty'

    def _contains(self, points):
        return np.zeros(len(points), dtype=bool)

    def support_box(self):
        # Inverted corners reject every point
        return np.full(self.dim, np.inf), np.full(self.dim, -np.inf)


class Zero(Observable):
    kind = 'zero'

    def _evaluate(self, points):
        return np.zeros(len(points))

    def support_box(self):
        return np.full(self.dim, np.inf), np.full(self.dim, -np.inf)


OBSERVABLES = {
    cls.kind: cls for cls in (SmoothBump, BoxIndicator, AnnulusIndicator, AnnulusBump, TrigCharacter)
}


def observable_from_dict(data: dict) -> Observable:
    """
    Builds an observable from its dict form, e.g. ``{'kind': 'annulus_bump', 'r_min': 1, 'r_max': 2}``.
    """
    data = dict(data)
    kind = data.pop('kind', None)
    if kind in ('whole', 'empty', 'zero'):
        return {'whole': WholeSpace, 'empty': EmptyRegion, 'zero': Zero}[kind](data.get('dim', 2))
    if kind not in OBSERVABLES:
        raise ValueError('Unknown observable kind {0}'.format(kind))
    return OBSERVABLES[kind](**data)
