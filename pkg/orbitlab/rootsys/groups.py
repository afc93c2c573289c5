"""
The supported group families with their restricted roots, weights, representation and maximal compact
parametrization. Root and weight data is hard-coded per family.
"""
import itertools
from fractions import Fraction
from math import comb

import numpy as np
from django.utils.functional import cached_property

from orbitlab.rootsys.data import InvalidGroupSpec, RootSystemData, WeightSystem


SO2 = 'SO2'
SO2xSO2 = 'SO2xSO2'
SO3 = 'SO3'


def rotation(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def quaternion_rotation(q):
    """
    Rotation matrix of a unit quaternion (w, x, y, z).
    """
    w, x, y, z = np.asarray(q, dtype=np.float64) / np.linalg.norm(q)
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
        [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
        [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
    ])


def _linear_power(alpha, beta, n):
    """
    Coefficients of (alpha x + beta y)^n in the basis x^n, x^(n-1) y, ..., y^n.
    """
    return np.array([comb(n, i) * alpha ** (n - i) * beta ** i for i in range(n + 1)], dtype=np.float64)


def symmetric_power(g, n: int) -> np.ndarray:
    """
    Matrix of P(x, y) -> P((x, y) g) on homogeneous polynomials of degree n in the monomial basis
    x^n, x^(n-1) y, ..., y^n. This is a homomorphism, and diag(e^s, e^-s) acts on x^(n-k) y^k by e^((n-2k)s).
    """
    (a, b), (c, d) = np.asarray(g, dtype=np.float64)
    result = np.zeros((n + 1, n + 1))
    for k in range(n + 1):
        result[:, k] = np.convolve(_linear_power(a, c, n - k), _linear_power(b, d, k))
    return result


class GroupSpec(object):
    """
    Base class of the group families. Subclasses provide root data, weight data and the representation.
    """
    family = None
    compact = None
    is_simple = True
    is_irreducible = True

    @cached_property
    def root_system(self) -> RootSystemData:
        return self._root_system()

    @cached_property
    def weight_system(self) -> WeightSystem:
        return self._weight_system()

    @property
    def rank(self) -> int:
        return self.root_system.rank

    @property
    def dim(self) -> int:
        return self.weight_system.dim

    @property
    def group_dim(self) -> int:
        """
        Size of the matrices representing group elements before Psi is applied.
        """
        return self.dim

    def represent(self, g) -> np.ndarray:
        return np.asarray(g, dtype=np.float64)

    def torus_diagonal(self, y) -> np.ndarray:
        """
        Diagonal of Psi(exp(Y)) for Y (or a stack of Y of shape (..., r)) in s-coordinates.
        """
        return np.exp(np.asarray(y, dtype=np.float64) @ self.weight_system.weight_matrix().T)

    @property
    def compact_dim(self) -> int:
        return {SO2: 1, SO2xSO2: 2, SO3: 4}.get(self.compact, 0)

    def compact_element(self, params) -> np.ndarray:
        """
        The group element of K with the given parameters (angles, or a quaternion for SO(3)).
        """
        raise NotImplementedError('{0} has no maximal compact parametrization'.format(self))

    def compact_image(self, params) -> np.ndarray:
        return self.represent(self.compact_element(params))

    def sample_compact(self, rng, count: int) -> np.ndarray:
        """
        Haar-random parameters for ``count`` elements of K.
        """
        if self.compact == SO3:
            # Normalised gaussian 4-vectors are uniform unit quaternions
            return rng.normal(size=(count, 4))
        return rng.uniform(0, 2 * np.pi, size=(count, self.compact_dim))

    def compact_grid(self, nodes: int):
        """
        Tensor trapezoid grid on K with equal probability weights. Returns (parameters, weights).
        """
        if self.compact not in (SO2, SO2xSO2):
            raise NotImplementedError('No quadrature grid for {0}'.format(self.compact))
        angles = 2 * np.pi * np.arange(nodes) / nodes
        params = np.array(list(itertools.product(angles, repeat=self.compact_dim)))
        return params, np.full(len(params), 1.0 / len(params))

    def to_dict(self) -> dict:
        raise NotImplementedError

    def __eq__(self, other):
        return type(self) is type(other) and self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash(tuple(sorted(self.to_dict().items())))

    def __repr__(self):
        return '{0}({1})'.format(self.__class__.__name__, self.to_dict())


class SLn(GroupSpec):
    """
    SL(n, R) in its standard representation. Coordinates y_1, ..., y_(n-1) with y_n = -(y_1 + ... + y_(n-1)).
    """
    family = 'SLn'

    def __init__(self, n: int):
        if n < 2:
            raise InvalidGroupSpec('SL(n) needs n >= 2')
        self.n = n
        self.compact = {2: SO2, 3: SO3}.get(n)

    def _e(self, i):
        # Coordinate covector e_i of the diagonal, written in y_1..y_(n-1)
        if i < self.n - 1:
            return [Fraction(int(j == i)) for j in range(self.n - 1)]
        return [Fraction(-1)] * (self.n - 1)

    def _root_system(self):
        roots = []
        for i, j in itertools.combinations(range(self.n), 2):
            roots.append(([a - b for a, b in zip(self._e(i), self._e(j))], 1))
        simple = [[a - b for a, b in zip(self._e(i), self._e(i + 1))] for i in range(self.n - 1)]
        return RootSystemData(self.n - 1, roots, simple)

    def _weight_system(self):
        return WeightSystem([self._e(i) for i in range(self.n)], list(range(self.n)))

    def torus_element(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=np.float64)
        return np.diag(np.exp(np.append(y, -y.sum())))

    def compact_element(self, params):
        if self.compact == SO2:
            return rotation(params[0])
        if self.compact == SO3:
            return quaternion_rotation(params)
        return super(SLn, self).compact_element(params)

    def to_dict(self):
        return {'family': self.family, 'n': self.n}


class SOpq(GroupSpec):
    """
    SO(p, q), 1 <= p <= q, in its standard representation, written in a basis where the split torus acts by
    diag(e^s_1, ..., e^s_p, 1, ..., 1, e^-s_p, ..., e^-s_1).
    """
    family = 'SOpq'

    def __init__(self, p: int, q: int):
        if not (1 <= p <= q and p + q >= 3):
            raise InvalidGroupSpec('SO(p, q) needs 1 <= p <= q and p + q >= 3')
        self.p = p
        self.q = q
        self.is_simple = (p, q) != (2, 2)

    def _unit(self, i, sign=1):
        return [Fraction(sign * int(j == i)) for j in range(self.p)]

    def _root_system(self):
        p, q = self.p, self.q
        roots = []
        for i, j in itertools.combinations(range(p), 2):
            roots.append(([a - b for a, b in zip(self._unit(i), self._unit(j))], 1))
            roots.append(([a + b for a, b in zip(self._unit(i), self._unit(j))], 1))
        if q > p:
            roots.extend((self._unit(i), q - p) for i in range(p))

        simple = [[a - b for a, b in zip(self._unit(i), self._unit(i + 1))] for i in range(p - 1)]
        if q > p:
            simple.append(self._unit(p - 1))
        else:
            simple.append([a + b for a, b in zip(self._unit(p - 2), self._unit(p - 1))])
        return RootSystemData(p, roots, simple)

    def _weight_system(self):
        p, q = self.p, self.q
        weights = [self._unit(i) for i in range(p)]
        assignment = list(range(p))
        if q > p:
            weights.append([Fraction(0)] * p)
            assignment.extend([p] * (q - p))
        offset = len(weights)
        weights.extend(self._unit(i, sign=-1) for i in range(p))
        assignment.extend(offset + i for i in reversed(range(p)))
        return WeightSystem(weights, assignment)

    def to_dict(self):
        return {'family': self.family, 'p': self.p, 'q': self.q}


class SL2xSL2Tensor(GroupSpec):
    """
    SL(2, R) x SL(2, R) acting on R^2 (x) Sym^(l-1)(R^2), the tensor product of the 2- and l-dimensional
    irreducible representations. Group elements are 4x4 block-diagonal matrices diag(h1, h2).
    """
    family = 'SL2xSL2Tensor'
    compact = SO2xSO2
    is_simple = False

    def __init__(self, l: int):
        if l < 2:
            raise InvalidGroupSpec('The second factor needs l >= 2')
        self.l = l

    def _root_system(self):
        return RootSystemData(2, [((2, 0), 1), ((0, 2), 1)], [(2, 0), (0, 2)])

    def _weight_system(self):
        weights = []
        for i in (1, -1):
            for k in range(self.l):
                weights.append((i, self.l - 1 - 2 * k))
        return WeightSystem(weights, list(range(2 * self.l)))

    @property
    def group_dim(self):
        return 4

    def represent(self, g):
        g = np.asarray(g, dtype=np.float64)
        return np.kron(g[:2, :2], symmetric_power(g[2:, 2:], self.l - 1))

    def torus_element(self, y) -> np.ndarray:
        s1, s2 = y
        return np.diag(np.exp([s1, -s1, s2, -s2]))

    def compact_element(self, params):
        element = np.zeros((4, 4))
        element[:2, :2] = rotation(params[0])
        element[2:, 2:] = rotation(params[1])
        return element

    def to_dict(self):
        return {'family': self.family, 'l': self.l}


GROUP_FAMILIES = {cls.family: cls for cls in (SLn, SOpq, SL2xSL2Tensor)}


def group_from_dict(data: dict) -> GroupSpec:
    """
    Builds a GroupSpec from its dict form, e.g. ``{'family': 'SOpq', 'p': 2, 'q': 3}``.
    """
    data = dict(data)
    family = data.pop('family', None)
    if family not in GROUP_FAMILIES:
        raise InvalidGroupSpec('Unknown group family {0}'.format(family))
    try:
        return GROUP_FAMILIES[family](**data)
    except TypeError as e:
        raise InvalidGroupSpec(str(e))
