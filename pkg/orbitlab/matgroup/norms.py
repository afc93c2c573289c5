"""
Norms on d x d real matrices described as data.

Every variant here is an absolute, monotone norm: its value depends only on the absolute values of the
entries and does not decrease when any one of them grows. Enumeration and volume bounds rely on that.
"""
import numpy as np

from orbitlab.matgroup.matrices import DimMismatch, RealMatrix


class InvalidNorm(ValueError):
    pass


class NormSpec(object):
    """
    Base class for a norm on Mat_d(R). Subclasses implement ``_evaluate`` on stacks of shape (..., d, d).
    """
    kind = None

    def __init__(self, dim: int):
        if dim < 1:
            raise InvalidNorm('Dimension must be positive')
        self.dim = dim

    def evaluate(self, a):
        """
        Evaluates the norm on a single matrix or a stack of matrices.

        :param a: A RealMatrix, a (d, d) array or a (..., d, d) array
        :return: A float for a single matrix, an array of floats for a stack
        """
        values = a.entries if isinstance(a, RealMatrix) else np.asarray(a, dtype=np.float64)
        if values.shape[-2:] != (self.dim, self.dim):
            raise DimMismatch('{0} expects {1}x{1} matrices, got {2}'.format(
                self.__class__.__name__, self.dim, values.shape[-2:]
            ))

        result = self._evaluate(values)
        if values.ndim == 2:
            return float(result)
        return result

    def _evaluate(self, values):
        raise NotImplementedError

    def unit_norms(self) -> np.ndarray:
        """
        The d x d array of norms of the elementary matrices E_ij.
        """
        units = np.zeros((self.dim, self.dim, self.dim, self.dim))
        for i in range(self.dim):
            for j in range(self.dim):
                units[i, j, i, j] = 1.0
        return self.evaluate(units.reshape(-1, self.dim, self.dim)).reshape(self.dim, self.dim)

    def entry_constant(self) -> float:
        """
        A constant c > 0 with ||A|| >= c * max |a_ij| for every A.
        """
        return float(self.unit_norms().min())

    def entry_bound(self, threshold: float) -> float:
        """
        Every matrix with norm below ``threshold`` has all entries strictly below this bound in absolute value.
        """
        return threshold / self.entry_constant()

    def frobenius_constant(self) -> float:
        """
        A constant c > 0 with ||A|| >= c * ||A||_F for every A.
        """
        return self.entry_constant() / self.dim

    def to_dict(self) -> dict:
        raise NotImplementedError

    def __eq__(self, other):
        return type(self) is type(other) and self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash(repr(sorted(self.to_dict().items())))

    def __repr__(self):
        return '{0}({1})'.format(self.__class__.__name__, self.to_dict())


def _check_p(p):
    p = float(p)
    if not p >= 1:
        raise InvalidNorm('p must be at least 1, got {0}'.format(p))
    return p


def _p_norm(values, p, axis):
    values = np.abs(values)
    if np.isinf(p):
        return values.max(axis=axis)
    if p == 1:
        return values.sum(axis=axis)
    if p == 2:
        return np.sqrt((values * values).sum(axis=axis))
    return (values ** p).sum(axis=axis) ** (1.0 / p)


class EntrywisePNorm(NormSpec):
    """
    The p-norm of the matrix viewed as a vector of d^2 entries. p = 2 is the Frobenius norm and p = inf the
    max-norm.
    """
    kind = 'entrywise'

    def __init__(self, p: float = 2, dim: int = 2):
        super(EntrywisePNorm, self).__init__(dim)
        self.p = _check_p(p)

    def _evaluate(self, values):
        return _p_norm(values, self.p, axis=(-2, -1))

    def to_dict(self):
        return {'kind': self.kind, 'p': self.p, 'dim': self.dim}


class MaxColumnNorm(NormSpec):
    """
    max_j ||column j||_p
    """
    kind = 'max_column'

    def __init__(self, p: float = 2, dim: int = 3):
        super(MaxColumnNorm, self).__init__(dim)
        self.p = _check_p(p)

    def _evaluate(self, values):
        return _p_norm(values, self.p, axis=-2).max(axis=-1)

    def to_dict(self):
        return {'kind': self.kind, 'p': self.p, 'dim': self.dim}


class SpiralNorm(NormSpec):
    """
    The norm on Mat_3(R) that breaks limit volume ratios for the spiral subgroup:

        max{sqrt(c a11^2 + a12^2), sqrt(c a22^2 + a21^2), sqrt(a13^2 + a23^2), |a31|, |a32|, |a33|}
    """
    kind = 'spiral'

    def __init__(self, c: float, dim: int = 3):
        if dim != 3:
            raise InvalidNorm('The spiral norm is defined on 3x3 matrices only')
        super(SpiralNorm, self).__init__(dim)
        if not c > 1:
            raise InvalidNorm('The spiral norm needs c > 1, got {0}'.format(c))
        self.c = float(c)

    def _evaluate(self, a):
        parts = np.stack([
            np.sqrt(self.c * a[..., 0, 0] ** 2 + a[..., 0, 1] ** 2),
            np.sqrt(self.c * a[..., 1, 1] ** 2 + a[..., 1, 0] ** 2),
            np.sqrt(a[..., 0, 2] ** 2 + a[..., 1, 2] ** 2),
            np.abs(a[..., 2, 0]),
            np.abs(a[..., 2, 1]),
            np.abs(a[..., 2, 2]),
        ], axis=-1)
        return parts.max(axis=-1)

    def to_dict(self):
        return {'kind': self.kind, 'c': self.c, 'dim': self.dim}


class WeightedEntrywise(NormSpec):
    """
    Entrywise p-norm of the Hadamard product W * A for a positive weight matrix W.
    """
    kind = 'weighted'

    def __init__(self, weights, p: float = 2):
        weights = np.array(weights, dtype=np.float64)
        if weights.ndim != 2 or weights.shape[0] != weights.shape[1]:
            raise InvalidNorm('Weights must form a square matrix')
        if not np.all(np.isfinite(weights)) or not np.all(weights > 0):
            raise InvalidNorm('Weights must be positive and finite')
        super(WeightedEntrywise, self).__init__(weights.shape[0])
        weights.setflags(write=False)
        self.weights = weights
        self.p = _check_p(p)

    def _evaluate(self, values):
        return _p_norm(values * self.weights, self.p, axis=(-2, -1))

    def to_dict(self):
        return {'kind': self.kind, 'p': self.p, 'weights': self.weights.tolist()}


NORM_KINDS = {
    cls.kind: cls for cls in (EntrywisePNorm, MaxColumnNorm, SpiralNorm, WeightedEntrywise)
}


def norm_from_dict(data: dict) -> NormSpec:
    """
    Builds a NormSpec from its dict form, e.g. ``{'kind': 'entrywise', 'p': 4, 'dim': 2}``.
    ``p`` may be given as the string ``'inf'``.
    """
    data = dict(data)
    kind = data.pop('kind', None)
    if kind not in NORM_KINDS:
        raise InvalidNorm('Unknown norm kind {0}'.format(kind))
    if 'p' in data:
        data['p'] = float(data['p'])
    try:
        return NORM_KINDS[kind](**data)
    except TypeError as e:
        raise InvalidNorm(str(e))


def norm_eval(norm: NormSpec, a) -> float:
    return norm.evaluate(a)
