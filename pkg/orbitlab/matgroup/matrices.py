"""
Exact integer matrices (lattice elements) and finite real matrices (group elements).
"""
from typing import Iterable, Union

import numpy as np


INT64_MAX = np.iinfo(np.int64).max
INT64_MIN = np.iinfo(np.int64).min


class MatrixOverflow(ArithmeticError):
    pass


class NonUnimodular(ValueError):
    pass


class NonFiniteEntries(ValueError):
    pass


class DimMismatch(ValueError):
    pass


def _exact_det(rows):
    """
    Fraction-free Bareiss elimination on python ints.
    """
    m = [list(row) for row in rows]
    n = len(m)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            # Pivot on the first row below with a nonzero entry in this column
            swap = next((i for i in range(k + 1, n) if m[i][k] != 0), None)
            if swap is None:
                return 0
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def _checked(rows):
    """
    Converts nested python ints to an int64 array, refusing anything outside the int64 range.
    """
    for row in rows:
        for value in row:
            if value > INT64_MAX or value < INT64_MIN:
                raise MatrixOverflow('Entry {0} does not fit in 64 bits'.format(value))
    return np.array(rows, dtype=np.int64)


class ExactMatrix(object):
    """
    A square integer matrix. Entries are stored as int64 and every product is computed on python ints and
    checked before it is stored again, so wraparound can never happen silently.

    Constructing with ``unimodular=True`` rejects any matrix whose determinant is not +1 or -1.
    """

    def __init__(self, entries: Union[Iterable, np.ndarray], unimodular: bool = False):
        rows = [[int(value) for value in row] for row in np.asarray(entries, dtype=object)]
        if not rows or any(len(row) != len(rows) for row in rows):
            raise DimMismatch('Exact matrices must be square')

        self._entries = _checked(rows)
        self._entries.setflags(write=False)
        self.unimodular = unimodular

        if unimodular and self.det() not in (1, -1):
            raise NonUnimodular('Determinant {0} is not a unit'.format(self.det()))

    @classmethod
    def identity(cls, dim: int) -> 'ExactMatrix':
        return cls(np.eye(dim, dtype=np.int64), unimodular=True)

    @property
    def dim(self) -> int:
        return self._entries.shape[0]

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    def rows(self):
        return [[int(value) for value in row] for row in self._entries]

    def det(self) -> int:
        return _exact_det(self.rows())

    def to_real(self) -> 'RealMatrix':
        return RealMatrix(self._entries.astype(np.float64))

    def __matmul__(self, other: 'ExactMatrix') -> 'ExactMatrix':
        return mat_mul(self, other)

    def __neg__(self) -> 'ExactMatrix':
        return ExactMatrix(-self._entries.astype(object), unimodular=self.unimodular)

    def __eq__(self, other):
        return isinstance(other, ExactMatrix) and np.array_equal(self._entries, other._entries)

    def __hash__(self):
        return hash(tuple(self._entries.ravel().tolist()))

    def __repr__(self):
        return 'ExactMatrix({0})'.format(self.rows())


class RealMatrix(object):
    """
    A square matrix of finite doubles.
    """

    def __init__(self, entries: Union[Iterable, np.ndarray]):
        values = np.array(entries, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise DimMismatch('Real matrices must be square, got shape {0}'.format(values.shape))
        if not np.all(np.isfinite(values)):
            raise NonFiniteEntries('Real matrices must have finite entries')

        values.setflags(write=False)
        self._entries = values

    @classmethod
    def identity(cls, dim: int) -> 'RealMatrix':
        return cls(np.eye(dim))

    @classmethod
    def rotation(cls, theta: float, dim: int = 2) -> 'RealMatrix':
        """
        Rotation by ``theta`` in the upper-left 2x2 block, identity elsewhere.
        """
        values = np.eye(dim)
        values[:2, :2] = [[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]]
        return cls(values)

    @property
    def dim(self) -> int:
        return self._entries.shape[0]

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    def inverse(self) -> 'RealMatrix':
        return RealMatrix(np.linalg.inv(self._entries))

    def __matmul__(self, other: 'RealMatrix') -> 'RealMatrix':
        if self.dim != other.dim:
            raise DimMismatch('Cannot multiply {0}x{0} by {1}x{1}'.format(self.dim, other.dim))
        return RealMatrix(self._entries @ other._entries)

    def __mul__(self, scalar: float) -> 'RealMatrix':
        return RealMatrix(self._entries * scalar)

    __rmul__ = __mul__

    def __repr__(self):
        return 'RealMatrix({0})'.format(self._entries.tolist())


def mat_mul(a: ExactMatrix, b: ExactMatrix) -> ExactMatrix:
    """
    Exact product of two integer matrices.

    :raises DimMismatch: when the dimensions differ
    :raises MatrixOverflow: when an entry of the product leaves the int64 range
    """
    if a.dim != b.dim:
        raise DimMismatch('Cannot multiply {0}x{0} by {1}x{1}'.format(a.dim, b.dim))

    product = np.dot(a.entries.astype(object), b.entries.astype(object))
    return ExactMatrix(product, unimodular=a.unimodular and b.unimodular)


def inverse_unimodular(a: ExactMatrix) -> ExactMatrix:
    """
    Exact inverse of a determinant +-1 matrix, computed from the adjugate.

    :raises NonUnimodular: when |det a| != 1
    """
    det = a.det()
    if det not in (1, -1):
        raise NonUnimodular('Determinant {0} is not a unit'.format(det))

    rows = a.rows()
    n = a.dim
    if n == 1:
        return ExactMatrix([[det]], unimodular=True)

    adjugate = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [row[:j] + row[j + 1:] for k, row in enumerate(rows) if k != i]
            # The adjugate is the transposed cofactor matrix
            adjugate[j][i] = (-1) ** (i + j) * _exact_det(minor)

    return ExactMatrix([[det * value for value in row] for row in adjugate], unimodular=True)


def stack_det(stack: np.ndarray) -> np.ndarray:
    """
    Exact determinants of a stack of 2x2 or 3x3 integer matrices with small entries.
    """
    stack = np.asarray(stack, dtype=np.int64)
    if stack.shape[-1] == 2:
        return stack[..., 0, 0] * stack[..., 1, 1] - stack[..., 0, 1] * stack[..., 1, 0]
    if stack.shape[-1] == 3:
        cross = np.cross(stack[..., :, 0], stack[..., :, 1])
        return np.einsum('...i,...i->...', cross, stack[..., :, 2])
    raise DimMismatch('Vectorised determinants are only provided for d in (2, 3)')
