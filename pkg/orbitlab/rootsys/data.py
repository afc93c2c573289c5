"""
Restricted root data and weight data, stored as exact rational covectors in the s-coordinates of the split
Cartan subalgebra.
"""
from fractions import Fraction
from typing import List, Sequence, Tuple

import numpy as np


Covector = Tuple[Fraction, ...]


class SingularCartanMatrix(Exception):
    pass


class InvalidGroupSpec(ValueError):
    pass


def as_covector(values) -> Covector:
    return tuple(Fraction(value) for value in values)


def pair(covector: Sequence, vector: Sequence):
    """
    Exact pairing of a covector with a vector (both sequences of Fractions or ints).
    """
    return sum((a * b for a, b in zip(covector, vector)), Fraction(0))


def pair_float(covector: Sequence, vector) -> float:
    return float(np.dot(np.array(covector, dtype=np.float64), np.asarray(vector, dtype=np.float64)))


def rational_inverse(matrix: Sequence[Sequence]) -> List[List[Fraction]]:
    """
    Gauss-Jordan inverse over the rationals.

    :raises SingularCartanMatrix: when the matrix is singular
    """
    n = len(matrix)
    work = [[Fraction(value) for value in row] + [Fraction(int(i == j)) for j in range(n)]
            for i, row in enumerate(matrix)]
    for col in range(n):
        pivot = next((row for row in range(col, n) if work[row][col] != 0), None)
        if pivot is None:
            raise SingularCartanMatrix('Simple roots are linearly dependent')
        work[col], work[pivot] = work[pivot], work[col]
        scale = work[col][col]
        work[col] = [value / scale for value in work[col]]
        for row in range(n):
            if row != col and work[row][col] != 0:
                factor = work[row][col]
                work[row] = [a - factor * b for a, b in zip(work[row], work[col])]
    return [row[n:] for row in work]


class RootSystemData(object):
    """
    The positive restricted roots with their multiplicities and the simple roots among them.

    :param rank: dim a
    :param positive_roots: list of (covector, multiplicity) pairs
    :param simple_roots: list of ``rank`` covectors, each one of the positive roots
    """

    def __init__(self, rank: int, positive_roots, simple_roots):
        self.rank = rank
        self.positive_roots = [(as_covector(root), int(mult)) for root, mult in positive_roots]
        self.simple_roots = [as_covector(root) for root in simple_roots]

        if len(self.simple_roots) != rank:
            raise InvalidGroupSpec('Need exactly {0} simple roots'.format(rank))
        if any(len(root) != rank for root, _ in self.positive_roots):
            raise InvalidGroupSpec('Every root must be a covector on R^{0}'.format(rank))
        if any(mult < 1 for _, mult in self.positive_roots):
            raise InvalidGroupSpec('Root multiplicities must be positive integers')

        # Columns of the inverse of the simple-root matrix form the dual basis
        inverse = rational_inverse(self.simple_roots)
        self.dual_basis = [tuple(inverse[i][j] for i in range(rank)) for j in range(rank)]

        for root, _ in self.positive_roots:
            coefficients = [pair(root, dual) for dual in self.dual_basis]
            if any(c < 0 or c.denominator != 1 for c in coefficients):
                raise InvalidGroupSpec('{0} is not a nonnegative integer combination of simple roots'.format(root))

    def in_chamber(self, y, tol: float = 0.0) -> bool:
        return all(pair_float(alpha, y) >= -tol for alpha in self.simple_roots)

    def __repr__(self):
        return 'RootSystemData(rank={0}, roots={1})'.format(self.rank, len(self.positive_roots))


class WeightSystem(object):
    """
    Weights of a representation together with the basis vectors they act on.

    :param weights: distinct covectors lambda_1, ..., lambda_s (lambda_1 is the highest)
    :param assignment: for each basis index j, the index k of the weight space containing E_j
    """

    def __init__(self, weights, assignment, highest_index: int = 0):
        self.weights = [as_covector(weight) for weight in weights]
        self.assignment = [int(k) for k in assignment]
        self.highest_index = highest_index

        if any(k < 0 or k >= len(self.weights) for k in self.assignment):
            raise InvalidGroupSpec('Weight assignment refers to a missing weight')
        if sorted(set(self.assignment)) != list(range(len(self.weights))):
            raise InvalidGroupSpec('Every weight must occur in the assignment')

    @property
    def dim(self) -> int:
        return len(self.assignment)

    @property
    def highest(self) -> Covector:
        return self.weights[self.highest_index]

    @property
    def multiplicities(self) -> List[int]:
        return [self.assignment.count(k) for k in range(len(self.weights))]

    def basis_weights(self) -> List[Covector]:
        """
        The weight of each basis vector, in basis order.
        """
        return [self.weights[k] for k in self.assignment]

    def weight_matrix(self) -> np.ndarray:
        """
        (d, r) float array whose row j is the weight of E_j.
        """
        return np.array(self.basis_weights(), dtype=np.float64)

    def dominance_violation(self, samples: np.ndarray) -> float:
        """
        max over the samples and weights of lambda_j(Y) - lambda_1(Y); nonpositive when lambda_1 dominates.
        """
        values = samples @ self.weight_matrix().T
        highest = samples @ np.array(self.highest, dtype=np.float64)
        return float((values - highest[:, None]).max())
