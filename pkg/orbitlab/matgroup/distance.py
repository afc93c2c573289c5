import numpy as np

from orbitlab.matgroup.matrices import RealMatrix, ExactMatrix
from orbitlab.matgroup.norms import NormSpec


IDENTITY = 'identity'


class DistanceFunction(object):
    """
    D(g) = max{1, ||Psi(g)||}. The representation Psi is either the identity tag or any object with a
    ``represent(g)`` method returning the image matrix (a GroupSpec, for instance).
    """

    def __init__(self, norm: NormSpec, representation=IDENTITY):
        self.norm = norm
        self.representation = representation

    def represent(self, g):
        if isinstance(g, (RealMatrix, ExactMatrix)):
            g = g.entries
        if self.representation == IDENTITY:
            return np.asarray(g, dtype=np.float64)
        return self.representation.represent(g)

    def __call__(self, g):
        return distance(self, g)

    def evaluate_many(self, stack) -> np.ndarray:
        """
        D on a stack of group elements (identity representation only).
        """
        return np.maximum(1.0, self.norm.evaluate(np.asarray(stack, dtype=np.float64)))

    def __repr__(self):
        return 'DistanceFunction({0!r}, {1!r})'.format(self.norm, self.representation)


def distance(dist: DistanceFunction, g) -> float:
    return max(1.0, dist.norm.evaluate(dist.represent(g)))
