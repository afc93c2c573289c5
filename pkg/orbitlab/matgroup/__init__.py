# flake8: noqa
from .matrices import (
    ExactMatrix, RealMatrix, MatrixOverflow, NonUnimodular, NonFiniteEntries, DimMismatch, mat_mul,
    inverse_unimodular,
)
from .norms import (
    NormSpec, EntrywisePNorm, MaxColumnNorm, SpiralNorm, WeightedEntrywise, InvalidNorm, norm_eval, norm_from_dict,
)
from .distance import DistanceFunction, distance
