"""
Arithmetic lattices SL(d, Z) and DetPM1(d, Z) = {gamma in Mat_d(Z) : det gamma = +-1}, and their covolumes.
"""
import numpy as np

from orbitlab.matgroup.matrices import ExactMatrix


SL = 'SL'
DET_PM1 = 'DetPM1'

# Haar on SL(2, R): mu_delta = delta(det g - 1) dg is 2 pi^2 times the Cartan normalization of the volume engine
HAAR_DELTA_PER_CARTAN = 2 * np.pi ** 2

ZETA_2 = np.pi ** 2 / 6
ZETA_3 = 1.2020569031595942

CARTAN = 'cartan'
DELTA = 'delta'


class UnsupportedLattice(ValueError):
    pass


class LatticeSpec(object):
    """
    SL(d, Z) or DetPM1(d, Z) for d in {2, 3}.
    """

    def __init__(self, family: str = SL, dim: int = 2):
        if family not in (SL, DET_PM1):
            raise UnsupportedLattice('Unknown lattice family {0}'.format(family))
        if dim not in (2, 3):
            raise UnsupportedLattice('Lattices are supported in dimension 2 and 3, got {0}'.format(dim))
        self.family = family
        self.dim = dim

    @property
    def determinants(self):
        return (1,) if self.family == SL else (1, -1)

    def contains(self, gamma) -> bool:
        entries = gamma.entries if isinstance(gamma, ExactMatrix) else gamma
        matrix = ExactMatrix(entries)
        return matrix.dim == self.dim and matrix.det() in self.determinants

    def to_dict(self):
        return {'family': self.family, 'dim': self.dim}

    def __eq__(self, other):
        return isinstance(other, LatticeSpec) and self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash((self.family, self.dim))

    def __repr__(self):
        return 'LatticeSpec({0}, {1})'.format(self.family, self.dim)


def lattice_covolume(spec: LatticeSpec, normalization: str = DELTA) -> float:
    """
    Covolume of the lattice in its ambient group (SL(d, R), or SL+-(d, R) for DetPM1, which has the same
    quotient). ``delta`` is the normalization delta(det g - 1) dg with covolume zeta(2) ... zeta(d); ``cartan``
    is the Cartan normalization of the volume engine, available for d = 2.
    """
    if normalization == DELTA:
        return ZETA_2 if spec.dim == 2 else ZETA_2 * ZETA_3
    if normalization == CARTAN:
        if spec.dim != 2:
            raise UnsupportedLattice('The Cartan covolume is only tabulated for d = 2')
        return ZETA_2 / HAAR_DELTA_PER_CARTAN
    raise ValueError('Unknown normalization {0}'.format(normalization))
