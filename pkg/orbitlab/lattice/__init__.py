# flake8: noqa
from .spec import DET_PM1, HAAR_DELTA_PER_CARTAN, SL, LatticeSpec, UnsupportedLattice, lattice_covolume
from .enumeration import BallEnumeration, BudgetExceeded, brute_force_ball, enumerate_ball, gamma_count
from .observables import (
    AnnulusBump, AnnulusIndicator, BoxIndicator, EmptyRegion, Observable, SmoothBump, TrigCharacter, WholeSpace,
    observable_from_dict,
)
from .orbits import (
    INVERSE_LEFT_TORUS, RIGHT_LINEAR, ActionMismatch, TorusPoint, count_in_set, orbit_sum, weyl_sum,
)
from .modular import CELL_PROPORTIONS, modular_cell, reduce_to_fundamental_domain
from .frames import GramBox, enumerate_frames, frame_region_volume
