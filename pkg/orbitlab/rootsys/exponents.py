"""
Growth exponents of norm balls: rho, the rescaled dual basis, m_1 / m / l, condition G, the diagonal matrix
E_tau, the function xi_hat and the balancedness verdict.
"""
import logging
from enum import Enum
from fractions import Fraction
from typing import List, Optional, Sequence

import numpy as np

from orbitlab.matgroup.matrices import RealMatrix
from orbitlab.rootsys.data import Covector, RootSystemData, pair, pair_float
from orbitlab.rootsys.groups import GroupSpec, SOpq


LOG = logging.getLogger(__name__)


class ConditionGRequired(Exception):
    pass


class BalancedVerdict(Enum):
    BALANCED = 'Balanced'
    NOT_BALANCED = 'NotBalanced'
    UNKNOWN = 'Unknown'


def rho(rs: RootSystemData) -> Covector:
    """
    Half the sum of the positive roots counted with multiplicity.
    """
    total = [Fraction(0)] * rs.rank
    for root, mult in rs.positive_roots:
        total = [t + mult * a for t, a in zip(total, root)]
    return tuple(t / 2 for t in total)


def rescaled_basis(rs: RootSystemData) -> List[Covector]:
    """
    The basis beta_1, ..., beta_r dual to the simple roots, rescaled so that 2 rho(beta_i) = 1. In these
    coordinates 2 rho(t_1 beta_1 + ... + t_r beta_r) = t_1 + ... + t_r.
    """
    two_rho = tuple(2 * value for value in rho(rs))
    basis = [tuple(value / pair(two_rho, dual) for value in dual) for dual in rs.dual_basis]

    for i, alpha in enumerate(rs.simple_roots):
        for j, beta in enumerate(basis):
            assert i == j or pair(alpha, beta) == 0
    assert all(pair(two_rho, beta) == 1 for beta in basis)
    return basis


class GrowthExponents(object):
    """
    Exponents of lambda(H_T) ~ C (log T)^l T^m.

    ``order`` lists the indices of the rescaled basis with the minimizing index first; ``ell`` is None when
    the log exponent is not known.
    """

    def __init__(self, m1: Fraction, m2: Optional[Fraction], ell: Optional[int], condition_g: bool, order):
        self.m1 = m1
        self.m2 = m2
        self.m = 1 / m1
        self.ell = ell
        self.condition_g = condition_g
        self.order = list(order)

    def __repr__(self):
        return 'GrowthExponents(m1={0}, m={1}, ell={2}, condition_g={3})'.format(
            self.m1, self.m, self.ell, self.condition_g
        )


def highest_weight_values(gs: GroupSpec) -> List[Fraction]:
    highest = gs.weight_system.highest
    return [pair(highest, beta) for beta in rescaled_basis(gs.root_system)]


def growth_exponents(gs: GroupSpec) -> GrowthExponents:
    values = highest_weight_values(gs)
    m1 = min(values)
    first = values.index(m1)
    order = [first] + [i for i in range(len(values)) if i != first]

    rest = sorted(values[i] for i in order[1:])
    m2 = rest[0] if rest else None
    condition_g = m2 is None or m2 > m1

    if condition_g and gs.is_irreducible:
        ell = 0
    elif isinstance(gs, SOpq) and gs.p == gs.q:
        ell = 1
    else:
        ell = None

    return GrowthExponents(m1, m2, ell, condition_g, order)


def ordered_basis(gs: GroupSpec) -> List[Covector]:
    """
    The rescaled basis with beta_1 moved to the index attaining m_1.
    """
    basis = rescaled_basis(gs.root_system)
    return [basis[i] for i in growth_exponents(gs).order]


def require_condition_g(gs: GroupSpec) -> GrowthExponents:
    exponents = growth_exponents(gs)
    if not exponents.condition_g:
        raise ConditionGRequired('{0} does not satisfy condition G'.format(gs))
    return exponents


def tau_bar(gs: GroupSpec, tau: Sequence[float]) -> np.ndarray:
    """
    tau_2 beta_2 + ... + tau_r beta_r in s-coordinates.
    """
    basis = np.array(ordered_basis(gs), dtype=np.float64)
    tau = np.asarray(tau, dtype=np.float64)
    if len(tau) != gs.rank - 1:
        raise ValueError('tau must have {0} coordinates'.format(gs.rank - 1))
    if gs.rank == 1:
        return np.zeros(1)
    return tau @ basis[1:]


def leading_weights(gs: GroupSpec) -> List[int]:
    """
    Indices k of the weights with lambda_k(beta_1) = m_1.
    """
    exponents = require_condition_g(gs)
    beta1 = ordered_basis(gs)[0]
    return [k for k, weight in enumerate(gs.weight_system.weights) if pair(weight, beta1) == exponents.m1]


def e_tau_diagonal(gs: GroupSpec, tau: Sequence[float]) -> np.ndarray:
    leading = set(leading_weights(gs))
    y = tau_bar(gs, tau)
    weights = gs.weight_system.weights
    return np.array([
        np.exp(pair_float(weights[k], y)) if k in leading else 0.0 for k in gs.weight_system.assignment
    ])


def e_tau(gs: GroupSpec, tau: Sequence[float]) -> RealMatrix:
    """
    The diagonal matrix carrying e^(lambda_k(tau_bar)) on the basis vectors of the leading weight spaces.

    :raises ConditionGRequired: when condition G fails
    """
    return RealMatrix(np.diag(e_tau_diagonal(gs, tau)))


def xi_hat(gs: GroupSpec, tau: Sequence[float]) -> float:
    """
    (1/2)^(sum of m_alpha off Phi_hat) * prod over Phi_hat of (1/2 - e^(-2 alpha(tau_bar))/2)^m_alpha * e^(sum tau)
    where Phi_hat is the set of positive roots vanishing on beta_1.

    :raises ConditionGRequired: when condition G fails
    """
    require_condition_g(gs)
    beta1 = ordered_basis(gs)[0]
    y = tau_bar(gs, tau)

    value = float(np.exp(np.sum(tau)))
    for root, mult in gs.root_system.positive_roots:
        if pair(root, beta1) == 0:
            value *= (0.5 - 0.5 * np.exp(-2 * pair_float(root, y))) ** mult
        else:
            value *= 0.5 ** mult
    return value


def balanced_verdict(gs: GroupSpec) -> BalancedVerdict:
    """
    Simple groups are balanced, and so is SO(2, 2). A nonsimple group acting irreducibly with condition G is
    not balanced. Everything else is undecided.
    """
    if gs.is_simple or (isinstance(gs, SOpq) and (gs.p, gs.q) == (2, 2)):
        return BalancedVerdict.BALANCED
    if gs.is_irreducible and growth_exponents(gs).condition_g:
        return BalancedVerdict.NOT_BALANCED
    LOG.info('No balancedness verdict available for %s', gs)
    return BalancedVerdict.UNKNOWN
