# flake8: noqa
from .data import RootSystemData, WeightSystem, SingularCartanMatrix, InvalidGroupSpec
from .groups import GroupSpec, SLn, SOpq, SL2xSL2Tensor, group_from_dict
from .exponents import (
    BalancedVerdict, ConditionGRequired, GrowthExponents, rho, rescaled_basis, growth_exponents, e_tau, xi_hat,
    balanced_verdict,
)
