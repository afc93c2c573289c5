# flake8: noqa
from .cartan import AsymptoticLaw, ExponentialPolynomial, MonteCarlo, OutsideChamber, Quadrature, VolumeEstimate, xi
from .engine import (
    SkewBallSpec, UnsupportedCompactGroup, asymptotic_constant_C, asymptotic_constant_D, chamber_sector_volume,
    haar_volume, loglog_slope, matrix_norm_law, volume_sweep,
)
from .skew import (
    DegenerateDirection, LimitRatio, NonMonotoneProfile, limit_ratio_alpha, spiral_h_volume, spiral_skew_volume,
    unipotent_skewball_volume,
)
from .riemannian import (
    NotInteriorPoint, busemann_rank1, exp_ball_integral, riemannian_ball_volume, riemannian_constant_rank1,
    riemannian_exponents, ymax,
)
