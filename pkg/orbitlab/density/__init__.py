# flake8: noqa
from .densities import (
    ChartFailure, DensityField, InvarianceReport, ZeroVector, alpha_closed_form, alpha_invariance_check,
    ledrappier_density, numeric_alpha, section, unipotent,
)
from .integrals import (
    SupportEscapesDomain, UnsupportedGroup, g_orbit_integral, ledrappier_prediction, nu_integral,
    orbit_integral_by_duality, plain_unipotent_volume,
)
from .reports import EquidistReport, LengthMismatch, equidist_compare
