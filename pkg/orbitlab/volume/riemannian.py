"""
Riemannian balls {g : d(P(e), P(g1 g g2)) < T} in the symmetric space G/K.

The symmetric space carries the metric induced by an inner product on a, given as a Gram matrix in
s-coordinates. Points of the hyperbolic plane are complex numbers in the upper half plane with P(g) = g^T . i
(the right-space convention; the left space is reached through g -> g^-1).
"""
import logging
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, special

from orbitlab.conf import get_setting
from orbitlab.rootsys.data import RootSystemData
from orbitlab.rootsys.exponents import rescaled_basis, rho
from orbitlab.rootsys.groups import SLn, rotation
from orbitlab.volume.cartan import AsymptoticLaw


LOG = logging.getLogger(__name__)

PLUS = 1
MINUS = -1


class NotInteriorPoint(Exception):
    pass


def _gram(rs: RootSystemData, inner) -> np.ndarray:
    gram = np.eye(rs.rank) if inner is None else np.asarray(inner, dtype=np.float64)
    if gram.shape != (rs.rank, rs.rank) or not np.allclose(gram, gram.T):
        raise ValueError('The inner product must be a symmetric {0}x{0} Gram matrix'.format(rs.rank))
    if np.min(np.linalg.eigvalsh(gram)) <= 0:
        raise ValueError('The inner product must be positive definite')
    return gram


def ymax(rs: RootSystemData, inner=None) -> np.ndarray:
    """
    The unit vector of a maximizing rho, i.e. v_rho / ||v_rho|| with (v_rho, Y) = rho(Y).

    :raises NotInteriorPoint: if the maximizer is not interior to the positive chamber
    """
    gram = _gram(rs, inner)
    covector = np.array(rho(rs), dtype=np.float64)
    v_rho = np.linalg.solve(gram, covector)
    y = v_rho / np.sqrt(v_rho @ gram @ v_rho)

    simple = np.array(rs.simple_roots, dtype=np.float64)
    if np.any(simple @ y <= 0):
        raise NotInteriorPoint('Y_max = {0} is not interior to the positive chamber'.format(list(y)))
    return y


class RiemannianExponents(object):
    """
    lambda(B_T) ~ C T^power e^(delta T).
    """

    def __init__(self, delta: float, power: float):
        self.delta = delta
        self.power = power

    def __repr__(self):
        return 'RiemannianExponents(delta={0!r}, power={1!r})'.format(self.delta, self.power)


def riemannian_exponents(rs: RootSystemData, inner=None) -> RiemannianExponents:
    y = ymax(rs, inner)
    delta = 2 * float(np.array(rho(rs), dtype=np.float64) @ y)
    return RiemannianExponents(delta, (rs.rank - 1) / 2)


def unit_ball_volume(r: int) -> float:
    return float(np.pi ** (r / 2) / special.gamma(r / 2 + 1))


def _disc_sector_integral(rate: float, T: float, lo: float, hi: float) -> float:
    """
    int over angles in [lo, hi] and radii in [0, T] of e^(rate * rho cos theta) rho drho dtheta.
    """
    def radial(theta):
        a = rate * np.cos(theta)
        if abs(a * T) < 1e-8:
            return T ** 2 / 2
        return (np.exp(a * T) * (a * T - 1) + 1) / a ** 2

    value, _ = integrate.quad(radial, lo, hi, epsabs=0, epsrel=1e-10, limit=200)
    return value


def exp_ball_integral(covector: Sequence[float], r: int, T: float, cone: Optional[Tuple[float, float]] = None) -> float:
    """
    int over the Euclidean ball B(0, T) in R^r of e^(lambda(Y)) dY, integrated slice by slice along the
    direction of lambda. ``cone`` (rank 2 only) restricts Y to an interval of polar angles measured from the
    direction of lambda.
    """
    covector = np.asarray(covector, dtype=np.float64)
    if len(covector) != r:
        raise ValueError('The covector must have {0} coordinates'.format(r))
    if T <= 0:
        raise ValueError('The radius must be positive')
    rate = float(np.linalg.norm(covector))

    if cone is not None:
        if r != 2:
            raise ValueError('Cones are supported in rank 2 only')
        return _disc_sector_integral(rate, T, cone[0], cone[1])

    if rate == 0:
        return unit_ball_volume(r) * T ** r
    if r == 1:
        return float(2 * np.sinh(rate * T) / rate)

    slice_volume = unit_ball_volume(r - 1)

    # Distance x from the far end of the ball keeps the integrand bounded by e^(rate T)
    def integrand(x):
        return np.exp(-rate * x) * slice_volume * (x * (2 * T - x)) ** ((r - 1) / 2)

    value, _ = integrate.quad(integrand, 0, 2 * T, epsabs=0, epsrel=1e-10, limit=200)
    return float(np.exp(rate * T) * value)


def _mobius(g, z: complex) -> complex:
    (a, b), (c, d) = g
    return (a * z + b) / (c * z + d)


def point(g) -> complex:
    """
    P(g) = g^T . i in the upper half plane.
    """
    return _mobius(np.asarray(getattr(g, 'entries', g), dtype=np.float64).T, 1j)


def hyperbolic_distance(z: complex, w: complex) -> float:
    return float(2 * np.arcsinh(abs(z - w) / (2 * np.sqrt(z.imag * w.imag))))


def busemann_closed_form(x: complex, direction: int) -> float:
    """
    Busemann functions of the geodesics t -> e^t i (direction +1) and t -> e^-t i (direction -1) of the
    hyperbolic plane, normalised to vanish at i.
    """
    if direction == PLUS:
        return float(-np.log(x.imag))
    return float(np.log(abs(x) ** 2 / x.imag))


def busemann_rank1(x: complex, direction: int, t_max: float = 40.0) -> float:
    """
    d(gamma(t_max), x) - t_max along the geodesic from i in the given direction. The difference to the limit
    is below e^-t_max for points near i; half of the change against t_max / 2 is logged as the tail estimate.
    """
    if direction not in (PLUS, MINUS):
        raise ValueError('The direction of a rank one chamber is +1 or -1')

    def truncated(t):
        return hyperbolic_distance(np.exp(direction * t) * 1j, x) - t

    value = truncated(t_max)
    LOG.debug('Busemann tail estimate %.3g at t_max=%s', abs(value - truncated(t_max / 2)) / 2, t_max)
    return value


def _metric_scale(rs: RootSystemData, inner) -> float:
    """
    Ratio of the symmetric space distance to the curvature -1 hyperbolic distance. P(diag(e^y, e^-y)) = e^(2y) i
    lies at hyperbolic distance 2|y| from i.
    """
    gram = _gram(rs, inner)
    return float(np.sqrt(gram[0, 0]) / 2)


def _compact_nodes(nodes: int):
    angles = 2 * np.pi * np.arange(nodes) / nodes
    return [rotation(theta) for theta in angles]


def riemannian_constant_rank1(g1=None, g2=None, inner=None, nodes: Optional[int] = None) -> float:
    """
    The constant C(g1, g2) of lambda(B_T[g1, g2]) ~ C e^(delta T) for SL(2, R):

        C = 2^-m / (delta ||beta_1||) int_K e^(-delta b(P(g1 k), -Y_max)) dk int_K e^(-delta b(P((k g2)^-1), Y_max)) dk

    with m the number of positive roots counted with multiplicity and b the Busemann function of the
    symmetric space metric.
    """
    gs = SLn(2)
    rs = gs.root_system
    gram = _gram(rs, inner)
    g1 = np.eye(2) if g1 is None else np.asarray(getattr(g1, 'entries', g1), dtype=np.float64)
    g2 = np.eye(2) if g2 is None else np.asarray(getattr(g2, 'entries', g2), dtype=np.float64)

    exponents = riemannian_exponents(rs, gram)
    scale = _metric_scale(rs, gram)
    beta1 = np.array(rescaled_basis(rs)[0], dtype=np.float64)
    beta_length = float(np.sqrt(beta1 @ gram @ beta1))
    root_count = sum(mult for _, mult in rs.positive_roots)

    ks = _compact_nodes(nodes or get_setting('K_NODES'))
    left = np.mean([
        np.exp(-exponents.delta * scale * busemann_closed_form(point(g1 @ k), MINUS)) for k in ks
    ])
    right = np.mean([
        np.exp(-exponents.delta * scale * busemann_closed_form(point(np.linalg.inv(k @ g2)), PLUS)) for k in ks
    ])
    return float(0.5 ** root_count / (exponents.delta * beta_length) * left * right)


def _radial_interval(x1: complex, x2: complex, radius: float):
    """
    The t-interval where d(x2, e^t x1) < radius, from the quadratic
    |x1|^2 u^2 - (2 Re(x2 conj(x1)) + 2 Im x1 Im x2 (cosh radius - 1)) u + |x2|^2 < 0 in u = e^t.
    """
    a = abs(x1) ** 2
    b = 2 * (x2 * np.conj(x1)).real + 2 * x1.imag * x2.imag * (np.cosh(radius) - 1)
    c = abs(x2) ** 2
    discriminant = b * b - 4 * a * c
    if discriminant <= 0 or b <= 0:
        return None
    root = np.sqrt(discriminant)
    hi = (b + root) / (2 * a)
    lo = 2 * c / (b + root)
    return np.log(lo), np.log(hi)


def riemannian_ball_volume(g1=None, g2=None, T: float = 1.0, inner=None, nodes: Optional[int] = None) -> float:
    """
    lambda({g in SL(2, R) : d(P(e), P(g1 g g2)) < T}) in the Cartan normalization, exact in the radial
    coordinate and by trapezoid quadrature over K x K.
    """
    gs = SLn(2)
    rs = gs.root_system
    g1 = np.eye(2) if g1 is None else np.asarray(getattr(g1, 'entries', g1), dtype=np.float64)
    g2 = np.eye(2) if g2 is None else np.asarray(getattr(g2, 'entries', g2), dtype=np.float64)
    radius = T / _metric_scale(rs, inner)

    ks = _compact_nodes(nodes or get_setting('K_NODES'))
    total = 0.0
    for k1 in ks:
        x1 = point(g1 @ k1)
        for k2 in ks:
            # d(P(e), P(g1 k1 a_t k2 g2)) = d(P((k2 g2)^-1), e^t P(g1 k1)) with a_t = exp(t beta_1)
            interval = _radial_interval(x1, point(np.linalg.inv(k2 @ g2)), radius)
            if interval is None:
                continue
            lo, hi = max(interval[0], 0.0), interval[1]
            if hi > lo:
                total += np.cosh(hi) - np.cosh(lo)
    return float(total / len(ks) ** 2)


def riemannian_law(g1=None, g2=None, inner=None, nodes: Optional[int] = None) -> AsymptoticLaw:
    """
    The Riemannian asymptotic law of SL(2, R); the constant is only known in rank one.
    """
    exponents = riemannian_exponents(SLn(2).root_system, inner)
    constant = riemannian_constant_rank1(g1, g2, inner, nodes)
    return AsymptoticLaw.riemannian(constant, exponents.power, exponents.delta)
