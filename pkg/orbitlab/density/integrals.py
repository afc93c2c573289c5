"""
Integrals against the orbit density on the plane and G-orbit integrals S~(T) = int_{G_T} phi(v g) dm(g) over
the norm ball of SL(2, R) in the Cartan normalization of the volume engine.
"""
import logging
from typing import Optional

import numpy as np
from scipy import integrate

from orbitlab.conf import get_setting
from orbitlab.density.densities import DensityField, ZeroVector, plane_vector, section, unipotent_volume_fn
from orbitlab.lattice.observables import Observable
from orbitlab.lattice.spec import HAAR_DELTA_PER_CARTAN, SL, LatticeSpec, lattice_covolume
from orbitlab.matgroup.norms import NormSpec
from orbitlab.parallel import parallel_map
from orbitlab.rootsys.groups import SLn, rotation
from orbitlab.volume.cartan import MonteCarlo, VolumeEstimate
from orbitlab.volume.engine import SectorIntegrator


LOG = logging.getLogger(__name__)


class SupportEscapesDomain(ValueError):
    pass


class UnsupportedGroup(Exception):
    pass


def _quad(fn, lo, hi, points=None) -> float:
    points = sorted(p for p in (points or ()) if lo < p < hi)
    value, _ = integrate.quad(
        fn, lo, hi, points=points or None, epsrel=get_setting('QUADRATURE_REL_TOL'), epsabs=1e-14,
        limit=2 ** get_setting('QUADRATURE_MAX_DEPTH'),
    )
    return value


def support_radius(phi: Observable, domain=None) -> Optional[float]:
    """
    Euclidean radius of a ball around the origin containing the support of phi, or None for empty support.

    :raises SupportEscapesDomain: for unbounded support or support outside ``domain``
    """
    box = phi.support_box()
    if box is None:
        raise SupportEscapesDomain('{0} is not compactly supported'.format(phi))
    lo, hi = box
    if np.any(lo > hi):
        return None
    if domain is not None and (np.any(lo < domain[0]) or np.any(hi > domain[1])):
        raise SupportEscapesDomain('The support of {0} leaves the domain {1}'.format(phi, domain))
    return float(np.sqrt(np.sum(np.maximum(np.abs(lo), np.abs(hi)) ** 2)))


def _corner_angles(phi: Observable):
    lo, hi = phi.support_box()
    corners = np.array([[x, y] for x in (lo[0], hi[0]) for y in (lo[1], hi[1])])
    return list(np.mod(np.arctan2(corners[:, 1], corners[:, 0]), 2 * np.pi))


def _polar_integral(phi: Observable, radius: float, angular, radial_weight=None) -> float:
    """
    int_0^2pi angular(omega) int_0^radius phi(r omega) radial_weight(r omega) dr dtheta.
    """
    def ray(theta):
        omega = np.array([np.cos(theta), np.sin(theta)])

        def fn(r):
            value = float(phi(r * omega)[0])
            if radial_weight is None or value == 0:
                return value
            return value * radial_weight(r * omega)

        inner = _quad(fn, 0.0, radius, phi.ray_breaks(omega))
        return angular(omega) * inner if inner else 0.0

    return _quad(ray, 0.0, 2 * np.pi, _corner_angles(phi))


def nu_integral(phi: Observable, field: DensityField) -> float:
    """
    int phi(w) alpha_v(w) dw over the plane. The density is homogeneous of degree -1, so in polar coordinates the
    radial Jacobian cancels and the integral becomes int alpha_v(omega) int phi(r omega) dr dtheta.

    :raises SupportEscapesDomain: if phi is not compactly supported inside the field's domain
    """
    if phi.complex_valued or phi.dim != 2:
        raise ValueError('nu_integral takes real test functions on the plane, got {0}'.format(phi))
    radius = support_radius(phi, field.domain)
    if radius is None:
        return 0.0
    value = _polar_integral(phi, radius, field)
    LOG.info('nu integral of %r against the %s density: %.10g', phi, field.kind, value)
    return value


def orbit_integral_by_duality(phi: Observable, v, norm: NormSpec, T: float) -> float:
    """
    S~(T) through the fibration G -> H \\ G:

        S~(T) = int phi(w) lambda(H_T[sigma(v)^-1, sigma(w)]) dw / (2 pi^2)

    where dw dt is the delta-normalized Haar measure and 2 pi^2 converts it to the Cartan normalization.
    """
    v = plane_vector(v, 'v')
    if not v.any():
        raise ZeroVector('The orbit basepoint must be nonzero')
    radius = support_radius(phi)
    if radius is None or T <= 1:
        return 0.0
    inverse = np.linalg.inv(section(v))
    volume = unipotent_volume_fn(norm)

    def fiber(w):
        r = np.linalg.norm(w)
        return volume(inverse, section(w), T) * r if r > 0 else 0.0

    value = _polar_integral(phi, radius, lambda omega: 1.0, fiber) / HAAR_DELTA_PER_CARTAN
    LOG.info('Orbit integral by duality at T=%s: %.10g', T, value)
    return value


def plain_unipotent_volume(norm: NormSpec, T: float) -> float:
    """
    lambda(H_T) for the lower unipotent subgroup.
    """
    identity = np.eye(2)
    return unipotent_volume_fn(norm)(identity, identity, T)


def ledrappier_prediction(phi: Observable, v, norm: NormSpec, T: float,
                          field: Optional[DensityField] = None) -> float:
    """
    c_Gamma lambda(H_T) int phi alpha_v with c_Gamma = 6 / pi^2, the predicted orbit sum over SL(2, Z)_T.
    """
    field = field or DensityField(v, norm, 'general')
    return plain_unipotent_volume(norm, T) * nu_integral(phi, field) / lattice_covolume(LatticeSpec(SL, 2))


class _OrbitRay(object):
    """
    The t-integral of phi(v k1 a_t k2) xi(t) along one Cartan ray, restricted to G_T.
    """

    def __init__(self, phi: Observable, v, norm: NormSpec, T: float, radius: float):
        self.phi = phi
        self.v = v
        self.T = T
        self.radius = radius
        self.integrator = SectorIntegrator(SLn(2), norm)
        self.beta = self.integrator.basis[0]
        self.rates = self.integrator.weights @ self.beta
        self.grow = int(np.argmax(self.rates))
        self.rate = float(self.rates[self.grow])
        self.zero = np.zeros(self.integrator.gs.rank)
        identity = np.eye(2)
        self.t_max = self.integrator.log_radius(identity, identity, T) / self.integrator.highest_rates[0]

    def support_window(self, coords):
        """
        The t-range with |v k1 a_t|_2 <= radius. With u = e^(2 rate t) the squared length is a u + b / u.
        """
        a, b = coords[self.grow] ** 2, coords[1 - self.grow] ** 2
        r2 = self.radius ** 2
        if a == 0:
            return (np.log(b / r2) / (2 * self.rate) if b > 0 else -np.inf), np.inf
        discriminant = r2 ** 2 - 4 * a * b
        if discriminant < 0:
            return None
        root = np.sqrt(discriminant)
        u_lo = 2 * b / (r2 + root)
        u_hi = (r2 + root) / (2 * a)
        return (np.log(u_lo) / (2 * self.rate) if u_lo > 0 else -np.inf), np.log(u_hi) / (2 * self.rate)

    def critical_angles(self):
        """
        Angles of k1 where the growing coordinate of v k1 vanishes and the window runs to the edge of G_T.
        """
        base = np.arctan2(self.v[1], self.v[0]) + np.pi / 2 - self.grow * np.pi / 2
        return list(np.mod([base, base + np.pi], 2 * np.pi))

    def __call__(self, theta1: float, k2: np.ndarray) -> float:
        k1 = rotation(theta1)
        coords = self.v @ k1
        window = self.support_window(coords)
        if window is None:
            return 0.0
        lo, hi = max(window[0], 0.0), min(window[1], self.t_max)
        if lo >= hi:
            return 0.0

        def integrand(t):
            w = (coords * np.exp(self.rates * t)) @ k2
            return float(self.phi(w)[0]) * float(self.integrator.xi.evaluate(t * self.beta))

        total = 0.0
        for start, end in self.integrator.inside_intervals(k1, k2, self.T, self.zero, self.t_max):
            start, end = max(start, lo), min(end, hi)
            if start < end:
                total += _quad(integrand, start, end)
        return total


def g_orbit_integral(phi: Observable, v, norm: NormSpec, T: float, mc: Optional[MonteCarlo] = None,
                     gs=None) -> VolumeEstimate:
    """
    S~(T) = int_{G_T} phi(v g) dm(g) for G = SL(2, R) with the Cartan measure dk1 xi(t) dt dk2 of the volume
    engine. k2 is sampled by Monte Carlo; the k1 angle and t are integrated adaptively, with breakpoints where
    the orbit ray leaves along the boundary of G_T.

    :raises UnsupportedGroup: for groups other than SL(2, R)
    :raises ValueError: if the integral comes out negative, which only a signed phi can cause
    """
    gs = gs or SLn(2)
    if gs != SLn(2):
        raise UnsupportedGroup('G-orbit integrals are implemented for SL(2, R) only, got {0}'.format(gs))
    v = plane_vector(v, 'v')
    if not v.any():
        raise ZeroVector('The orbit basepoint must be nonzero')
    mc = mc or MonteCarlo(samples=32, seed=get_setting('DEFAULT_SEED'), strata=8)
    radius = support_radius(phi)
    if radius is None or T <= 1:
        return VolumeEstimate(0.0, 0.0, mc)

    ray = _OrbitRay(phi, v, norm, T, radius)
    breaks = ray.critical_angles()

    def sample_value(angle):
        k2 = rotation(angle)
        return _quad(lambda theta1: ray(theta1, k2), 0.0, 2 * np.pi, breaks) / (2 * np.pi)

    def stratum_values(stratum):
        angles = gs.sample_compact(mc.stream(stratum), mc.stratum_sizes()[stratum])[:, 0]
        LOG.debug('Orbit integral stratum %d with %d samples', stratum, len(angles))
        return [sample_value(angle) for angle in angles]

    values = np.concatenate(parallel_map(stratum_values, range(mc.strata)))
    estimate = VolumeEstimate.from_samples(values, mc)
    LOG.info('G-orbit integral at T=%s: %r', T, estimate)
    return estimate
