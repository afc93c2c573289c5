"""
Haar volumes of norm balls and skew balls through the Cartan decomposition

    lambda(H_T[g1, g2]) = int_K int_K int_{a+} 1{||Psi(g1 k1 exp(Y) k2 g2)|| < T} xi(Y) dY dk1 dk2

with dY Lebesgue measure in the rescaled coordinates t (Y = t_1 beta_1 + ... + t_r beta_r, beta_1 first) and
dk the probability Haar measure. For each (k1, k2) the indicator integral is reduced to intervals in t_1,
which are found by dense sampling followed by root refinement, and xi is integrated in closed form along them.
"""
import itertools
import logging
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from scipy import integrate, optimize

from orbitlab.conf import get_setting
from orbitlab.matgroup.matrices import RealMatrix
from orbitlab.matgroup.norms import NormSpec
from orbitlab.parallel import parallel_map
from orbitlab.rootsys.exponents import (
    e_tau_diagonal, growth_exponents, ordered_basis, require_condition_g, xi_hat,
)
from orbitlab.rootsys.groups import GroupSpec
from orbitlab.volume.cartan import AsymptoticLaw, ExponentialPolynomial, MonteCarlo, Quadrature, VolumeEstimate


LOG = logging.getLogger(__name__)

MAX_REFINEMENTS = 60
MAX_GRID_POINTS = 2 ** 16


class UnsupportedCompactGroup(Exception):
    pass


class SkewBallSpec(object):
    """
    H_T[g1, g2] = {h in H : D(g1 h g2) < T}. ``g1`` and ``g2`` are group elements (matrices of size
    group.group_dim) and default to the identity.
    """

    def __init__(self, group: GroupSpec, norm: NormSpec, T: float, g1=None, g2=None):
        identity = np.eye(group.group_dim)
        self.group = group
        self.norm = norm
        self.T = float(T)
        self.g1 = RealMatrix(identity if g1 is None else getattr(g1, 'entries', g1))
        self.g2 = RealMatrix(identity if g2 is None else getattr(g2, 'entries', g2))

        for g in (self.g1, self.g2):
            if g.dim != group.group_dim:
                raise ValueError('Translates must be {0}x{0} matrices'.format(group.group_dim))
            if abs(np.linalg.det(g.entries)) < 1e-300:
                raise ValueError('Translates must be invertible')
        if norm.dim != group.dim:
            raise ValueError('Norm acts on {0}x{0} matrices but the representation has dimension {1}'.format(
                norm.dim, group.dim
            ))

    def with_threshold(self, T: float) -> 'SkewBallSpec':
        return SkewBallSpec(self.group, self.norm, T, self.g1, self.g2)


class SectorIntegrator(object):
    """
    Integrates xi over {t >= 0 : ||L Psi(exp(Y(t))) R|| < T} for fixed matrices L and R. The optional ``caps``
    of the integration methods bound each t-coordinate (ordered basis) from above, for volume fractions.
    """

    def __init__(self, gs: GroupSpec, norm: NormSpec, rel_tol: float = 1e-8, grid_density: int = 8):
        self.gs = gs
        self.norm = norm
        self.rel_tol = rel_tol
        self.grid_density = grid_density

        self.basis = np.array(ordered_basis(gs), dtype=np.float64)
        self.weights = gs.weight_system.weight_matrix()
        self.highest_rates = self.basis @ np.array(gs.weight_system.highest, dtype=np.float64)
        self.xi = ExponentialPolynomial.from_root_system(gs.root_system)

    def norms(self, left, right, ys) -> np.ndarray:
        diagonal = np.exp(np.atleast_2d(ys) @ self.weights.T)
        return self.norm.evaluate(np.einsum('ij,nj,jk->nik', left, diagonal, right))

    def log_radius(self, left, right, T) -> float:
        """
        Lambda with lambda_1(Y) < Lambda on the whole region, since
        ||L D R|| >= c ||L D R||_F >= c s_min(L) s_min(R) e^lambda_1(Y).
        """
        singular = np.linalg.svd(left, compute_uv=False)[-1] * np.linalg.svd(right, compute_uv=False)[-1]
        return np.log(T / (self.norm.frobenius_constant() * singular))

    def slope_bounds(self, left, right, offset, t0, t1) -> np.ndarray:
        """
        Upper bounds for |d/dt ||L Psi(exp(offset + t beta_1)) R||| on each cell [t0, t1]. The norm is absolute
        and monotone, so the derivative is dominated by the norm of |L| diag(|r_j| max e_j) |R| where r_j are the
        weight rates along beta_1 and e_j the diagonal entries at the cell ends.
        """
        rates = np.abs(self.weights @ self.basis[0])
        beta1 = self.basis[0]
        ends = [np.exp((offset[None, :] + t[:, None] * beta1[None, :]) @ self.weights.T) for t in (t0, t1)]
        peak = rates[None, :] * np.maximum(*ends)
        return self.norm.evaluate(np.einsum('ij,nj,jk->nik', np.abs(left), peak, np.abs(right)))

    def sign_grid(self, left, right, T, offset, t_max):
        """
        Samples t in [0, t_max] finely enough that every sign change of ||...|| - T falls between neighbours.
        A cell keeps being bisected while its slope bound allows the excess to cross zero and come back.
        """
        beta1 = self.basis[0]

        def excess_at(ts):
            return self.norms(left, right, offset[None, :] + ts[:, None] * beta1[None, :]) - T

        grid = np.linspace(0, t_max, max(64, int(self.grid_density * t_max) + 1))
        excess = excess_at(grid)
        min_width = 1e-8 * max(1.0, t_max)

        for _ in range(MAX_REFINEMENTS):
            t0, t1 = grid[:-1], grid[1:]
            same = (excess[:-1] < 0) == (excess[1:] < 0)
            widths = t1 - t0
            cells = np.nonzero(same & (widths > min_width))[0]
            if len(cells):
                reach = self.slope_bounds(left, right, offset, t0[cells], t1[cells]) * widths[cells]
                cells = cells[reach >= np.abs(excess[cells]) + np.abs(excess[cells + 1])]
            if not len(cells):
                break
            if len(grid) + len(cells) > MAX_GRID_POINTS:
                LOG.debug('Stopped refining the sign grid at %d points', len(grid))
                break
            middles = (t0[cells] + t1[cells]) / 2
            grid = np.insert(grid, cells + 1, middles)
            excess = np.insert(excess, cells + 1, excess_at(middles))
        return grid, excess

    def inside_intervals(self, left, right, T, offset, t_max):
        """
        Maximal intervals of t in [0, t_max] with ||L Psi(exp(offset + t beta_1)) R|| < T.
        """
        if t_max <= 0:
            return []
        beta1 = self.basis[0]
        grid, excess = self.sign_grid(left, right, T, offset, t_max)

        def boundary(t):
            return self.norms(left, right, offset + t * beta1)[0] - T

        intervals = []
        start = 0.0 if excess[0] < 0 else None
        for i in range(1, len(grid)):
            if (excess[i - 1] < 0) == (excess[i] < 0):
                continue
            crossing = optimize.brentq(boundary, grid[i - 1], grid[i], xtol=1e-13)
            if excess[i] < 0:
                start = crossing
            else:
                intervals.append((start, crossing))
                start = None
        if start is not None:
            intervals.append((start, t_max))
        return intervals

    def line_integral(self, left, right, T, tau, caps=None) -> float:
        """
        Integral of xi along t_1 with the remaining coordinates fixed at ``tau``.
        """
        tau = np.asarray(tau, dtype=np.float64)
        log_radius = self.log_radius(left, right, T)
        t_max = (log_radius - tau @ self.highest_rates[1:]) / self.highest_rates[0]
        if caps is not None:
            t_max = min(t_max, caps[0])

        offset = tau @ self.basis[1:] if len(tau) else np.zeros(self.gs.rank)
        beta1 = self.basis[0]
        return sum(
            self.xi.integrate_segment(beta1, offset, lo, hi)
            for lo, hi in self.inside_intervals(left, right, T, offset, t_max)
        )

    def tau_limits(self, left, right, T, caps=None) -> np.ndarray:
        limits = self.log_radius(left, right, T) / self.highest_rates[1:]
        if caps is not None:
            limits = np.minimum(limits, caps[1:])
        return np.maximum(limits, 0.0)

    def integrate(self, left, right, T, caps=None, mc: Optional[MonteCarlo] = None, stratum: int = 0) -> float:
        if T <= 1:
            return 0.0
        rank = self.gs.rank
        if rank == 1:
            return self.line_integral(left, right, T, [], caps)

        limits = self.tau_limits(left, right, T, caps)
        if np.any(limits <= 0):
            return 0.0

        if rank == 2:
            value, _ = integrate.quad(
                lambda t2: self.line_integral(left, right, T, [t2], caps),
                0, limits[0], epsrel=self.rel_tol, epsabs=0, limit=200,
            )
            return value

        # Higher rank: Monte Carlo over the box of remaining coordinates
        mc = mc or MonteCarlo()
        rng = mc.stream(stratum)
        samples = rng.uniform(size=(mc.samples, rank - 1)) * limits
        box = float(np.prod(limits))
        return box * float(np.mean([self.line_integral(left, right, T, tau, caps) for tau in samples]))


def chamber_sector_volume(gs: GroupSpec, norm: NormSpec, T: float, method=None, caps=None) -> VolumeEstimate:
    """
    int over a+(T) = {Y in a+ : ||Psi(exp Y)|| < T} of xi(Y) dY. Deterministic for rank <= 2, stratified
    Monte Carlo over the transverse coordinates for higher rank.
    """
    integrator = SectorIntegrator(gs, norm, rel_tol=getattr(method, 'rel_tol', 1e-8))
    identity = np.eye(gs.dim)

    if gs.rank <= 2:
        return VolumeEstimate(integrator.integrate(identity, identity, T, caps), 0.0, method or Quadrature())

    mc = method if isinstance(method, MonteCarlo) else MonteCarlo()
    values = parallel_map(
        lambda stratum: integrator.integrate(identity, identity, T, caps, MonteCarlo(
            mc.samples // mc.strata or 1, mc.seed, mc.strata
        ), stratum),
        range(mc.strata),
    )
    return VolumeEstimate.from_samples(values, mc)


def _compact_nodes(gs: GroupSpec, method):
    """
    Returns (pairs of K parameters, weights) for the K x K integral.
    """
    if gs.compact is None:
        raise UnsupportedCompactGroup('{0} has no maximal compact parametrization; use chamber sectors'.format(gs))

    if isinstance(method, MonteCarlo):
        pairs = []
        for stratum, size in enumerate(method.stratum_sizes()):
            rng = method.stream(stratum)
            pairs.extend(zip(gs.sample_compact(rng, size), gs.sample_compact(rng, size)))
        return pairs, None

    try:
        params, weights = gs.compact_grid(method.nodes)
    except NotImplementedError:
        raise UnsupportedCompactGroup('No quadrature grid on {0}; use Monte Carlo'.format(gs.compact))
    pairs = list(itertools.product(params, repeat=2))
    return pairs, np.outer(weights, weights).ravel()


def haar_volume(spec: SkewBallSpec, method=None) -> VolumeEstimate:
    """
    lambda(H_T[g1, g2]) for a group with a parametrized maximal compact subgroup.

    :raises UnsupportedCompactGroup: for families without a K parametrization
    """
    gs = spec.group
    method = method or Quadrature(get_setting('K_NODES'))
    if spec.T <= 1:
        return VolumeEstimate(0.0, 0.0, method)

    pairs, weights = _compact_nodes(gs, method)
    integrator = SectorIntegrator(gs, spec.norm, rel_tol=getattr(method, 'rel_tol', 1e-8))
    psi_g1 = gs.represent(spec.g1.entries)
    psi_g2 = gs.represent(spec.g2.entries)

    def node_volume(pair):
        k1, k2 = pair
        left = psi_g1 @ gs.compact_image(k1)
        right = gs.compact_image(k2) @ psi_g2
        return integrator.integrate(left, right, spec.T)

    values = np.array(parallel_map(node_volume, pairs))
    LOG.debug('Integrated %s over %d compact nodes at T=%s', gs, len(pairs), spec.T)

    if weights is None:
        return VolumeEstimate.from_samples(values, method)
    return VolumeEstimate(float(values @ weights), 0.0, method)


def _truncation(gs: GroupSpec, norm: NormSpec, tol: float) -> float:
    """
    Box size M for the transverse integral: the integrand is bounded by A exp(-kappa * sum tau) with
    kappa = m m_2 - 1, so the mass outside [0, M]^(r-1) is at most (r-1) A e^(-kappa M) / kappa^(r-1).
    """
    exponents = growth_exponents(gs)
    kappa = float(exponents.m * exponents.m2 - 1)
    beta1 = ordered_basis(gs)[0]
    off_hat = sum(mult for root, mult in gs.root_system.positive_roots if sum(a * b for a, b in zip(root, beta1)))
    amplitude = 0.5 ** off_hat * norm.entry_constant() ** -float(exponents.m)
    rank = gs.rank
    bound = np.log((rank - 1) * amplitude / (kappa ** (rank - 1) * tol)) / kappa
    return max(1.0, float(bound))


def _transverse_integral(fn, gs: GroupSpec, norm: NormSpec, tol: float) -> float:
    rank = gs.rank
    if rank == 1:
        return fn([])
    box = _truncation(gs, norm, tol)
    LOG.info('Truncating the transverse integral for %s at M=%.3f', gs, box)
    if rank == 2:
        value, _ = integrate.quad(lambda t: fn([t]), 0, box, epsabs=tol / 10, epsrel=1e-10, limit=200)
        return value
    value, _ = integrate.nquad(
        lambda *tau: fn(list(tau)), [[0, box]] * (rank - 1), opts={'epsabs': tol / 10, 'epsrel': 1e-8}
    )
    return value


def asymptotic_constant_D(gs: GroupSpec, norm: NormSpec, tol: Optional[float] = None) -> float:
    """
    D = int over tau >= 0 of xi_hat(tau) / ||E_tau||^m, the constant of chamber_sector_volume ~ D T^m.

    :raises ConditionGRequired: when condition G fails
    """
    exponents = require_condition_g(gs)
    tol = tol or get_setting('CONSTANT_TOLERANCE')
    m = float(exponents.m)

    def integrand(tau):
        return xi_hat(gs, tau) / norm.evaluate(np.diag(e_tau_diagonal(gs, tau))) ** m

    return _transverse_integral(integrand, gs, norm, tol)


def asymptotic_constant_C(gs: GroupSpec, norm: NormSpec, tol: Optional[float] = None, method=None,
                          g1=None, g2=None) -> float:
    """
    C = int_K int_K int xi_hat(tau) / ||Psi(g1 k1) E_tau Psi(k2 g2)||^m dtau dk1 dk2, the constant of
    lambda(H_T[g1, g2]) ~ C T^m.

    :raises ConditionGRequired: when condition G fails
    :raises UnsupportedCompactGroup: for families without a K parametrization
    """
    exponents = require_condition_g(gs)
    tol = tol or get_setting('CONSTANT_TOLERANCE')
    method = method or Quadrature(get_setting('K_NODES'))
    m = float(exponents.m)
    identity = np.eye(gs.group_dim)
    psi_g1 = gs.represent(identity if g1 is None else getattr(g1, 'entries', g1))
    psi_g2 = gs.represent(identity if g2 is None else getattr(g2, 'entries', g2))

    pairs, weights = _compact_nodes(gs, method)

    def node_constant(pair):
        left = psi_g1 @ gs.compact_image(pair[0])
        right = gs.compact_image(pair[1]) @ psi_g2

        def integrand(tau):
            return xi_hat(gs, tau) / norm.evaluate(left @ np.diag(e_tau_diagonal(gs, tau)) @ right) ** m

        return _transverse_integral(integrand, gs, norm, tol)

    values = np.array(parallel_map(node_constant, pairs))
    if weights is None:
        return float(values.mean())
    return float(values @ weights)


def volume_sweep(gs: GroupSpec, norm: NormSpec, thresholds: Sequence[float], method=None) -> pd.DataFrame:
    """
    Chamber-sector volumes over a schedule, as a frame with columns T, value, stderr, method.
    """
    rows = []
    for T in thresholds:
        estimate = chamber_sector_volume(gs, norm, T, method)
        rows.append({'T': float(T), 'value': estimate.value, 'stderr': estimate.stderr,
                     'method': estimate.method.name})
    return pd.DataFrame(rows, columns=['T', 'value', 'stderr', 'method'])


def loglog_slope(thresholds: Sequence[float], values: Sequence[float]) -> float:
    """
    Least-squares slope of log(value) against log(T).
    """
    slope, _ = np.polyfit(np.log(np.asarray(thresholds, dtype=float)), np.log(np.asarray(values, dtype=float)), 1)
    return float(slope)


def matrix_norm_law(gs: GroupSpec, norm: NormSpec, tol: Optional[float] = None, method=None) -> AsymptoticLaw:
    """
    lambda(H_T) ~ C (log T)^ell T^m. The constant is left unknown when condition G fails or K has no
    parametrization.
    """
    exponents = growth_exponents(gs)
    constant = None
    if exponents.condition_g and gs.compact is not None:
        try:
            constant = asymptotic_constant_C(gs, norm, tol, method)
        except UnsupportedCompactGroup:
            LOG.info('No constant for %s without a compact quadrature; pass a Monte Carlo method', gs)
    return AsymptoticLaw.matrix_norm(constant, exponents.m, exponents.ell)
