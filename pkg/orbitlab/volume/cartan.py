"""
Cartan-coordinate building blocks: the density xi, its expansion as an exponential polynomial, integration
methods and volume estimates.
"""
from collections import defaultdict
from fractions import Fraction
from typing import Dict, Sequence, Tuple

import numpy as np

from orbitlab.rootsys.data import RootSystemData, pair_float


class OutsideChamber(ValueError):
    pass


class Quadrature(object):
    """
    Deterministic integration. ``nodes`` is the number of angle nodes per SO(2) factor of K.
    """
    name = 'quadrature'

    def __init__(self, nodes: int = 32, rel_tol: float = 1e-8):
        self.nodes = nodes
        self.rel_tol = rel_tol

    def to_dict(self):
        return {'method': self.name, 'nodes': self.nodes, 'rel_tol': self.rel_tol}


class MonteCarlo(object):
    """
    Monte Carlo over K x K with ``samples`` draws split into ``strata`` independently seeded streams.
    """
    name = 'mc'

    def __init__(self, samples: int = 256, seed: int = 0, strata: int = 16):
        self.samples = samples
        self.seed = seed
        self.strata = strata

    def stream(self, stratum: int):
        """
        Counter-based substream: the generator depends on (seed, stratum) only.
        """
        return np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=(stratum,)))

    def stratum_sizes(self):
        base, extra = divmod(self.samples, self.strata)
        return [base + int(i < extra) for i in range(self.strata)]

    def to_dict(self):
        return {'method': self.name, 'samples': self.samples, 'seed': self.seed, 'strata': self.strata}


class VolumeEstimate(object):
    """
    A volume with its standard error (0 for deterministic quadrature) and the method that produced it.
    """

    def __init__(self, value: float, stderr: float = 0.0, method=None):
        if not np.isfinite(value) or value < 0:
            raise ValueError('Volume must be finite and nonnegative, got {0}'.format(value))
        self.value = float(value)
        self.stderr = float(stderr)
        self.method = method or Quadrature()

    @classmethod
    def from_samples(cls, samples: np.ndarray, method: MonteCarlo) -> 'VolumeEstimate':
        samples = np.asarray(samples, dtype=np.float64)
        stderr = samples.std(ddof=1) / np.sqrt(len(samples)) if len(samples) > 1 else 0.0
        return cls(samples.mean(), stderr, method)

    def to_dict(self):
        return {'value': self.value, 'stderr': self.stderr, **self.method.to_dict()}

    def __repr__(self):
        return 'VolumeEstimate({0!r} +- {1!r}, {2})'.format(self.value, self.stderr, self.method.name)


class ExponentialPolynomial(object):
    """
    A finite sum  sum_k c_k exp(mu_k(Y))  with rational exponent covectors mu_k.
    """

    def __init__(self, terms: Dict[Tuple[Fraction, ...], float]):
        self.terms = {mu: c for mu, c in terms.items() if c != 0}

    @classmethod
    def from_root_system(cls, rs: RootSystemData) -> 'ExponentialPolynomial':
        """
        Expands prod over positive roots of sinh(alpha(Y))^m_alpha, with sinh(x) = (e^x - e^-x) / 2.
        """
        terms = {tuple(Fraction(0) for _ in range(rs.rank)): 1.0}
        for root, mult in rs.positive_roots:
            for _ in range(mult):
                expanded = defaultdict(float)
                for mu, c in terms.items():
                    expanded[tuple(a + b for a, b in zip(mu, root))] += c / 2
                    expanded[tuple(a - b for a, b in zip(mu, root))] -= c / 2
                terms = dict(expanded)
        return cls(terms)

    def evaluate(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=np.float64)
        exponents = np.array(list(self.terms), dtype=np.float64)
        coefficients = np.array(list(self.terms.values()))
        return np.exp(y @ exponents.T) @ coefficients

    def integrate_segment(self, direction: Sequence, offset, lo: float, hi: float) -> float:
        """
        Integral of the expansion over t in [lo, hi] along Y = offset + t * direction.
        """
        offset = np.asarray(offset, dtype=np.float64)
        total = 0.0
        for mu, c in self.terms.items():
            slope = pair_float(mu, direction)
            base = c * np.exp(pair_float(mu, offset))
            if abs(slope) < 1e-13:
                total += base * (hi - lo)
            else:
                total += base * np.exp(slope * lo) * np.expm1(slope * (hi - lo)) / slope
        return total


def xi(rs: RootSystemData, y) -> float:
    """
    prod over positive roots of sinh(alpha(Y))^m_alpha for Y in the closed chamber.

    :raises OutsideChamber: when some simple root is negative on Y
    """
    if not rs.in_chamber(y, tol=1e-12):
        raise OutsideChamber('{0} is outside the positive chamber'.format(list(y)))
    value = 1.0
    for root, mult in rs.positive_roots:
        value *= np.sinh(max(0.0, pair_float(root, y))) ** mult
    return float(value)


class AsymptoticLaw(object):
    """
    Either lambda ~ C (log T)^ell T^m for matrix norm balls, or lambda ~ C T^power e^(delta T) for Riemannian
    balls. ``constant`` is None when it is not known.
    """
    MATRIX_NORM = 'MatrixNorm'
    RIEMANNIAN = 'Riemannian'

    def __init__(self, kind, constant=None, m=None, ell=None, power=None, delta=None):
        self.kind = kind
        self.constant = constant
        self.m = m
        self.ell = ell
        self.power = power
        self.delta = delta

    @classmethod
    def matrix_norm(cls, constant, m, ell) -> 'AsymptoticLaw':
        if m <= 0 or (constant is not None and constant <= 0):
            raise ValueError('A matrix norm law needs C > 0 and m > 0')
        return cls(cls.MATRIX_NORM, constant, m=m, ell=ell)

    @classmethod
    def riemannian(cls, constant, power, delta) -> 'AsymptoticLaw':
        if delta <= 0 or (constant is not None and constant <= 0):
            raise ValueError('A Riemannian law needs C > 0 and delta > 0')
        return cls(cls.RIEMANNIAN, constant, power=power, delta=delta)

    def evaluate(self, T: float) -> float:
        """
        The predicted volume at T.
        """
        if self.constant is None:
            raise ValueError('The constant of {0!r} is unknown'.format(self))
        if self.kind == self.MATRIX_NORM:
            return self.constant * np.log(T) ** (self.ell or 0) * T ** float(self.m)
        return self.constant * T ** self.power * np.exp(self.delta * T)

    def to_dict(self):
        return {
            'kind': self.kind, 'constant': self.constant, 'm': None if self.m is None else float(self.m),
            'ell': self.ell, 'power': self.power, 'delta': self.delta,
        }

    def __repr__(self):
        return 'AsymptoticLaw({0})'.format(self.to_dict())
