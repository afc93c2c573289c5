"""
The modular surface SL(2, Z) \\ H: reduction to the standard fundamental domain
{|Re z| <= 1/2, |z| >= 1} and a six-cell partition of it with closed-form hyperbolic areas.
"""
import numpy as np


BAND_CUTS = (1.2, 2.2)
DOMAIN_AREA = np.pi / 3

# Hyperbolic areas of the cells, the left half first; each band is split evenly by Re z = 0
_BAND_AREAS = np.array([
    DOMAIN_AREA - 1 / BAND_CUTS[0],
    1 / BAND_CUTS[0] - 1 / BAND_CUTS[1],
    1 / BAND_CUTS[1],
]) / 2
CELL_AREAS = np.concatenate([_BAND_AREAS, _BAND_AREAS])
CELL_PROPORTIONS = CELL_AREAS / DOMAIN_AREA
CELL_COUNT = len(CELL_AREAS)


def reduce_to_fundamental_domain(z, max_steps: int = 10000):
    """
    Moves each point of the upper half plane into the standard fundamental domain with z -> z + n and
    z -> -1/z. Accepts a complex scalar or array.
    """
    z = np.array(z, dtype=np.complex128)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    if np.any(z.imag <= 0):
        raise ValueError('Points must lie in the upper half plane')

    for _ in range(max_steps):
        z = z - np.round(z.real)
        inside = np.abs(z) < 1 - 1e-15
        if not inside.any():
            break
        z[inside] = -1 / z[inside]
    else:
        raise ArithmeticError('Reduction did not terminate in {0} steps'.format(max_steps))

    real = np.where(np.abs(z.real) < 1e-12, 0.0, z.real)
    z = real + 1j * z.imag
    return complex(z[0]) if scalar else z


def modular_cell(z) -> np.ndarray:
    """
    Cell index in 0..5 of reduced points: 0-2 for Re z < 0 and 3-5 for Re z >= 0, bands cut at the heights
    in BAND_CUTS.
    """
    z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    band = np.searchsorted(BAND_CUTS, z.imag, side='right')
    return band + 3 * (z.real >= 0)


def mobius_stack(stack: np.ndarray, z) -> np.ndarray:
    """
    g . z for every matrix g of the stack.
    """
    stack = np.asarray(stack, dtype=np.float64)
    a, b, c, d = stack[:, 0, 0], stack[:, 0, 1], stack[:, 1, 0], stack[:, 1, 1]
    return (a * z + b) / (c * z + d)


def translate_points(elements: np.ndarray, g0) -> np.ndarray:
    """
    Points g0^-1 lambda . i of the modular surface for each lambda, the image of lambda^-1 g0 SL(2, Z) under
    g SL(2, Z) -> SL(2, Z) g^-1 . i.
    """
    inverse = np.linalg.inv(np.asarray(getattr(g0, 'entries', g0), dtype=np.float64))
    z = mobius_stack(elements, 1j)
    a, b, c, d = inverse.ravel()
    return (a * z + b) / (c * z + d)


def cell_histogram(points) -> np.ndarray:
    reduced = reduce_to_fundamental_domain(np.atleast_1d(points))
    return np.bincount(modular_cell(reduced), minlength=CELL_COUNT)
