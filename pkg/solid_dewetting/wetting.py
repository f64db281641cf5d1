"""Thickness-dependent surface energy, its derivatives and the quadratic surrogate near the substrate.

All functions accept scalars or numpy arrays and are vectorized elementwise. The closed forms are
entire in h, so negative thicknesses evaluate without error; callers decide whether that is physical.
"""
from typing import NamedTuple, Tuple

import numpy as np

from .models import WettingParams


class ZetaCoeffs(NamedTuple):
    """Coefficients of zeta(h) = c1*h + c2*h**2."""

    c1: float
    c2: float


def _exponentials(h, p: WettingParams):
    h = np.asarray(h, dtype=float)
    return np.exp(-h / p.epsilon), np.exp(-h / (2.0 * p.epsilon))


def gamma(h, p: WettingParams):
    """Surface energy density 1 + (1-sigma)(exp(-h/eps) - 2 exp(-h/2eps))."""
    e1, e2 = _exponentials(h, p)
    return 1.0 + (1.0 - p.sigma) * (e1 - 2.0 * e2)


def wetting_potential(h, p: WettingParams):
    """omega(h) = gamma(h) - 1; equals sigma - 1 < 0 on the bare substrate."""
    return gamma(h, p) - 1.0


def gamma_prime(h, p: WettingParams):
    """First derivative of gamma in h."""
    e1, e2 = _exponentials(h, p)
    return (1.0 - p.sigma) / p.epsilon * (e2 - e1)


def gamma_second(h, p: WettingParams):
    """Second derivative of gamma in h."""
    e1, e2 = _exponentials(h, p)
    return (1.0 - p.sigma) / p.epsilon**2 * (e1 - 0.5 * e2)


def zeta_coeffs(p: WettingParams) -> ZetaCoeffs:
    """Closed-form c1, c2 matching zeta and zeta' to gamma' and gamma'' at h_bar.

    With f(h) = gamma'(h)/h: c1 = f(h_bar) - h_bar f'(h_bar), c2 = f'(h_bar).
    """
    hb, eps = p.h_bar, p.epsilon
    e1, e2 = np.exp(-hb / eps), np.exp(-hb / (2.0 * eps))
    pref = (1.0 - p.sigma) / eps
    c1 = pref * (2.0 * (e2 - e1) / hb - (e1 - 0.5 * e2) / eps)
    c2 = pref * ((e1 - 0.5 * e2) / (eps * hb) + (e1 - e2) / hb**2)
    return ZetaCoeffs(float(c1), float(c2))


def zeta(h, p: WettingParams):
    """Quadratic surrogate of gamma' below h_bar."""
    c1, c2 = zeta_coeffs(p)
    h = np.asarray(h, dtype=float)
    return c1 * h + c2 * h * h


def gamma_prime_modified(h, p: WettingParams):
    """zeta(h) for h <= h_bar, gamma'(h) above; C1 across h_bar."""
    h = np.asarray(h, dtype=float)
    return np.where(h <= p.h_bar, zeta(h, p), gamma_prime(h, p))


def gamma_prime_semi_implicit(h_old, p: WettingParams) -> Tuple[np.ndarray, np.ndarray]:
    """Linearization of the modified gamma' around the previous thickness.

    Returns ``(coeff, offset)`` so that the wetting term at the new level is
    ``coeff * h_new + offset``: implicit ``(c1 + c2 h_old) h_new`` where h_old <= h_bar,
    explicit ``gamma'(h_old)`` elsewhere.
    """
    h_old = np.asarray(h_old, dtype=float)
    c1, c2 = zeta_coeffs(p)
    below = h_old <= p.h_bar
    coeff = np.where(below, c1 + c2 * h_old, 0.0)
    offset = np.where(below, 0.0, gamma_prime(h_old, p))
    return coeff, offset
