"""Dense, element-by-element reference implementation of one semi-implicit step.

Written independently of solid_dewetting.fem and solid_dewetting.wetting: the surface energy and
the surrogate coefficients are spelled out here, gradients come from inverting the affine map of
each simplex, and the block system is solved with numpy.linalg.solve.
"""
import math

import numpy as np


def surface_energy(h, sigma, eps):
    """gamma(h)."""
    return 1.0 + (1.0 - sigma) * (math.exp(-h / eps) - 2.0 * math.exp(-h / (2.0 * eps)))


def surface_energy_slope(h, sigma, eps):
    """gamma'(h)."""
    return (1.0 - sigma) / eps * (math.exp(-h / (2.0 * eps)) - math.exp(-h / eps))


def surface_energy_curvature(h, sigma, eps):
    """gamma''(h)."""
    return (1.0 - sigma) / eps**2 * (math.exp(-h / eps) - 0.5 * math.exp(-h / (2.0 * eps)))


def surrogate_coefficients(sigma, eps, h_bar):
    """c1, c2 from f(h) = gamma'(h)/h: c2 = f'(h_bar), c1 = f(h_bar) - h_bar f'(h_bar)."""
    slope = surface_energy_slope(h_bar, sigma, eps)
    curvature = surface_energy_curvature(h_bar, sigma, eps)
    f = slope / h_bar
    f_prime = (curvature * h_bar - slope) / h_bar**2
    return f - h_bar * f_prime, f_prime


def _wetting(h_e, sigma, eps, h_bar):
    """(implicit coefficient, explicit offset) of the linearized wetting term."""
    if h_e <= h_bar:
        c1, c2 = surrogate_coefficients(sigma, eps, h_bar)
        return c1 + c2 * h_e, 0.0
    return 0.0, surface_energy_slope(h_e, sigma, eps)


def _simplex_gradients(vertices):
    """Rows are the gradients of the barycentric hats of a simplex given by its vertex rows."""
    k = len(vertices)
    affine = np.hstack([np.ones((k, 1)), vertices])
    return np.linalg.inv(affine)[1:].T


def _local_blocks(vertices, h_local, sigma, eps, h_bar, weak_form, surface):
    """Local matrices (transport, mass, curvature) and load vector of one simplex."""
    k, dim = vertices.shape
    grads = _simplex_gradients(vertices)
    if dim == 1:
        size = abs(vertices[1, 0] - vertices[0, 0])
    else:
        e1, e2 = vertices[1] - vertices[0], vertices[2] - vertices[0]
        size = 0.5 * abs(e1[0] * e2[1] - e1[1] * e2[0])
    grad_h = grads.T @ h_local
    q = math.sqrt(1.0 + float(grad_h @ grad_h))
    h_e = float(np.mean(h_local))
    stiffness = size * grads @ grads.T
    if surface:
        projected = grads @ grad_h
        transport = q * (stiffness - size * np.outer(projected, projected) / q**2)
    else:
        transport = stiffness / q
    mass = size * (np.ones((k, k)) + np.eye(k)) / (k * (k + 1))
    weight = q if weak_form == "consistent" else 1.0 / q
    coeff, offset = _wetting(h_e, sigma, eps, h_bar)
    curvature = surface_energy(h_e, sigma, eps) / q * stiffness + coeff * weight * mass
    load = offset * weight * size / k * np.ones(k)
    return transport, mass, curvature, load


def dense_step(points, elements, h_old, sigma, eps, h_bar, tau, weak_form="paper", surface=False):
    """One step on a simplex mesh; returns (h_new, mu_new)."""
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    n = len(points)
    transport = np.zeros((n, n))
    mass = np.zeros((n, n))
    curvature = np.zeros((n, n))
    load = np.zeros(n)
    for element in elements:
        element = list(element)
        t_loc, m_loc, c_loc, r_loc = _local_blocks(
            points[element], h_old[element], sigma, eps, h_bar, weak_form, surface
        )
        index = np.ix_(element, element)
        transport[index] += t_loc
        mass[index] += m_loc
        curvature[index] += c_loc
        load[element] += r_loc
    system = np.block([[mass / tau, transport], [-curvature, mass]])
    rhs = np.concatenate([mass @ h_old / tau, load])
    solution = np.linalg.solve(system, rhs)
    return solution[:n], solution[n:]


def dense_energy(points, elements, h, sigma, eps):
    """sum over simplices of gamma(h_e) Q_e |e|."""
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    total = 0.0
    for element in elements:
        element = list(element)
        vertices = points[element]
        grads = _simplex_gradients(vertices)
        grad_h = grads.T @ h[element]
        if vertices.shape[1] == 1:
            size = abs(vertices[1, 0] - vertices[0, 0])
        else:
            e1, e2 = vertices[1] - vertices[0], vertices[2] - vertices[0]
            size = 0.5 * abs(e1[0] * e2[1] - e1[1] * e2[0])
        total += surface_energy(float(np.mean(h[element])), sigma, eps) * math.sqrt(1.0 + grad_h @ grad_h) * size
    return total
