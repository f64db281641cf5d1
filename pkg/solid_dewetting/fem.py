"""P1 finite element assembly on interval and triangle meshes.

Coefficients are element-wise constants; thickness-dependent ones are evaluated from the P1
interpolant at the element midpoint (1D) or centroid (2D). Assembled matrices are CSR, exactly
symmetric, and carry no explicit zeros.
"""
import logging
from typing import Optional, Union

import numpy as np
from scipy import sparse

from .exceptions import MeshError
from .mesh import IntervalMesh, TriMesh


logger = logging.getLogger(__name__)

Mesh = Union[IntervalMesh, TriMesh]
SparseSystem = sparse.csr_matrix


def _element_weights(mesh: Mesh, weight) -> np.ndarray:
    n_elements = len(mesh.elements)
    if weight is None:
        return np.ones(n_elements)
    values = np.broadcast_to(np.asarray(weight, dtype=float), (n_elements,))
    if np.isnan(values).any():
        raise MeshError("NaN element weight")
    if not np.isfinite(values).all():
        raise MeshError("non-finite element weight")
    return values


def _nodal(mesh: Mesh, f, name="field") -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.shape != (mesh.n_nodes,):
        raise MeshError(f"{name} has shape {f.shape}, expected ({mesh.n_nodes},)")
    if np.isnan(f).any():
        raise MeshError(f"NaN in {name}")
    return f


def _finalize(mesh: Mesh, local: np.ndarray) -> SparseSystem:
    """Scatter (E, k, k) local matrices into a symmetric CSR matrix."""
    elements = mesh.elements
    k = elements.shape[1]
    rows = np.repeat(elements, k, axis=1).ravel()
    cols = np.tile(elements, (1, k)).ravel()
    n = mesh.n_nodes
    matrix = sparse.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    matrix = (0.5 * (matrix + matrix.T)).tocsr()
    matrix.eliminate_zeros()
    matrix.sort_indices()
    return matrix


def element_values(mesh: Mesh, f) -> np.ndarray:
    """P1 interpolant at element midpoints/centroids."""
    return np.asarray(f, dtype=float)[mesh.elements].mean(axis=1)


def element_gradients(mesh: Mesh, f) -> np.ndarray:
    """Element-wise constant gradient (E, dim) of the P1 interpolant."""
    f_local = np.asarray(f, dtype=float)[mesh.elements]
    return np.einsum("ekd,ek->ed", mesh.basis_gradients, f_local)


def element_q(mesh: Mesh, h) -> np.ndarray:
    """Q = sqrt(1 + |grad h|^2) per element."""
    grad = element_gradients(mesh, h)
    return np.sqrt(1.0 + np.einsum("ed,ed->e", grad, grad))


def assemble_mass(mesh: Mesh, weight=None, lumped: bool = False) -> SparseSystem:
    """M_ij = sum_e w_e int_e phi_i phi_j, consistent or row-sum lumped."""
    w = _element_weights(mesh, weight) * mesh.measures
    k = mesh.elements.shape[1]
    if lumped:
        local = np.einsum("e,ij->eij", w / k, np.eye(k))
    else:
        # exact simplex quadrature: |e| (1 + delta_ij) / ((d+1)(d+2))
        ref = (np.ones((k, k)) + np.eye(k)) / (k * (k + 1))
        local = np.einsum("e,ij->eij", w, ref)
    return _finalize(mesh, local)


def assemble_weighted_stiffness(mesh: Mesh, weight=None) -> SparseSystem:
    """K_ij = sum_e w_e int_e grad phi_i . grad phi_j."""
    w = _element_weights(mesh, weight) * mesh.measures
    grads = mesh.basis_gradients
    local = np.einsum("e,eid,ejd->eij", w, grads, grads)
    return _finalize(mesh, local)


def assemble_surface_stiffness(mesh: Mesh, h) -> SparseSystem:
    """Graph-surface stiffness at the height field h.

    S_ij = sum_e Q_e |e| [grad phi_i . grad phi_j - (grad h . grad phi_i)(grad h . grad phi_j) / Q_e^2].
    On an interval mesh this reduces to the stiffness weighted by 1/Q.
    """
    h = _nodal(mesh, h, "h")
    grads = mesh.basis_gradients
    grad_h = element_gradients(mesh, h)
    q = np.sqrt(1.0 + np.einsum("ed,ed->e", grad_h, grad_h))
    projected = np.einsum("eid,ed->ei", grads, grad_h)
    local = np.einsum("eid,ejd->eij", grads, grads)
    local -= np.einsum("ei,ej->eij", projected, projected) / (q * q)[:, None, None]
    local *= (q * mesh.measures)[:, None, None]
    return _finalize(mesh, local)


def assemble_load(mesh: Mesh, weight=None) -> np.ndarray:
    """Load vector b_i = sum_e w_e int_e phi_i."""
    w = _element_weights(mesh, weight) * mesh.measures
    elements = mesh.elements
    k = elements.shape[1]
    return np.bincount(elements.ravel(), weights=np.repeat(w / k, k), minlength=mesh.n_nodes)


def nodal_weights(mesh: Mesh) -> np.ndarray:
    """int phi_i for every node; integrate_field is their dot product with f."""
    return assemble_load(mesh)


def integrate_field(mesh: Mesh, f) -> float:
    """Exact integral of the P1 interpolant of the nodal field f."""
    f = np.asarray(f, dtype=float)
    return float(np.dot(element_values(mesh, f), mesh.measures))


def restricted_integral(mesh: Mesh, f, nodes: Optional[np.ndarray] = None) -> float:
    """Integral of f against the hats of the selected nodes only.

    Summing over a partition of the nodes reproduces integrate_field exactly (up to rounding).
    """
    contributions = nodal_weights(mesh) * np.asarray(f, dtype=float)
    if nodes is None:
        return float(contributions.sum())
    return float(contributions[nodes].sum())
