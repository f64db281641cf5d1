"""Uniform interval meshes and structured triangulations of rectangles.

Both mesh types expose the same simplex view used by assembly: ``points`` (N, dim),
``elements`` (E, dim+1), ``measures`` (E,) and ``basis_gradients`` (E, dim+1, dim) of the P1 hats.
"""
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Literal, Optional, Tuple

import numpy as np

from .exceptions import MeshError


logger = logging.getLogger(__name__)

# barycentric gradients of the reference triangle (0,0), (1,0), (0,1)
_REFERENCE_GRADIENTS = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])


@dataclass(frozen=True)
class IntervalMesh:
    """Uniform partition of [a, b] into n_cells cells."""

    a: float
    b: float
    n_cells: int

    dim = 1

    def __post_init__(self):
        if not self.b > self.a:
            raise MeshError(f"interval mesh requires a < b, got [{self.a}, {self.b}]")
        if self.n_cells < 1:
            raise MeshError(f"interval mesh requires n_cells >= 1, got {self.n_cells}")

    @property
    def dx(self) -> float:
        return (self.b - self.a) / self.n_cells

    @property
    def n_nodes(self) -> int:
        return self.n_cells + 1

    @cached_property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.a, self.b, self.n_cells + 1)

    @property
    def points(self) -> np.ndarray:
        return self.nodes[:, None]

    @cached_property
    def elements(self) -> np.ndarray:
        left = np.arange(self.n_cells)
        return np.stack([left, left + 1], axis=1)

    @cached_property
    def measures(self) -> np.ndarray:
        return np.full(self.n_cells, self.dx)

    @cached_property
    def basis_gradients(self) -> np.ndarray:
        grads = np.empty((self.n_cells, 2, 1))
        grads[:, 0, 0] = -1.0 / self.dx
        grads[:, 1, 0] = 1.0 / self.dx
        return grads

    @cached_property
    def boundary(self) -> np.ndarray:
        flags = np.zeros(self.n_nodes, dtype=bool)
        flags[[0, -1]] = True
        return flags


@dataclass(frozen=True, eq=False)
class TriMesh:
    """Triangulation with counterclockwise triangles.

    ``shape`` and ``bounds`` are set for structured rectangle meshes (see build_rect_tri_mesh) and
    are used for point location when sampling cross-sections.
    """

    points: np.ndarray
    triangles: np.ndarray
    boundary: np.ndarray
    shape: Optional[Tuple[int, int]] = None
    bounds: Optional[Tuple[float, float, float, float]] = None
    pattern: str = field(default="forward")

    dim = 2

    def __post_init__(self):
        points = np.ascontiguousarray(self.points, dtype=float)
        triangles = np.ascontiguousarray(self.triangles, dtype=np.int64)
        if points.ndim != 2 or points.shape[1] != 2 or triangles.ndim != 2 or triangles.shape[1] != 3:
            raise MeshError("TriMesh expects points (N, 2) and triangles (E, 3)")
        if triangles.size and (triangles.min() < 0 or triangles.max() >= len(points)):
            raise MeshError("triangle connectivity references unknown nodes")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "triangles", triangles)
        object.__setattr__(self, "boundary", np.asarray(self.boundary, dtype=bool))
        if np.any(self.signed_areas <= 0.0):
            raise MeshError("every triangle must have positive signed area (counterclockwise)")

    @property
    def n_nodes(self) -> int:
        return len(self.points)

    @property
    def elements(self) -> np.ndarray:
        return self.triangles

    @cached_property
    def signed_areas(self) -> np.ndarray:
        p0, p1, p2 = (self.points[self.triangles[:, k]] for k in range(3))
        e1, e2 = p1 - p0, p2 - p0
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    @property
    def measures(self) -> np.ndarray:
        return self.signed_areas

    @cached_property
    def basis_gradients(self) -> np.ndarray:
        p0 = self.points[self.triangles[:, 0]]
        jac = np.stack([self.points[self.triangles[:, 1]] - p0, self.points[self.triangles[:, 2]] - p0], axis=2)
        # row gradients: grad(phi_k) = grad_ref(phi_k) @ J^-1
        return _REFERENCE_GRADIENTS @ np.linalg.inv(jac)

    @cached_property
    def edges(self) -> np.ndarray:
        """Unique undirected edges (n_edges, 2), smaller index first."""
        tri = self.triangles
        pairs = np.concatenate([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]])
        pairs.sort(axis=1)
        return np.unique(pairs, axis=0)


def build_interval_mesh(a: float, b: float, n_cells: int) -> IntervalMesh:
    """Uniform mesh of [a, b]."""
    return IntervalMesh(float(a), float(b), int(n_cells))


def interval_mesh_with_spacing(a: float, b: float, dx: float) -> IntervalMesh:
    """Uniform mesh of [a, b] with spacing closest to (and not above) dx."""
    if not dx > 0:
        raise MeshError(f"dx must be positive, got {dx}")
    return build_interval_mesh(a, b, max(1, math.ceil((b - a) / dx - 1e-9)))


def extend_interval_mesh(mesh: IntervalMesh, units: float) -> IntervalMesh:
    """Append whole cells beyond b covering at least ``units`` of length; a and dx are kept."""
    if not units > 0:
        raise MeshError(f"extension length must be positive, got {units}")
    added = math.ceil(units / mesh.dx - 1e-9)
    n_cells = mesh.n_cells + added
    logger.debug("Extending [%g, %g] by %d cells", mesh.a, mesh.b, added)
    return IntervalMesh(mesh.a, mesh.a + n_cells * mesh.dx, n_cells)


def build_rect_tri_mesh(
    a: float, b: float, c: float, d: float, nx: int, ny: int, pattern: Literal["forward", "union-jack"] = "forward"
) -> TriMesh:
    """Structured triangulation of [a,b]x[c,d] with (nx+1)(ny+1) nodes and 2*nx*ny triangles.

    Node (i, j) has index j*(nx+1) + i. With ``pattern="forward"`` every cell is split along its
    lower-left to upper-right diagonal; ``"union-jack"`` alternates the diagonal with the parity of
    i + j, which makes the mesh mirror-symmetric in x and y when nx and ny are even.
    """
    if not (b > a and d > c):
        raise MeshError(f"degenerate rectangle [{a}, {b}]x[{c}, {d}]")
    if nx < 1 or ny < 1:
        raise MeshError(f"need nx, ny >= 1, got {nx}, {ny}")
    if pattern not in ("forward", "union-jack"):
        raise MeshError(f"unknown diagonal pattern {pattern!r}")
    xs = np.linspace(a, b, nx + 1)
    ys = np.linspace(c, d, ny + 1)
    gx, gy = np.meshgrid(xs, ys)
    points = np.column_stack([gx.ravel(), gy.ravel()])

    i, j = np.meshgrid(np.arange(nx), np.arange(ny))
    i, j = i.ravel(), j.ravel()
    ll = j * (nx + 1) + i
    lr, ul = ll + 1, ll + nx + 1
    ur = ul + 1
    forward = np.ones_like(ll, dtype=bool) if pattern == "forward" else (i + j) % 2 == 0
    first = np.where(forward[:, None], np.column_stack([ll, lr, ur]), np.column_stack([ll, lr, ul]))
    second = np.where(forward[:, None], np.column_stack([ll, ur, ul]), np.column_stack([lr, ur, ul]))
    triangles = np.empty((2 * len(ll), 3), dtype=np.int64)
    triangles[0::2] = first
    triangles[1::2] = second

    boundary = (gx.ravel() == a) | (gx.ravel() == b) | (gy.ravel() == c) | (gy.ravel() == d)
    return TriMesh(points, triangles, boundary, shape=(nx, ny), bounds=(a, b, c, d), pattern=pattern)


def tri_mesh_with_spacing(a: float, b: float, c: float, d: float, dx: float, pattern="forward") -> TriMesh:
    """Structured triangulation with cell sizes closest to (and not above) dx in both directions."""
    if not dx > 0:
        raise MeshError(f"dx must be positive, got {dx}")
    nx = max(1, math.ceil((b - a) / dx - 1e-9))
    ny = max(1, math.ceil((d - c) / dx - 1e-9))
    return build_rect_tri_mesh(a, b, c, d, nx, ny, pattern=pattern)
