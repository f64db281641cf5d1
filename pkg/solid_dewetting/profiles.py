"""Initial film profiles: stepped islands, semi-infinite films, flat films and 3D island shapes."""
import logging
from typing import Tuple, Union

import numpy as np

from .exceptions import MeshError
from .mesh import IntervalMesh, TriMesh
from .models import ProfileSpec


logger = logging.getLogger(__name__)

SHAPE_MARGIN = 5.0


def logistic_step(x, x1: float, x2: float, width: float = 1.0):
    """1/(exp(-(x-x1)/w)+1) + 1/(exp((x-x2)/w)+1) - 1: about 1 on (x1, x2), 0 outside, 1/2 at the ends."""
    if not x2 > x1:
        raise MeshError(f"stepped profile requires x1 < x2, got ({x1}, {x2})")
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore"):
        return 1.0 / (np.exp(-(x - x1) / width) + 1.0) + 1.0 / (np.exp((x - x2) / width) + 1.0) - 1.0


def _x_coordinates(mesh: Union[IntervalMesh, TriMesh]) -> np.ndarray:
    return mesh.nodes if isinstance(mesh, IntervalMesh) else mesh.points[:, 0]


def stepped_profile(spec: ProfileSpec, mesh: Union[IntervalMesh, TriMesh]) -> np.ndarray:
    """Stepped island (or semi-infinite film) sampled at the nodes.

    On a TriMesh the profile depends on x only (extruded in y).
    """
    if spec.kind not in ("stepped", "semi-infinite"):
        raise MeshError(f"stepped_profile cannot build a {spec.kind!r} profile")
    _check_margin(spec, mesh)
    return logistic_step(_x_coordinates(mesh), spec.x1, spec.x2_effective, spec.edge_width)


def flat_profile(c: float, mesh: Union[IntervalMesh, TriMesh]) -> np.ndarray:
    """Constant film of thickness c."""
    if c < 0:
        raise MeshError(f"flat film thickness must be >= 0, got {c}")
    return np.full(mesh.n_nodes, float(c))


def _cuboid(x, y, xlim: Tuple[float, float], ylim: Tuple[float, float], width: float) -> np.ndarray:
    return logistic_step(x, *xlim, width) * logistic_step(y, *ylim, width)


def _centered(center: float, extent: float) -> Tuple[float, float]:
    return (center - extent / 2.0, center + extent / 2.0)


def island_3d(spec: ProfileSpec, mesh: TriMesh) -> np.ndarray:
    """Cuboid, square, square-ring or cross island of unit height, clipped below at the floor.

    A ring is the outer cuboid field minus the inner one. A cross is the pointwise maximum of a
    central cube and four limbs; each limb runs from the cross centre outwards so neighbouring
    constituents overlap instead of meeting at their half-height edges.
    """
    if not isinstance(mesh, TriMesh):
        raise MeshError("3D islands need a TriMesh")
    if not spec.is_3d:
        raise MeshError(f"island_3d cannot build a {spec.kind!r} profile")
    _check_margin(spec, mesh)
    x, y = mesh.points[:, 0], mesh.points[:, 1]
    cx, cy = spec.center
    width = spec.edge_width

    if spec.kind in ("cuboid", "square"):
        field = _cuboid(x, y, _centered(cx, spec.widths[0]), _centered(cy, spec.widths[1]), width)
    elif spec.kind == "square-ring":
        wx, wy = spec.widths
        ix, iy = spec.inner_widths
        if not (ix < wx and iy < wy):
            raise MeshError("inner ring cuboid must lie strictly inside the outer cuboid")
        outer = _cuboid(x, y, _centered(cx, wx), _centered(cy, wy), width)
        inner = _cuboid(x, y, _centered(cx, ix), _centered(cy, iy), width)
        field = outer - inner
    else:
        half, reach = spec.limb_width / 2.0, spec.limb_width / 2.0 + spec.limb_length
        band_x, band_y = (cx - half, cx + half), (cy - half, cy + half)
        parts = [
            _cuboid(x, y, band_x, band_y, width),
            _cuboid(x, y, (cx, cx + reach), band_y, width),
            _cuboid(x, y, (cx - reach, cx), band_y, width),
            _cuboid(x, y, band_x, (cy, cy + reach), width),
            _cuboid(x, y, band_x, (cy - reach, cy), width),
        ]
        field = np.max(parts, axis=0)
    return np.maximum(field, spec.floor_thickness)


def build_profile(spec: ProfileSpec, mesh: Union[IntervalMesh, TriMesh]) -> np.ndarray:
    """Dispatch on the profile kind."""
    if spec.kind == "flat":
        return flat_profile(spec.level, mesh)
    if spec.is_3d:
        return island_3d(spec, mesh)
    return stepped_profile(spec, mesh)


def support_window(spec: ProfileSpec) -> Tuple[float, ...]:
    """Initial film support: (x1, x2) in 1D, (xmin, xmax, ymin, ymax) for 3D shapes."""
    if spec.is_3d:
        return spec.bounding_box()
    if spec.kind == "semi-infinite":
        return (spec.x1, np.inf)
    if spec.kind == "stepped":
        return (spec.x1, spec.x2)
    return (-np.inf, np.inf)


def _check_margin(spec: ProfileSpec, mesh) -> None:
    if isinstance(mesh, IntervalMesh):
        if spec.kind == "stepped" and (spec.x1 - mesh.a < SHAPE_MARGIN or mesh.b - spec.x2 < SHAPE_MARGIN):
            logger.warning(
                "Stepped profile (%g, %g) within %g of the domain [%g, %g]",
                spec.x1,
                spec.x2,
                SHAPE_MARGIN,
                mesh.a,
                mesh.b,
            )
        return
    if spec.is_3d and mesh.bounds is not None:
        a, b, c, d = mesh.bounds
        xmin, xmax, ymin, ymax = spec.bounding_box()
        if min(xmin - a, b - xmax, ymin - c, d - ymax) < SHAPE_MARGIN:
            logger.warning("Island %s within %g of the domain boundary", spec.kind, SHAPE_MARGIN)
