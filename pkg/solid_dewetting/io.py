"""Files written by runs: snapshots, legacy VTK meshes, cross-sections, series and manifests.

All floating-point numbers are written with 17 significant digits so re-reading a file
reproduces the nodal values exactly and identical runs produce identical bytes.
"""
import logging
import os
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

import numpy as np
import yaml

from . import default_settings
from .diagnostics import RunRecord
from .exceptions import DewettingError, MeshError
from .mesh import IntervalMesh, TriMesh


logger = logging.getLogger(__name__)

FLOAT_FORMAT = default_settings["float_format"]
VTK_TRIANGLE = 5
PathLike = Union[str, os.PathLike]


def _writable(path: PathLike) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise DewettingError(f"cannot create {path.parent}: {exc}") from exc
    return path


def _savetxt(path: Path, columns, header: str = "") -> Path:
    try:
        np.savetxt(path, np.column_stack(columns), fmt=FLOAT_FORMAT, header=header)
    except OSError as exc:
        raise DewettingError(f"cannot write {path}: {exc}") from exc
    return path


def snapshot_name(t: float) -> str:
    """File stem of the snapshot taken at time t."""
    return f"t={t:.6f}"


def write_snapshot(state, path: PathLike, fmt: str = "auto") -> Path:
    """Write the thickness field.

    ``fmt`` is ``txt`` (x, h columns; 1D only), ``vtk`` (legacy ASCII unstructured grid; 2D only),
    ``xyz`` (x, y, h columns; 2D only) or ``auto`` (txt in 1D, vtk in 2D). Returns the path written.
    """
    path = _writable(path)
    mesh = state.mesh
    if fmt == "auto":
        fmt = "txt" if isinstance(mesh, IntervalMesh) else "vtk"
    if fmt == "txt":
        if not isinstance(mesh, IntervalMesh):
            raise MeshError("two-column snapshots are for interval meshes")
        return _savetxt(path, [mesh.nodes, state.h], header=f"t={state.t:.17g}\nx h")
    if not isinstance(mesh, TriMesh):
        raise MeshError(f"{fmt} snapshots are for triangle meshes")
    if fmt == "xyz":
        return _savetxt(path, [mesh.points[:, 0], mesh.points[:, 1], state.h], header=f"t={state.t:.17g}\nx y h")
    if fmt == "vtk":
        return write_vtk(mesh, state.h, path, title=f"solid-dewetting t={state.t:.17g}")
    raise ValueError(f"unknown snapshot format {fmt!r}")


def write_vtk(mesh: TriMesh, h, path: PathLike, title: str = "solid-dewetting") -> Path:
    """Legacy ASCII VTK unstructured grid of triangles with h as point data (and as z)."""
    path = _writable(path)
    n_points, n_cells = mesh.n_nodes, len(mesh.triangles)
    num = FLOAT_FORMAT
    lines = ["# vtk DataFile Version 2.0", title, "ASCII", "DATASET UNSTRUCTURED_GRID", f"POINTS {n_points} double"]
    lines += [f"{num % x} {num % y} {num % z}" for (x, y), z in zip(mesh.points, h)]
    lines.append(f"CELLS {n_cells} {4 * n_cells}")
    lines += [f"3 {i} {j} {k}" for i, j, k in mesh.triangles]
    lines.append(f"CELL_TYPES {n_cells}")
    lines += [str(VTK_TRIANGLE)] * n_cells
    lines += [f"POINT_DATA {n_points}", "SCALARS h double 1", "LOOKUP_TABLE default"]
    lines += [num % value for value in h]
    try:
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as exc:
        raise DewettingError(f"cannot write {path}: {exc}") from exc
    return path


def read_vtk(path: PathLike) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Read back ``(points, triangles, h)`` from a file written by write_vtk."""
    tokens = Path(path).read_text(encoding="utf-8").split("\n")
    index = {line.split()[0]: i for i, line in enumerate(tokens) if line and line.split()[0].isupper()}
    n_points = int(tokens[index["POINTS"]].split()[1])
    n_cells = int(tokens[index["CELLS"]].split()[1])
    start = index["POINTS"] + 1
    coords = np.array([[float(v) for v in line.split()] for line in tokens[start : start + n_points]])
    start = index["CELLS"] + 1
    triangles = np.array([[int(v) for v in line.split()[1:]] for line in tokens[start : start + n_cells]])
    start = index["LOOKUP_TABLE"] + 1
    h = np.array([float(v) for v in tokens[start : start + n_points]])
    return coords[:, :2], triangles, h


def read_snapshot(path: PathLike) -> Dict[str, np.ndarray]:
    """Load a snapshot written by write_snapshot into named columns."""
    path = Path(path)
    if path.suffix == ".vtk":
        points, triangles, h = read_vtk(path)
        return {"x": points[:, 0], "y": points[:, 1], "h": h, "triangles": triangles}
    data = np.loadtxt(path, ndmin=2)
    if data.shape[1] == 2:
        return {"x": data[:, 0], "h": data[:, 1]}
    return {"x": data[:, 0], "y": data[:, 1], "h": data[:, 2]}


def sample_structured(mesh: TriMesh, h, x, y) -> np.ndarray:
    """Evaluate the P1 interpolant of h at points of a structured rectangle mesh."""
    if mesh.shape is None or mesh.bounds is None:
        raise MeshError("point sampling needs a structured rectangle mesh")
    nx, ny = mesh.shape
    a, b, c, d = mesh.bounds
    h = np.asarray(h, dtype=float)
    u = np.clip((np.asarray(x, dtype=float) - a) / (b - a) * nx, 0.0, nx)
    v = np.clip((np.asarray(y, dtype=float) - c) / (d - c) * ny, 0.0, ny)
    i = np.minimum(np.floor(u).astype(int), nx - 1)
    j = np.minimum(np.floor(v).astype(int), ny - 1)
    xi, eta = u - i, v - j
    ll = j * (nx + 1) + i
    f_ll, f_lr, f_ul, f_ur = h[ll], h[ll + 1], h[ll + nx + 1], h[ll + nx + 2]
    forward = np.ones_like(i, dtype=bool) if mesh.pattern == "forward" else (i + j) % 2 == 0
    lower = f_ll * (1 - xi) + f_lr * (xi - eta) + f_ur * eta
    upper = f_ll * (1 - eta) + f_ur * xi + f_ul * (eta - xi)
    first = f_ll * (1 - xi - eta) + f_lr * xi + f_ul * eta
    second = f_lr * (1 - eta) + f_ur * (xi + eta - 1) + f_ul * (1 - xi)
    return np.where(forward, np.where(eta <= xi, lower, upper), np.where(xi + eta <= 1, first, second))


def cross_sections(state) -> Dict[str, Tuple[np.ndarray, np.ndarray]]:
    """Profiles along the horizontal midline and the lower-left to upper-right diagonal.

    Returns ``{"ymid": (x, h), "diag": (s, h)}`` with s the distance from the lower-left corner.
    """
    mesh = state.mesh
    nx, ny = mesh.shape
    a, b, c, d = mesh.bounds
    xs = np.linspace(a, b, nx + 1)
    mid = sample_structured(mesh, state.h, xs, np.full_like(xs, 0.5 * (c + d)))
    n_diag = max(nx, ny) + 1
    fraction = np.linspace(0.0, 1.0, n_diag)
    diag = sample_structured(mesh, state.h, a + fraction * (b - a), c + fraction * (d - c))
    return {"ymid": (xs, mid), "diag": (fraction * np.hypot(b - a, d - c), diag)}


def write_cross_sections(state, directory: PathLike, stem: str) -> Dict[str, Path]:
    """Write the midline and diagonal sections as two-column text files."""
    written = {}
    for name, (s, h) in cross_sections(state).items():
        path = _writable(Path(directory) / f"{stem}_{name}.txt")
        written[name] = _savetxt(path, [s, h], header=f"t={state.t:.17g}\ns h")
    return written


def write_series(record: RunRecord, path: PathLike) -> Path:
    """series.csv: t, mass, energy, h_min, agglomerates, x_c."""
    path = _writable(path)
    record.to_frame().to_csv(path, index=False, float_format=FLOAT_FORMAT, na_rep="", lineterminator="\n")
    return path


def write_events(record: RunRecord, path: PathLike) -> Path:
    """events.log, one event per line."""
    path = _writable(path)
    path.write_text("".join(f"{event}\n" for event in record.events), encoding="utf-8")
    return path


def write_manifest(data: dict, path: PathLike) -> Path:
    """manifest.yaml with the resolved configuration, versions and run status."""
    path = _writable(path)
    path.write_text(yaml.safe_dump(data, sort_keys=False, default_flow_style=False), encoding="utf-8")
    return path


def read_manifest(path: PathLike) -> Optional[dict]:
    """Load a manifest; None if the file is missing."""
    path = Path(path)
    if not path.exists():
        logger.warning("No manifest at %s", path)
        return None
    return yaml.safe_load(path.read_text(encoding="utf-8"))
