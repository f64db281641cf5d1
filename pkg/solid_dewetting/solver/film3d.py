"""Graph-surface stepper for the 3D model: a 2D height function on a triangle mesh."""
from typing import Callable, Optional

from ..diagnostics import RunRecord
from ..exceptions import MeshError
from ..fem import assemble_surface_stiffness
from ..mesh import TriMesh
from ..models import SimOptions, WettingParams
from .base import FilmState, integrate, semi_implicit_step


def _transport(mesh, h, q):  # pylint: disable=unused-argument
    return assemble_surface_stiffness(mesh, h)


def step3d(state: FilmState, p: WettingParams, opts: SimOptions, tau: Optional[float] = None) -> FilmState:
    """One step with the surface-diffusion flux assembled on the graph of h."""
    if not isinstance(state.mesh, TriMesh):
        raise MeshError("step3d needs a triangle mesh")
    return semi_implicit_step(state, p, opts, _transport, tau)


def run3d(
    initial: FilmState,
    p: WettingParams,
    opts: SimOptions,
    hooks: Optional[Callable] = None,
    on_snapshot: Optional[Callable] = None,
    record: Optional[RunRecord] = None,
    sample_every: Optional[float] = None,
) -> RunRecord:
    """Advance a 3D island to opts.t_end; no domain extension."""
    if opts.semi_infinite:
        raise MeshError("domain extension is not available for 3D runs")
    return integrate(initial, p, opts, step3d, hooks, on_snapshot, None, record, sample_every)
