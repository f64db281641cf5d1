"""Semi-implicit stepper for the 2D model: a 1D height function on an interval mesh."""
import logging
from typing import Callable, Optional

import numpy as np

from ..diagnostics import RunRecord
from ..exceptions import MeshError
from ..fem import assemble_weighted_stiffness
from ..mesh import IntervalMesh, extend_interval_mesh
from ..models import SimOptions, WettingParams
from .base import FilmState, integrate, semi_implicit_step


logger = logging.getLogger(__name__)


def _transport(mesh, h, q):  # pylint: disable=unused-argument
    return assemble_weighted_stiffness(mesh, 1.0 / q)


def step(state: FilmState, p: WettingParams, opts: SimOptions, tau: Optional[float] = None) -> FilmState:
    """One step of the coupled (h, mu) system on an interval mesh."""
    if not isinstance(state.mesh, IntervalMesh):
        raise MeshError("step needs an interval mesh; use step3d on triangle meshes")
    return semi_implicit_step(state, p, opts, _transport, tau)


def maybe_extend_domain(state: FilmState, opts: SimOptions) -> FilmState:
    """Grow the domain to the right once the far-field film at b moves away from 1.

    New nodes get h = 1 and mu the boundary value; mu is recomputed by the next solve.
    """
    if not opts.semi_infinite:
        return state
    if abs(state.h[-1] - 1.0) < opts.extension_trigger:
        return state
    mesh = extend_interval_mesh(state.mesh, opts.extension_unit)
    added = mesh.n_nodes - state.mesh.n_nodes
    h = np.concatenate([state.h, np.ones(added)])
    mu = None if state.mu is None else np.concatenate([state.mu, np.full(added, state.mu[-1])])
    return FilmState(mesh, h, mu, state.t, state.step_index)


def run(
    initial: FilmState,
    p: WettingParams,
    opts: SimOptions,
    hooks: Optional[Callable] = None,
    on_snapshot: Optional[Callable] = None,
    record: Optional[RunRecord] = None,
    sample_every: Optional[float] = None,
) -> RunRecord:
    """Advance a 1D film to opts.t_end, extending the domain in semi-infinite mode."""
    extender = maybe_extend_domain if opts.semi_infinite else None
    return integrate(initial, p, opts, step, hooks, on_snapshot, extender, record, sample_every)
