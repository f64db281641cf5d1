"""Semi-implicit scheme shared by the 2D (interval mesh) and 3D (triangle mesh) film models.

Each step solves one linear system for the new thickness h and chemical potential mu::

    [ M / tau        T       ] [h]   [ M h_old / tau ]
    [ -(K_g + M_si)  M       ] [mu] = [ r            ]

where T is the transport operator (stiffness weighted by 1/Q in 2D, the graph-surface stiffness
in 3D), K_g the stiffness weighted by gamma(h_old)/Q, M_si the mass weighted by the implicit wetting
coefficient on thin elements and r the explicit wetting load on thick ones. All coefficients are
frozen at the old thickness.
"""
import dataclasses
import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import sparse

from ..diagnostics import RunRecord, energy, mass
from ..exceptions import MeshError, UnphysicalStateError
from ..fem import (
    Mesh,
    assemble_load,
    assemble_mass,
    assemble_weighted_stiffness,
    element_q,
    element_values,
)
from ..linalg import solve_sparse
from ..models import SimOptions, WettingParams
from ..wetting import gamma, gamma_prime_semi_implicit


logger = logging.getLogger(__name__)

Transport = Callable[[Mesh, np.ndarray, np.ndarray], sparse.csr_matrix]


@dataclass(frozen=True, eq=False)
class FilmState:
    """Nodal thickness (and chemical potential after a step) at time t on a mesh."""

    mesh: Mesh
    h: np.ndarray
    mu: Optional[np.ndarray] = None
    t: float = 0.0
    step_index: int = 0

    def __post_init__(self):
        h = np.asarray(self.h, dtype=float)
        if h.shape != (self.mesh.n_nodes,):
            raise MeshError(f"h has shape {h.shape}, mesh has {self.mesh.n_nodes} nodes")
        if not np.isfinite(h).all():
            raise MeshError("h must be finite at all nodes")
        object.__setattr__(self, "h", h)
        if self.mu is not None:
            object.__setattr__(self, "mu", np.asarray(self.mu, dtype=float))

    def replace(self, **changes) -> "FilmState":
        """Copy with some fields changed."""
        return dataclasses.replace(self, **changes)


def _wetting_weight(q: np.ndarray, weak_form: str) -> np.ndarray:
    if weak_form == "paper":
        return np.ones_like(q)
    if weak_form == "consistent":
        return q * q
    raise ValueError(f"unknown weak form {weak_form!r}")


def assemble_curvature_terms(mesh: Mesh, h_old, p: WettingParams, weak_form: str, lumped: bool = False):
    """Matrices of the chemical-potential equation frozen at h_old: ``(K_gamma, M_si, r)``."""
    h_e = element_values(mesh, h_old)
    q = element_q(mesh, h_old)
    weight = _wetting_weight(q, weak_form) / q
    coeff, offset = gamma_prime_semi_implicit(h_e, p)
    k_gamma = assemble_weighted_stiffness(mesh, gamma(h_e, p) / q)
    m_si = assemble_mass(mesh, coeff * weight, lumped=lumped)
    load = assemble_load(mesh, offset * weight)
    return k_gamma, m_si, load


def discrete_first_variation(mesh: Mesh, h, p: WettingParams, weak_form: str = "consistent") -> np.ndarray:
    """Assembled chemical-potential residual ``K_gamma h + M_si h + r`` with coefficients frozen at h.

    For the consistent weak form and h above h_bar everywhere this is the gradient of the discrete
    energy with respect to the nodal thicknesses.
    """
    h = np.asarray(h, dtype=float)
    k_gamma, m_si, load = assemble_curvature_terms(mesh, h, p, weak_form)
    return k_gamma @ h + m_si @ h + load


def assemble_step_system(state: FilmState, p: WettingParams, opts: SimOptions, transport: Transport, tau: float):
    """Block matrix and right-hand side of one step."""
    mesh, h = state.mesh, state.h
    q = element_q(mesh, h)
    mass_matrix = assemble_mass(mesh, lumped=opts.lumped_mass)
    k_gamma, m_si, load = assemble_curvature_terms(mesh, h, p, opts.weak_form, lumped=opts.lumped_mass)
    system = sparse.bmat(
        [[mass_matrix / tau, transport(mesh, h, q)], [-(k_gamma + m_si), mass_matrix]],
        format="csr",
    )
    rhs = np.concatenate([mass_matrix @ h / tau, load])
    return system, rhs


def semi_implicit_step(
    state: FilmState, p: WettingParams, opts: SimOptions, transport: Transport, tau: Optional[float] = None
) -> FilmState:
    """Advance one step of size tau (default opts.tau)."""
    tau = opts.tau if tau is None else tau
    system, rhs = assemble_step_system(state, p, opts, transport, tau)
    solution = solve_sparse(system, rhs, rtol=opts.solver_rtol, method=opts.solver)
    n = state.mesh.n_nodes
    new = FilmState(state.mesh, solution[:n], solution[n:], state.t + tau, state.step_index + 1)
    floor = opts.floor_for(p)
    lowest = float(new.h.min())
    if lowest < floor:
        raise UnphysicalStateError(new, lowest, floor)
    return new


Stepper = Callable[..., FilmState]
Extender = Callable[[FilmState, SimOptions], FilmState]
Hook = Callable[[FilmState, RunRecord], object]


class _Integrator:
    """Fixed-step time loop with sampling, snapshots, events and optional step halving."""

    def __init__(self, p, opts, stepper, sampler, on_snapshot, extender, record, sample_every):
        self.p = p
        self.opts = opts
        self.stepper = stepper
        self.sampler = sampler
        self.on_snapshot = on_snapshot
        self.extender = extender
        self.record = record if record is not None else RunRecord()
        self.sample_every = sample_every or opts.tau

    def _advance(self, state: FilmState, tau: float, energy_before: float, depth: int = 0) -> FilmState:
        can_halve = self.opts.adaptive_tau and depth < self.opts.max_halvings
        try:
            new = self.stepper(state, self.p, self.opts, tau=tau)
        except UnphysicalStateError as exc:
            if not can_halve:
                raise
            reason = f"min h {exc.min_height:.3g} below the floor"
        else:
            if not can_halve:
                return new
            increase = energy(new, self.p) - energy_before
            if increase <= self.opts.energy_increase_tol * abs(energy_before):
                return new
            reason = f"energy rose by {increase:.3e}"
        self.record.add_event("step-halving", state.step_index, state.t, f"tau {tau:g} -> {tau / 2:g}: {reason}")
        logger.info("Retrying t=%g with tau=%g: %s", state.t, tau / 2, reason)
        half = self._advance(state, tau / 2, energy_before, depth + 1)
        return self._advance(half, tau / 2, energy(half, self.p), depth + 1)

    def _extend(self, state: FilmState) -> FilmState:
        extended = self.extender(state, self.opts)
        if extended is not state:
            added = mass(extended) - mass(state)
            self.record.added_mass += added
            detail = f"b {state.mesh.b:g} -> {extended.mesh.b:g}, added mass {added:.17g}"
            self.record.add_event("extension", state.step_index, state.t, detail)
            logger.info("Extended domain to b=%g at t=%g", extended.mesh.b, state.t)
        return extended

    def run(self, initial: FilmState) -> RunRecord:
        opts, record = self.opts, self.record
        state = initial
        t0 = initial.t
        n_steps = int(round((opts.t_end - t0) / opts.tau)) if opts.t_end > t0 else 0
        tolerance = 1e-9 * opts.tau
        snapshots = [t for t in opts.snapshot_times if t >= t0 - tolerance]
        next_sample = t0

        def observe(current: FilmState, force: bool = False):
            nonlocal next_sample
            if self.sampler is not None and (force or current.t >= next_sample - tolerance):
                if not record.times or current.t > record.times[-1]:
                    self.sampler(current, record)
                while next_sample <= current.t + tolerance:
                    next_sample += self.sample_every
            while snapshots and current.t >= snapshots[0] - tolerance:
                snapshots.pop(0)
                if self.on_snapshot is not None:
                    path = self.on_snapshot(current)
                    if path is not None:
                        record.snapshots.append(str(path))

        observe(state)
        energy_before = energy(state, self.p)
        for k in range(n_steps):
            if self.extender is not None:
                state = self._extend(state)
                energy_before = energy(state, self.p)
            try:
                new = self._advance(state, opts.tau, energy_before)
            except UnphysicalStateError as exc:
                record.add_event("unphysical", exc.state.step_index, exc.state.t, str(exc))
                logger.warning("%s", exc)
                if not opts.continue_on_unphysical:
                    record.final_state = exc.state
                    raise
                new = exc.state
            new = new.replace(t=t0 + (k + 1) * opts.tau, step_index=state.step_index + 1)
            energy_after = energy(new, self.p)
            if energy_after > energy_before + opts.energy_warn_tol * abs(energy_before):
                record.add_event(
                    "energy-increase", new.step_index, new.t, f"{energy_before:.17g} -> {energy_after:.17g}"
                )
                logger.warning(
                    "Energy increased at step %d (t=%g): %.6g -> %.6g",
                    new.step_index,
                    new.t,
                    energy_before,
                    energy_after,
                )
            stationary = (
                opts.stationary_tol is not None
                and abs(energy_after - energy_before) <= opts.stationary_tol * abs(energy_before) * opts.tau
            )
            state, energy_before = new, energy_after
            observe(state, force=stationary or k == n_steps - 1)
            if stationary:
                record.add_event("stationary", state.step_index, state.t, f"energy {energy_after:.17g}")
                logger.info("Energy stationary at t=%g", state.t)
                break
        record.final_state = state
        return record


def integrate(
    initial: FilmState,
    p: WettingParams,
    opts: SimOptions,
    stepper: Stepper,
    sampler: Optional[Hook] = None,
    on_snapshot: Optional[Callable[[FilmState], object]] = None,
    extender: Optional[Extender] = None,
    record: Optional[RunRecord] = None,
    sample_every: Optional[float] = None,
) -> RunRecord:
    """Advance ``initial`` to opts.t_end with fixed steps of opts.tau.

    ``sampler(state, record)`` is called at t0, every ``sample_every`` time units and at the end;
    ``on_snapshot(state)`` at each of opts.snapshot_times. Unphysical states abort the run (the
    exception carries the state) unless opts.continue_on_unphysical is set. The returned record
    holds the final state in ``final_state``.
    """
    integrator = _Integrator(p, opts, stepper, sampler, on_snapshot, extender, record, sample_every)
    return integrator.run(initial)
