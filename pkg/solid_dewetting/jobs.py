"""Dewetting run jobs: build the initial state, integrate, and write the run directory."""
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import List, Optional

import numpy as np
import pandas as pd

from . import io
from .config import MANIFEST_KIND, expand_sweep, serialize_config
from .diagnostics import DiagnosticSampler, RunRecord, first_shedding_time, shedding_threshold
from .exceptions import DewettingError
from .mesh import build_interval_mesh, build_rect_tri_mesh, interval_mesh_with_spacing, tri_mesh_with_spacing
from .models import RunConfig
from .profiles import build_profile, support_window
from .solver import FilmState, run, run3d
from .utils import get_output_root, version_info


logger = logging.getLogger(__name__)


def build_mesh(config: RunConfig):
    """Mesh for the configured domain and resolution (dx defaults to epsilon)."""
    domain = config.resolved_domain()
    spec = config.mesh
    dx = spec.dx or config.wetting.epsilon
    if config.dimension == "2d":
        if spec.nx is not None:
            return build_interval_mesh(domain.a, domain.b, spec.nx)
        return interval_mesh_with_spacing(domain.a, domain.b, dx)
    if spec.nx is not None and spec.ny is not None:
        return build_rect_tri_mesh(domain.a, domain.b, domain.c, domain.d, spec.nx, spec.ny, pattern=spec.pattern)
    return tri_mesh_with_spacing(domain.a, domain.b, domain.c, domain.d, dx, pattern=spec.pattern)


def build_initial_state(config: RunConfig) -> FilmState:
    """Initial film on a freshly built mesh."""
    mesh = build_mesh(config)
    return FilmState(mesh, build_profile(config.profile, mesh))


def build_sampler(config: RunConfig) -> DiagnosticSampler:
    """Diagnostics hook configured from the run's diagnostics section."""
    diag = config.diagnostics
    semi_infinite = config.profile.kind == "semi-infinite"
    mode = diag.h_min_mode or ("valley" if semi_infinite else "window")
    window = tuple(diag.h_min_window) if diag.h_min_window is not None else None
    if window is None and config.profile.kind != "flat":
        window = support_window(config.profile)
    return DiagnosticSampler(
        params=config.wetting,
        threshold=diag.agglomerate_threshold,
        h_min_mode=mode,
        window=window,
        contact_point=diag.contact_point,
        contact_side=diag.contact_side,
        h_c=diag.h_c,
        alpha=diag.alpha,
    )


def shedding_time(config: RunConfig, record: RunRecord) -> Optional[float]:
    """First shedding time of a record under the configured (or default) threshold."""
    threshold = config.diagnostics.shedding_threshold or shedding_threshold(config.wetting)
    return first_shedding_time(record, threshold)


class DewettingJob:
    """A single simulation writing into its own run directory."""

    def __init__(self, config: RunConfig, run_dir, debug: bool = False, snapshot_every: Optional[float] = None):
        """Initialize the job; nothing is computed until run()."""
        self.config = config
        self.run_dir = Path(run_dir)
        self.debug = debug
        self.snapshot_every = snapshot_every
        self.record = RunRecord()
        self.status = "pending"
        self.failure: Optional[str] = None

    def log_debug(self, message):
        """Conditionally log a debug message."""
        if self.debug:
            logger.info("[%s] %s", self.config.name, message)

    def log_info(self, message, step=0, t=0.0):
        """Log an informational message and keep it in the event log."""
        logger.info("[%s] %s", self.config.name, message)
        self.record.add_event("info", step, t, message)

    def log_warning(self, message, step=0, t=0.0):
        """Log a warning and keep it in the event log."""
        logger.warning("[%s] %s", self.config.name, message)
        self.record.add_event("warning", step, t, message)

    def log_failure(self, message, step=0, t=0.0):
        """Log a failure and keep it in the event log."""
        logger.error("[%s] %s", self.config.name, message)
        self.record.add_event("failure", step, t, message)

    def options(self):
        """SimOptions with the --snapshot-every times merged in."""
        opts = self.config.options
        if not self.snapshot_every:
            return opts
        count = int(math.floor(opts.t_end / self.snapshot_every + 1e-9))
        extra = [round(k * self.snapshot_every, 12) for k in range(count + 1)]
        return opts.model_copy(update={"snapshot_times": sorted(set(opts.snapshot_times) | set(extra))})

    def resolved_config(self) -> RunConfig:
        """The configuration as run, --snapshot-every times included."""
        return self.config.model_copy(update={"options": self.options()})

    def save_snapshot(self, state: FilmState):
        """Write the snapshot files for one state; returns the main file."""
        stem = io.snapshot_name(state.t)
        directory = self.run_dir / "snapshots"
        if self.config.dimension == "2d":
            path = io.write_snapshot(state, directory / f"{stem}.txt")
        else:
            path = io.write_snapshot(state, directory / f"{stem}.vtk")
            io.write_cross_sections(state, directory, stem)
        self.log_debug(f"Snapshot {path.name} at t={state.t:g}")
        return path.relative_to(self.run_dir)

    def manifest(self) -> dict:
        """Everything needed to re-execute the run, plus its outcome."""
        record = self.record
        summary = {}
        if record.times:
            summary = {
                "final_t": record.times[-1],
                "final_agglomerates": record.agglomerates[-1],
                "final_energy": record.energy[-1],
                "relative_mass_drift": (record.mass[-1] - record.mass[0] - record.added_mass) / record.mass[0]
                if record.mass[0]
                else 0.0,
                "first_shedding_time": shedding_time(self.config, record),
                "events": len(record.events),
            }
        return {
            "kind": MANIFEST_KIND,
            "status": self.status,
            "failure": self.failure,
            "versions": version_info(),
            "snapshot_every": self.snapshot_every,
            "summary": summary,
            "config": self.resolved_config().model_dump(mode="json"),
        }

    def write_outputs(self):
        """series.csv, events.log, manifest.yaml and, on failure, the FAILED marker."""
        io.write_series(self.record, self.run_dir / "series.csv")
        io.write_events(self.record, self.run_dir / "events.log")
        io.write_manifest(self.manifest(), self.run_dir / "manifest.yaml")
        marker = self.run_dir / "FAILED"
        if self.status == "failed":
            marker.write_text(f"{self.failure}\n", encoding="utf-8")
        elif marker.exists():
            marker.unlink()

    def run(self) -> RunRecord:
        """Integrate the configured run and write its directory. Never raises DewettingError."""
        config = self.config
        self.run_dir.mkdir(parents=True, exist_ok=True)
        (self.run_dir / "config.yaml").write_text(serialize_config(self.resolved_config()), encoding="utf-8")
        self.status = "running"
        io.write_manifest(self.manifest(), self.run_dir / "manifest.yaml")
        try:
            initial = build_initial_state(config)
            self.log_info(
                f"Starting {config.dimension} run on {initial.mesh.n_nodes} nodes to t={config.options.t_end:g}"
            )
            runner = run if config.dimension == "2d" else run3d
            runner(
                initial,
                config.wetting,
                self.options(),
                hooks=build_sampler(config),
                on_snapshot=self.save_snapshot,
                record=self.record,
                sample_every=config.sample_interval(),
            )
            self.status = "completed"
            last = self.record.final_state
            self.log_info(f"Completed with {len(self.record.events)} events", last.step_index, last.t)
        except DewettingError as exc:
            self.status = "failed"
            self.failure = f"{type(exc).__name__}: {exc}"
            last = self.record.final_state
            self.log_failure(self.failure, getattr(last, "step_index", 0), getattr(last, "t", 0.0))
        finally:
            if self.status == "running":
                self.status = "failed"
                self.failure = self.failure or "interrupted"
            self.write_outputs()
        return self.record


def _run_point(config: RunConfig, run_dir: str, debug: bool, snapshot_every: Optional[float]) -> dict:
    job = DewettingJob(config, run_dir, debug=debug, snapshot_every=snapshot_every)
    record = job.run()
    row = {
        "label": config.name,
        "epsilon": config.wetting.epsilon,
        "sigma": config.wetting.sigma,
        "theta_i": config.wetting.theta_i,
        "length": (config.profile.x2 - config.profile.x1) if config.profile.kind == "stepped" else np.nan,
        "status": job.status,
        "final_t": record.times[-1] if record.times else np.nan,
        "final_agglomerates": record.agglomerates[-1] if record.agglomerates else -1,
        "first_shedding_time": shedding_time(config, record),
        "final_energy": record.energy[-1] if record.energy else np.nan,
    }
    row["relative_mass_drift"] = (
        (record.mass[-1] - record.mass[0] - record.added_mass) / record.mass[0] if record.mass else np.nan
    )
    return row


def execute(
    config: RunConfig,
    output_root=None,
    parallel: int = 1,
    debug: bool = False,
    snapshot_every: Optional[float] = None,
) -> int:
    """Run a configuration (single run or sweep); returns 0 on success, 1 if any run failed.

    A single run writes into ``<root>/<name>``; a sweep writes one subdirectory per point under
    ``<root>/<name>`` together with ``summary.csv``.
    """
    root = get_output_root(output_root, config.output_dir) / config.name
    points = expand_sweep(config)
    if config.sweep is None:
        rows = [_run_point(config, str(root), debug, snapshot_every)]
    else:
        dirs = [str(root / label) for label, _ in points]
        configs = [point for _, point in points]
        if parallel > 1:
            logger.info("Running %d sweep points on %d processes", len(points), parallel)
            with ProcessPoolExecutor(max_workers=parallel) as pool:
                rows = list(
                    pool.map(_run_point, configs, dirs, [debug] * len(configs), [snapshot_every] * len(configs))
                )
        else:
            rows = [_run_point(point, run_dir, debug, snapshot_every) for point, run_dir in zip(configs, dirs)]
        root.mkdir(parents=True, exist_ok=True)
        pd.DataFrame(rows).to_csv(
            root / "summary.csv", index=False, float_format=io.FLOAT_FORMAT, na_rep="", lineterminator="\n"
        )
    failed: List[str] = [row["label"] for row in rows if row["status"] != "completed"]
    if failed:
        logger.error("%d of %d run(s) failed: %s", len(failed), len(rows), ", ".join(failed))
        return 1
    return 0
