"""Measured quantities of dewetting runs: mass, energy, valley depth, agglomerate census,
shedding time, effective contact point and the least-squares fits used on their series."""
import logging
import math
from dataclasses import dataclass, field
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import sparse
from scipy.signal import find_peaks
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree
from scipy.spatial.distance import directed_hausdorff

from .exceptions import DiagnosticsError
from .fem import element_q, element_values, integrate_field, nodal_weights
from .mesh import IntervalMesh
from .models import ProfileSpec, WettingParams
from .profiles import support_window
from .wetting import gamma


logger = logging.getLogger(__name__)

SERIES_COLUMNS = ["t", "mass", "energy", "h_min", "agglomerates", "x_c"]


@dataclass
class Event:
    """Something noteworthy that happened during a run."""

    kind: str
    step: int
    t: float
    message: str = ""

    def __str__(self):
        return f"step={self.step} t={self.t:.17g} kind={self.kind} {self.message}".rstrip()


@dataclass
class RunRecord:
    """Sampled diagnostics series plus the event log of one run."""

    times: List[float] = field(default_factory=list)
    mass: List[float] = field(default_factory=list)
    energy: List[float] = field(default_factory=list)
    h_min: List[float] = field(default_factory=list)
    agglomerates: List[int] = field(default_factory=list)
    x_c: List[Optional[float]] = field(default_factory=list)
    events: List[Event] = field(default_factory=list)
    snapshots: List[str] = field(default_factory=list)
    added_mass: float = 0.0
    final_state: Any = None

    def append_sample(self, t, mass_value, energy_value, h_min_value, count, x_c_value=None):
        """Add one row; times must be strictly increasing."""
        if self.times and not t > self.times[-1]:
            raise ValueError(f"sample time {t} does not follow {self.times[-1]}")
        self.times.append(float(t))
        self.mass.append(float(mass_value))
        self.energy.append(float(energy_value))
        self.h_min.append(float(h_min_value))
        self.agglomerates.append(int(count))
        self.x_c.append(None if x_c_value is None else float(x_c_value))

    def add_event(self, kind: str, step: int, t: float, message: str = "") -> Event:
        """Record an event with its step index and time."""
        event = Event(kind, int(step), float(t), message)
        self.events.append(event)
        return event

    def events_of(self, kind: str) -> List[Event]:
        """All events of one kind, in order."""
        return [event for event in self.events if event.kind == kind]

    def to_frame(self) -> pd.DataFrame:
        """Series as a DataFrame with the CSV column layout."""
        return pd.DataFrame(
            {
                "t": self.times,
                "mass": self.mass,
                "energy": self.energy,
                "h_min": self.h_min,
                "agglomerates": pd.array(self.agglomerates, dtype="int64"),
                "x_c": [np.nan if v is None else v for v in self.x_c],
            },
            columns=SERIES_COLUMNS,
        )


@dataclass
class AgglomerateReport:
    """Connected regions where h exceeds the threshold.

    ``supports`` holds (x_start, x_end) node coordinates in 1D and node index arrays in 2D.
    """

    count: int
    supports: List[Any]
    masses: List[float]
    node_sets: List[np.ndarray]


@dataclass
class FitResult:
    """Least-squares fit: coefficients, residual two-norm and coefficient of determination."""

    coefficients: Tuple[float, ...]
    residual_norm: float
    r2: float
    names: Tuple[str, ...] = ()

    def as_dict(self):
        """Coefficients by name."""
        return dict(zip(self.names, self.coefficients))


# ---------------------------------------------------------------------------
# Integral quantities
# ---------------------------------------------------------------------------


def mass(state) -> float:
    """Total film mass, the exact integral of the P1 thickness."""
    return integrate_field(state.mesh, state.h)


def energy(state, p: WettingParams) -> float:
    """Surface energy sum_e gamma(h_e) Q_e |e| with midpoint/centroid evaluation."""
    mesh = state.mesh
    return float(np.dot(gamma(element_values(mesh, state.h), p) * element_q(mesh, state.h), mesh.measures))


# ---------------------------------------------------------------------------
# Valley depth
# ---------------------------------------------------------------------------


def _window_mask(mesh, window) -> np.ndarray:
    if window is None:
        return np.ones(mesh.n_nodes, dtype=bool)
    window = tuple(window)
    x = mesh.points[:, 0]
    mask = (x >= window[0]) & (x <= window[1])
    if len(window) == 4:
        if mesh.dim != 2:
            raise DiagnosticsError("a 2D window needs a triangle mesh")
        y = mesh.points[:, 1]
        mask &= (y >= window[2]) & (y <= window[3])
    elif len(window) != 2:
        raise DiagnosticsError(f"window takes 2 or 4 bounds, got {len(window)}")
    return mask


def min_height(state, window: Optional[Sequence[float]] = None, profile: Optional[ProfileSpec] = None):
    """Minimum nodal thickness over a window: ``(value, location)``.

    ``window`` is (x0, x1) or (x0, x1, y0, y1). Without one, the initial support of ``profile`` is
    used, and with neither the whole mesh.
    """
    if window is None and profile is not None:
        window = support_window(profile)
    mask = _window_mask(state.mesh, window)
    if not mask.any():
        raise DiagnosticsError(f"window {window} contains no nodes")
    indices = np.flatnonzero(mask)
    best = indices[np.argmin(state.h[indices])]
    point = state.mesh.points[best]
    location = float(point[0]) if len(point) == 1 else (float(point[0]), float(point[1]))
    return float(state.h[best]), location


def valley_min(state, open_right: bool = False, prominence: float = 1e-3) -> float:
    """Minimum of h between the outermost ridges of a 1D film; NaN while no valley exists.

    With ``open_right`` the right boundary stands in for the far-field film of a semi-infinite run.
    """
    if not isinstance(state.mesh, IntervalMesh):
        raise DiagnosticsError("valley_min is defined for 1D films")
    h = state.h
    peaks, _ = find_peaks(h, prominence=prominence)
    anchors = list(peaks)
    if open_right:
        anchors.append(len(h) - 1)
    if len(anchors) < 2:
        return float("nan")
    return float(h[anchors[0] : anchors[-1] + 1].min())


def shedding_threshold(p: WettingParams) -> float:
    """Valley depth regarded as having reached the wetting layer."""
    return max(2.0 * p.epsilon**2, 1e-5)


def first_shedding_time(record: RunRecord, threshold: float) -> Optional[float]:
    """First time h_min reaches the threshold, linearly interpolated; None if it never does."""
    previous = None
    for t, value in zip(record.times, record.h_min):
        if math.isnan(value):
            continue
        if value <= threshold:
            if previous is None:
                return t
            t0, v0 = previous
            if v0 == value:
                return t
            return t0 + (v0 - threshold) / (v0 - value) * (t - t0)
        previous = (t, value)
    return None


def normalized_valley_series(record: RunRecord, t_c: float) -> Tuple[np.ndarray, np.ndarray]:
    """(t / t_c, h_min) for comparing valley histories across Young angles."""
    if not t_c > 0:
        raise DiagnosticsError("t_c must be positive")
    return np.asarray(record.times) / t_c, np.asarray(record.h_min)


# ---------------------------------------------------------------------------
# Agglomerates
# ---------------------------------------------------------------------------


def _runs(mask: np.ndarray) -> List[Tuple[int, int]]:
    padded = np.concatenate([[False], mask, [False]]).astype(np.int8)
    edges = np.diff(padded)
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1) - 1
    return list(zip(starts, ends))


def count_agglomerates(state, threshold: float = 0.1) -> AgglomerateReport:
    """Maximal regions where h > threshold; masses by restricted integration."""
    mesh, h = state.mesh, state.h
    mask = h > threshold
    contributions = nodal_weights(mesh) * h
    node_sets, supports = [], []
    if isinstance(mesh, IntervalMesh):
        for start, end in _runs(mask):
            node_sets.append(np.arange(start, end + 1))
            supports.append((float(mesh.nodes[start]), float(mesh.nodes[end])))
    else:
        edges = mesh.edges
        keep = mask[edges[:, 0]] & mask[edges[:, 1]]
        kept = edges[keep]
        adjacency = sparse.coo_matrix(
            (np.ones(len(kept)), (kept[:, 0], kept[:, 1])), shape=(mesh.n_nodes, mesh.n_nodes)
        ).tocsr()
        _, labels = connected_components(adjacency, directed=False)
        for label in pd.unique(labels[mask]):
            nodes = np.flatnonzero((labels == label) & mask)
            node_sets.append(nodes)
            supports.append(nodes)
    masses = [float(contributions[nodes].sum()) for nodes in node_sets]
    return AgglomerateReport(len(node_sets), supports, masses, node_sets)


def wetting_layer_thickness(state, threshold: float = 0.1, margin: float = 5.0) -> float:
    """Median thickness over nodes at least ``margin`` away from every agglomerate."""
    report = count_agglomerates(state, threshold)
    points = state.mesh.points
    if report.count == 0:
        far = np.ones(len(points), dtype=bool)
    else:
        occupied = np.concatenate(report.node_sets)
        tree = cKDTree(points[occupied])
        distance, _ = tree.query(points)
        far = distance >= margin
    if not far.any():
        raise DiagnosticsError(f"no nodes lie {margin} away from the agglomerates")
    return float(np.median(state.h[far]))


# ---------------------------------------------------------------------------
# Contact point and cap oracle
# ---------------------------------------------------------------------------


def effective_contact_point(state, h_c: float = 0.2, alpha: float = 0.1, side: str = "left") -> float:
    """Zero of a quadratic fitted to the outer flank band alpha <= h <= h_c.

    The band is the contiguous run of nodes starting at the first node (seen from the bare
    ``side``) where h reaches alpha.
    """
    mesh = state.mesh
    if not isinstance(mesh, IntervalMesh):
        raise DiagnosticsError("effective_contact_point is defined for 1D films")
    order = np.arange(mesh.n_nodes) if side == "left" else np.arange(mesh.n_nodes)[::-1]
    h = state.h[order]
    reached = np.flatnonzero(h >= alpha)
    if not len(reached):
        raise DiagnosticsError(f"profile never reaches alpha = {alpha}")
    first = reached[0]
    last = first
    while last + 1 < len(h) and alpha <= h[last + 1] <= h_c:
        last += 1
    if h[first] > h_c or last - first + 1 < 3:
        raise DiagnosticsError(f"fewer than 3 nodes in the band [{alpha}, {h_c}]")
    band = order[first : last + 1]
    x = mesh.nodes[band]
    origin = x[0]
    coeffs = np.polyfit(x - origin, state.h[band], 2)
    roots = np.roots(coeffs)
    real = roots[np.abs(roots.imag) <= 1e-12 * max(1.0, np.abs(roots).max())].real
    if not len(real):
        raise DiagnosticsError("flank fit has no real root")
    root = real[np.argmin(np.abs(real))]
    logger.debug("Contact point from %d flank nodes in [%g, %g]: %.6g", len(band), alpha, h_c, root + origin)
    return float(root + origin)


def cap_profile(x, area: float, theta: float, x0: float = 0.0) -> np.ndarray:
    """Circular cap of the given area and contact angle centred at x0 (zero outside)."""
    radius = math.sqrt(area / (theta - math.sin(theta) * math.cos(theta)))
    offset = np.asarray(x, dtype=float) - x0
    inside = np.abs(offset) <= radius * math.sin(theta)
    y = np.sqrt(np.clip(radius**2 - offset**2, 0.0, None)) - radius * math.cos(theta)
    return np.where(inside, np.maximum(y, 0.0), 0.0)


def cap_hausdorff_distance(state, theta: float, threshold: float = 0.1, samples: int = 4001) -> float:
    """Hausdorff distance between the largest island (h >= threshold) and the equal-area cap."""
    report = count_agglomerates(state, threshold)
    if report.count == 0:
        raise DiagnosticsError("no island above the threshold")
    index = int(np.argmax(report.masses))
    nodes = report.node_sets[index]
    x = state.mesh.nodes[nodes]
    h = state.h[nodes]
    area = report.masses[index]
    x0 = float(np.dot(x, h) / h.sum())
    radius = math.sqrt(area / (theta - math.sin(theta) * math.cos(theta)))
    half = radius * math.sin(theta)
    grid = np.linspace(x0 - half, x0 + half, samples)
    cap = cap_profile(grid, area, theta, x0)
    keep = cap >= threshold
    computed = np.column_stack([x, h])
    reference = np.column_stack([grid[keep], cap[keep]])
    return float(max(directed_hausdorff(computed, reference)[0], directed_hausdorff(reference, computed)[0]))


# ---------------------------------------------------------------------------
# Fits
# ---------------------------------------------------------------------------


def _determination(y: np.ndarray, residual: np.ndarray) -> float:
    ss_res = float(np.dot(residual, residual))
    centered = y - y.mean()
    ss_tot = float(np.dot(centered, centered))
    if ss_tot == 0.0:
        return 1.0 if ss_res == 0.0 else 0.0
    return 1.0 - ss_res / ss_tot


def fit_least_squares(t, y, exponents: Sequence[float]) -> FitResult:
    """Linear least squares of y on the power basis {t**e for e in exponents}."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(t) != len(y):
        raise DiagnosticsError("t and y differ in length")
    design = np.column_stack([np.ones_like(t) if e == 0 else t**e for e in exponents])
    coefficients, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < design.shape[1]:
        raise DiagnosticsError(f"rank-deficient design (rank {rank} < {design.shape[1]})")
    residual = y - design @ coefficients
    return FitResult(
        tuple(float(c) for c in coefficients),
        float(np.linalg.norm(residual)),
        _determination(y, residual),
        tuple(f"t^{e:g}" for e in exponents),
    )


def fit_contact_law(t, x_c) -> FitResult:
    """Fit S(t) = c + a t^0.4 + b t^0.2; coefficients are (c, a, b)."""
    t = np.asarray(t, dtype=float)
    if len(t) < 4:
        raise DiagnosticsError("the contact law needs at least 4 samples")
    if np.any(t <= 0):
        raise DiagnosticsError("the contact law needs t > 0")
    result = fit_least_squares(t, x_c, (0.0, 0.4, 0.2))
    result.names = ("c", "a", "b")
    return result


def fit_power_law(x, y) -> FitResult:
    """Fit y = prefactor * x**exponent in log-log coordinates; coefficients are (exponent, prefactor)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 3 or len(x) != len(y):
        raise DiagnosticsError("a power law needs at least 3 (x, y) pairs")
    if np.any(x <= 0) or np.any(y <= 0):
        raise DiagnosticsError("power-law data must be positive")
    log_y = np.log(y)
    design = np.column_stack([np.ones_like(x), np.log(x)])
    (intercept, exponent), _, rank, _ = np.linalg.lstsq(design, log_y, rcond=None)
    if rank < 2:
        raise DiagnosticsError("all x values coincide")
    residual = log_y - design @ np.array([intercept, exponent])
    return FitResult(
        (float(exponent), float(math.exp(intercept))),
        float(np.linalg.norm(residual)),
        _determination(log_y, residual),
        ("exponent", "prefactor"),
    )


# ---------------------------------------------------------------------------
# Sampling during runs
# ---------------------------------------------------------------------------


@dataclass
class DiagnosticSampler:
    """Callable hook that appends one diagnostics row per call and flags census changes."""

    params: WettingParams
    threshold: float = 0.1
    h_min_mode: str = "window"
    window: Optional[Tuple[float, ...]] = None
    contact_point: bool = False
    contact_side: str = "left"
    h_c: float = 0.2
    alpha: float = 0.1

    def h_min(self, state) -> float:
        """Valley depth according to the configured mode."""
        if self.h_min_mode == "valley":
            return valley_min(state, open_right=True)
        try:
            return min_height(state, self.window)[0]
        except DiagnosticsError:
            return float("nan")

    def __call__(self, state, record: RunRecord):
        report = count_agglomerates(state, self.threshold)
        x_c = None
        if self.contact_point:
            try:
                x_c = effective_contact_point(state, self.h_c, self.alpha, self.contact_side)
            except DiagnosticsError as exc:
                logger.debug("No contact point at t=%g: %s", state.t, exc)
        if record.agglomerates:
            previous = record.agglomerates[-1]
            if report.count > previous:
                record.add_event("pinch-off", state.step_index, state.t, f"agglomerates {previous} -> {report.count}")
            elif report.count < previous:
                record.add_event("absorption", state.step_index, state.t, f"agglomerates {previous} -> {report.count}")
        record.append_sample(state.t, mass(state), energy(state, self.params), self.h_min(state), report.count, x_c)
        return report
