"""Validated configuration models for dewetting runs."""
import logging
import math
from typing import List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


logger = logging.getLogger(__name__)

WeakForm = Literal["paper", "consistent"]
ProfileKind = Literal["stepped", "semi-infinite", "flat", "cuboid", "square", "square-ring", "cross"]
SHAPES_3D = ("cuboid", "square", "square-ring", "cross")


class StrictModel(BaseModel):
    """Base for all configuration models: immutable, unknown keys rejected."""

    model_config = ConfigDict(extra="forbid", frozen=True)


class WettingParams(StrictModel):
    """Material triple (sigma, epsilon, h_bar) of the exponential surface-energy law."""

    sigma: float = Field(description="cos of the Young angle; 1 disables the wetting potential")
    epsilon: float = Field(description="decay length of the wetting potential")
    h_bar: Optional[float] = Field(default=None, description="matching thickness of the quadratic surrogate")

    @model_validator(mode="before")
    @classmethod
    def default_h_bar(cls, data):
        """h_bar defaults to epsilon."""
        if isinstance(data, dict) and data.get("h_bar") is None and data.get("epsilon") is not None:
            data = {**data, "h_bar": data["epsilon"]}
        return data

    @field_validator("sigma")
    @classmethod
    def check_sigma(cls, value):
        """Partial wetting with angles below pi/2, or the degenerate sigma = 1."""
        if not 0.0 < value <= 1.0:
            raise ValueError(f"sigma must lie in (0, 1], got {value}")
        return value

    @field_validator("epsilon", "h_bar")
    @classmethod
    def check_positive(cls, value):
        """Lengths are strictly positive."""
        if value is not None and not value > 0.0:
            raise ValueError(f"must be positive, got {value}")
        return value

    @model_validator(mode="after")
    def warn_large_h_bar(self):
        """The surrogate is only meant for thin wetting layers."""
        if self.h_bar > 10.0 * self.epsilon:
            logger.warning(
                "h_bar = %g exceeds 10*epsilon = %g; the surrogate covers a thick layer", self.h_bar, 10 * self.epsilon
            )
        if self.sigma == 1.0:
            logger.info("sigma = 1: surface energy is constant, no wetting potential")
        return self

    @property
    def theta_i(self) -> float:
        """Young angle in radians."""
        return math.acos(self.sigma)

    @classmethod
    def from_angle(cls, theta_i: float, epsilon: float, h_bar: Optional[float] = None) -> "WettingParams":
        """Build from the Young angle instead of sigma."""
        return cls(sigma=math.cos(theta_i), epsilon=epsilon, h_bar=h_bar)


class SimOptions(StrictModel):
    """Time stepping, solver and event-handling options."""

    tau: float = 0.1
    t_end: float = 100.0
    weak_form: WeakForm = "paper"
    solver: Literal["direct", "gmres"] = "direct"
    solver_rtol: float = 1e-10
    lumped_mass: bool = False
    semi_infinite: bool = False
    extension_trigger: float = 1e-6
    extension_unit: float = 1.0
    snapshot_times: List[float] = Field(default_factory=list)
    unphysical_floor: Optional[float] = Field(default=None, description="defaults to -epsilon")
    continue_on_unphysical: bool = False
    energy_warn_tol: float = 1e-6
    adaptive_tau: bool = False
    energy_increase_tol: float = 1e-4
    max_halvings: int = 4
    stationary_tol: Optional[float] = Field(default=None, description="stop when |dE|/(|E| tau) falls below")

    @field_validator("tau", "extension_trigger", "extension_unit", "energy_warn_tol", "energy_increase_tol")
    @classmethod
    def check_positive(cls, value):
        """Strictly positive quantities."""
        if not value > 0.0:
            raise ValueError(f"must be positive, got {value}")
        return value

    @field_validator("t_end")
    @classmethod
    def check_t_end(cls, value):
        """t_end may be zero."""
        if value < 0.0:
            raise ValueError(f"t_end must be >= 0, got {value}")
        return value

    @field_validator("solver_rtol")
    @classmethod
    def check_rtol(cls, value):
        """Relative residual tolerance within (0, 1e-4]."""
        if not 0.0 < value <= 1e-4:
            raise ValueError(f"solver_rtol must lie in (0, 1e-4], got {value}")
        return value

    @field_validator("snapshot_times")
    @classmethod
    def sort_snapshot_times(cls, value):
        """Snapshot times are kept sorted and unique."""
        if any(t < 0 for t in value):
            raise ValueError("snapshot times must be >= 0")
        return sorted(set(value))

    def floor_for(self, params: WettingParams) -> float:
        """Unphysical-state floor for the given material."""
        return -params.epsilon if self.unphysical_floor is None else self.unphysical_floor


class ProfileSpec(StrictModel):
    """Initial-condition geometry.

    1D kinds use x1/x2 (or level for flat). 3D kinds use a centre plus widths; a square-ring
    also needs inner widths and a cross needs the limb length.
    """

    kind: ProfileKind
    x1: Optional[float] = None
    x2: Optional[float] = None
    level: Optional[float] = None
    center: Tuple[float, float] = (0.0, 0.0)
    widths: Optional[Tuple[float, float]] = None
    inner_widths: Optional[Tuple[float, float]] = None
    limb_length: Optional[float] = None
    limb_width: float = 1.0
    edge_width: float = 1.0
    floor_thickness: float = 1e-5

    @model_validator(mode="after")
    def check_geometry(self):
        """Per-kind geometric requirements."""
        if self.kind in ("stepped", "semi-infinite"):
            if self.x1 is None:
                raise ValueError(f"profile kind {self.kind!r} requires x1")
            if self.kind == "stepped":
                if self.x2 is None or not self.x2 > self.x1:
                    raise ValueError("stepped profile requires x2 > x1")
        elif self.kind == "flat":
            if self.level is None or self.level < 0:
                raise ValueError("flat profile requires level >= 0")
        elif self.kind == "cross":
            if self.limb_length is None or self.limb_length <= 0:
                raise ValueError("cross requires a positive limb_length")
        else:
            if self.widths is None or min(self.widths) <= 0:
                raise ValueError(f"profile kind {self.kind!r} requires positive widths")
            if self.kind == "square" and self.widths[0] != self.widths[1]:
                raise ValueError("square profile requires equal widths")
            if self.kind == "square-ring":
                if self.inner_widths is None or min(self.inner_widths) <= 0:
                    raise ValueError("square-ring requires positive inner_widths")
                if self.inner_widths[0] >= self.widths[0] or self.inner_widths[1] >= self.widths[1]:
                    raise ValueError("square-ring inner cuboid must lie strictly inside the outer one")
        if self.edge_width <= 0 or self.limb_width <= 0:
            raise ValueError("edge_width and limb_width must be positive")
        if self.floor_thickness <= 0:
            raise ValueError("floor_thickness must be positive")
        return self

    @property
    def is_3d(self) -> bool:
        """True for the tensor-product island shapes."""
        return self.kind in SHAPES_3D

    @property
    def x2_effective(self) -> float:
        """Right step position; a semi-infinite film puts it far outside any window."""
        return 1e5 if self.kind == "semi-infinite" else self.x2

    def bounding_box(self) -> Tuple[float, float, float, float]:
        """Extents (xmin, xmax, ymin, ymax) of a 3D shape."""
        cx, cy = self.center
        if self.kind == "cross":
            reach = self.limb_width / 2.0 + self.limb_length
            return (cx - reach, cx + reach, cy - reach, cy + reach)
        wx, wy = self.widths
        return (cx - wx / 2.0, cx + wx / 2.0, cy - wy / 2.0, cy + wy / 2.0)


class DomainSpec(StrictModel):
    """Computational rectangle; c and d only for 3D runs."""

    a: float
    b: float
    c: Optional[float] = None
    d: Optional[float] = None

    @model_validator(mode="after")
    def check_bounds(self):
        """Non-degenerate bounds."""
        if not self.b > self.a:
            raise ValueError("domain requires b > a")
        if (self.c is None) != (self.d is None):
            raise ValueError("domain requires both c and d or neither")
        if self.c is not None and not self.d > self.c:
            raise ValueError("domain requires d > c")
        return self


class MeshSpec(StrictModel):
    """Resolution: a spacing dx (default epsilon) or explicit cell counts."""

    dx: Optional[float] = None
    nx: Optional[int] = None
    ny: Optional[int] = None
    pattern: Literal["forward", "union-jack"] = "forward"

    @field_validator("dx")
    @classmethod
    def check_dx(cls, value):
        """Positive spacing."""
        if value is not None and not value > 0:
            raise ValueError("dx must be positive")
        return value

    @field_validator("nx", "ny")
    @classmethod
    def check_counts(cls, value):
        """At least one cell."""
        if value is not None and value < 1:
            raise ValueError("cell counts must be >= 1")
        return value


class DiagnosticsSpec(StrictModel):
    """Diagnostics cadence and thresholds."""

    sample_every: Optional[float] = Field(default=None, description="defaults to tau")
    agglomerate_threshold: float = 0.1
    shedding_threshold: Optional[float] = Field(default=None, description="defaults to max(2 eps^2, 1e-5)")
    h_min_mode: Optional[Literal["window", "valley"]] = Field(default=None, description="valley for semi-infinite runs")
    h_min_window: Optional[List[float]] = Field(default=None, description="[x0, x1] or [x0, x1, y0, y1]")
    contact_point: bool = False
    contact_side: Literal["left", "right"] = "left"
    h_c: float = 0.2
    alpha: float = 0.1

    @model_validator(mode="after")
    def check_values(self):
        """Thresholds and windows."""
        if self.sample_every is not None and not self.sample_every > 0:
            raise ValueError("sample_every must be positive")
        if not self.agglomerate_threshold > 0:
            raise ValueError("agglomerate_threshold must be positive")
        if not 0 < self.alpha < self.h_c:
            raise ValueError("contact-point band requires 0 < alpha < h_c")
        if self.h_min_window is not None and len(self.h_min_window) not in (2, 4):
            raise ValueError("h_min_window takes 2 (1D) or 4 (2D) bounds")
        return self


class SweepSpec(StrictModel):
    """Cartesian sweep axes; sigma and theta_i are mutually exclusive."""

    epsilon: List[float] = Field(default_factory=list)
    sigma: List[float] = Field(default_factory=list)
    theta_i: List[float] = Field(default_factory=list)
    length: List[float] = Field(default_factory=list)

    @model_validator(mode="after")
    def check_axes(self):
        """At least one axis, never both sigma and theta_i."""
        if self.sigma and self.theta_i:
            raise ValueError("sweep over sigma or theta_i, not both")
        if not (self.epsilon or self.sigma or self.theta_i or self.length):
            raise ValueError("a sweep needs at least one non-empty axis")
        if any(v <= 0 for v in self.length):
            raise ValueError("sweep lengths must be positive")
        return self


class RunConfig(StrictModel):
    """Complete, resolved description of a run or a sweep."""

    name: str = "run"
    dimension: Literal["2d", "3d"] = "2d"
    wetting: WettingParams
    profile: ProfileSpec
    domain: Optional[DomainSpec] = None
    mesh: MeshSpec = Field(default_factory=MeshSpec)
    options: SimOptions = Field(default_factory=SimOptions)
    diagnostics: DiagnosticsSpec = Field(default_factory=DiagnosticsSpec)
    sweep: Optional[SweepSpec] = None
    output_dir: Optional[str] = None

    @model_validator(mode="after")
    def check_dimension(self):
        """Profile kind and options must match the model dimension."""
        if self.dimension == "3d":
            # a stepped profile is extruded in y; semi-infinite needs domain extension
            if self.profile.kind == "semi-infinite":
                raise ValueError("semi-infinite films are 2d only")
            if self.options.semi_infinite:
                raise ValueError("domain extension is 2d only")
        elif self.profile.is_3d:
            raise ValueError(f"profile kind {self.profile.kind!r} needs dimension 3d")
        if self.sweep is not None and self.sweep.length and self.profile.kind != "stepped":
            raise ValueError("length sweeps need a stepped profile")
        if self.domain is not None and self.dimension == "3d" and self.domain.c is None:
            raise ValueError("3d runs need domain bounds c and d")
        return self

    def resolved_domain(self) -> DomainSpec:
        """Explicit domain, or the default around the profile."""
        if self.domain is not None:
            return self.domain
        prof = self.profile
        if prof.kind == "stepped":
            lo, hi = prof.x1 - 20.0, prof.x2 + 20.0
        elif prof.kind == "semi-infinite":
            lo, hi = prof.x1 - 20.0, prof.x1 + 20.0
        elif prof.is_3d:
            xmin, xmax, ymin, ymax = prof.bounding_box()
            return DomainSpec(a=xmin - 10.0, b=xmax + 10.0, c=ymin - 10.0, d=ymax + 10.0)
        else:
            lo, hi = 0.0, 10.0
        if self.dimension == "3d":
            return DomainSpec(a=lo, b=hi, c=0.0, d=1.0)
        return DomainSpec(a=lo, b=hi)

    def sample_interval(self) -> float:
        """Diagnostics cadence in time units."""
        return self.diagnostics.sample_every or self.options.tau
