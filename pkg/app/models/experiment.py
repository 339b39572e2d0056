# ===========================================================================
# File: app/models/experiment.py
# ===========================================================================
from pydantic import BaseModel, Field, field_validator, model_validator
from typing import List, Literal, Optional, Tuple
import math

from app.core.config import settings

ExperimentKind = Literal["fundamental", "ntd-sweep", "scatterer", "gamma-sweep", "custom"]
IncidentKind = Literal["mode", "fundamental"]
MeshKind = Literal["uniform", "scatterer", "layer"]
ReferenceKind = Literal["exact", "overkill"]

CSV_HEADER: List[str] = [
    "experiment", "k", "R", "H", "h", "Np", "M", "gamma", "dofs",
    "rel_l2_error", "residual", "cond_indicator", "wall_seconds", "status",
]

# Per-experiment defaults: (incident, mesh, reference)
EXPERIMENT_DEFAULTS = {
    "fundamental": ("fundamental", "uniform", "exact"),
    "ntd-sweep": ("fundamental", "uniform", "exact"),
    "scatterer": ("mode", "scatterer", "overkill"),
    "gamma-sweep": ("mode", "layer", "exact"),
    "custom": ("mode", "uniform", "exact"),
}


def _as_list(value):
    if value is None or isinstance(value, (list, tuple)):
        return value
    return [value]


def parse_complex(value) -> complex:
    if isinstance(value, complex):
        return value
    if isinstance(value, (int, float)):
        return complex(value)
    text = str(value).strip().replace(" ", "").replace("i", "j")
    return complex(text)


class ExperimentConfig(BaseModel):
    experiment: ExperimentKind = "custom"
    k: List[float] = Field(default_factory=lambda: [8.0])
    R: Optional[float] = None
    H: float = 1.0
    h: List[float] = Field(default_factory=lambda: [0.2])
    Np: List[int] = Field(default_factory=lambda: [7])
    M: List[int] = Field(default_factory=lambda: [15])
    gamma: List[float] = Field(default_factory=lambda: [0.0])
    N_f: int = Field(default=20, ge=0)

    incident: Optional[IncidentKind] = None
    mode: int = Field(default=0, ge=0)
    source: Optional[Tuple[float, float]] = None

    mesh: Optional[MeshKind] = None
    box: Tuple[float, float, float, float] = (-0.15, 0.15, 0.45, 0.75)
    n_inside: complex = 9 + 4j
    interior_factor: float = Field(default=1.0 / 3.0, gt=0, le=1)
    layer: Tuple[float, float] = (-0.1, 0.1)
    refine_levels: Optional[int] = Field(default=None, ge=1)
    edge_ratio: float = Field(default=settings.LAYER_EDGE_RATIO, gt=1)

    reference: Optional[ReferenceKind] = None
    overkill_extra_np: int = Field(default=4, ge=0)
    record_timing: bool = True
    out: Optional[str] = None

    model_config = {"extra": "forbid"}

    @field_validator("k", "h", "Np", "M", "gamma", mode="before")
    @classmethod
    def wrap_scalar(cls, value):
        return _as_list(value)

    @field_validator("n_inside", mode="before")
    @classmethod
    def coerce_complex(cls, value):
        return parse_complex(value)

    @model_validator(mode='after')
    def fill_defaults(self) -> 'ExperimentConfig':
        incident, mesh, reference = EXPERIMENT_DEFAULTS[self.experiment]
        if self.incident is None:
            self.incident = incident
        if self.mesh is None:
            self.mesh = mesh
        if self.reference is None:
            self.reference = "overkill" if self.mesh == "scatterer" else reference
        if self.reference == "overkill" and self.mesh == "layer":
            raise ValueError("overkill reference is only defined for uniform and scatterer meshes")
        if self.reference == "exact" and self.mesh == "scatterer":
            raise ValueError("an exact reference needs an empty guide; use reference=overkill with the scatterer mesh")

        if self.H <= 0 or (self.R is not None and self.R <= 0):
            raise ValueError("lengths R and H must be positive")
        for name in ("k", "h"):
            if not getattr(self, name) or any(v <= 0 for v in getattr(self, name)):
                raise ValueError(f"'{name}' must be a non-empty list of positive numbers")
        if not self.Np or any(v < 3 for v in self.Np):
            raise ValueError("every Np must be at least 3")
        if not self.M or any(v < 1 for v in self.M):
            raise ValueError("every M must be at least 1")
        if not self.gamma or any(v < 0 for v in self.gamma):
            raise ValueError("gamma values must be non-negative")
        if self.n_inside.real <= 0 or self.n_inside.imag < 0:
            raise ValueError("n_inside needs Re(n) > 0 and Im(n) >= 0")

        for k in self.k:
            j = round(k * self.H / math.pi)
            if abs(k - j * math.pi / self.H) < settings.CUTOFF_RTOL * k:
                raise ValueError(f"k={k} coincides with the cutoff wavenumber of mode {j}")
        return self

    def domain_length(self, k: float) -> float:
        if self.R is not None:
            return self.R
        return 2.0 * math.pi / k if self.experiment == "fundamental" else 1.0

    def source_point(self, R: float) -> Tuple[float, float]:
        if self.source is not None:
            return self.source
        return (-1.5 * R, 0.3 * self.H)


class ResultRow(BaseModel):
    experiment: str
    k: float
    R: float
    H: float
    h: float
    Np: int
    M: int
    gamma: float
    dofs: int = 0
    rel_l2_error: float = float("nan")
    residual: float = float("nan")
    cond_indicator: float = float("nan")
    wall_seconds: float = 0.0
    status: str = "ok"

    @property
    def ok(self) -> bool:
        return self.status == "ok"


class RateSummary(BaseModel):
    k: float
    Np: int
    M: int
    gamma: float
    slope: float
    points: int


class GammaSummary(BaseModel):
    k: float
    h: float
    Np: int
    gamma_opt: float
    rel_l2_error: float


class RunSummary(BaseModel):
    experiment: str
    rows: int
    failed: int
    rates: List[RateSummary] = Field(default_factory=list)
    gamma_opt: List[GammaSummary] = Field(default_factory=list)
