"""Request and response models for the HTTP service."""

from typing import Literal, Optional

from pydantic import BaseModel, Field


class ProfileRequest(BaseModel):
    gamma: float = Field(1.0, gt=0)
    ion_temp: float = Field(1.0, gt=0)
    wall_value: float = 1.0
    tol: float = Field(1e-10, gt=0)
    nodes: int = Field(4097, ge=9)


class ProfileResponse(BaseModel):
    decay_rate: float
    z: list[float]
    phi: list[float]
    dphi: list[float]
    n_layer: list[float]


class InitialData(BaseModel):
    preset: Literal["flat", "bump", "pulse"] = "bump"
    amplitude: float = 0.1
    center: Optional[float] = None
    width: Optional[float] = Field(None, gt=0)


class LimitRequest(BaseModel):
    ion_temp: float = Field(1.0, gt=0)
    domain_length: float = Field(1.0, gt=0)
    cells: int = Field(512, ge=16)
    bc: Literal["wall", "outflow"] = "wall"
    u_b: float = -0.3
    t_end: float = Field(0.2, gt=0)
    samples: int = Field(20, ge=2)
    cfl: float = Field(0.4, gt=0, le=0.9)
    initial: InitialData = InitialData()


class LimitResponse(BaseModel):
    times: list[float]
    mass: list[float]
    x: list[float]
    final_n: list[float]
    final_u: list[float]


class SimulateRequest(BaseModel):
    ion_temp: float = Field(1.0, gt=0)
    epsilon: float = Field(0.02, gt=0, le=1.0)
    wall_potential: float = -0.5
    bc: Literal["wall", "outflow"] = "wall"
    u_b: float = -0.3
    domain_length: float = Field(1.0, gt=0)
    interior_cells: int = Field(256, ge=16)
    grading_ratio: float = Field(1.1, gt=1.0, le=1.2)
    first_cell_scale: float = Field(1.0 / 24.0, gt=0)
    t_end: float = Field(0.2, gt=0)
    samples: int = Field(20, ge=2)
    cfl: float = Field(0.4, gt=0, le=0.9)
    well_prepared: bool = False
    expansion_order: Literal[0, 1] = 1
    initial: InitialData = InitialData()


class EnergySample(BaseModel):
    t: float
    kinetic: float
    ion_entropy: float
    electron_term: float
    field_term: float
    total: float


class SimulateResponse(BaseModel):
    times: list[float]
    energy: list[EnergySample]
    energy_drift: float
    mass_final: float
    near_wall_speed_warning: bool
    x: list[float]
    final_n: list[float]
    final_u: list[float]
    final_phi: list[float]


class EntropyRequest(BaseModel):
    ion_temp: float = Field(1.0, gt=0)
    epsilon: float = Field(0.02, gt=0, le=1.0)
    wall_potential: float = -0.5
    domain_length: float = Field(1.0, gt=0)
    interior_cells: int = Field(256, ge=16)
    limit_cells: int = Field(512, ge=16)
    grading_ratio: float = Field(1.1, gt=1.0, le=1.2)
    first_cell_scale: float = Field(1.0 / 24.0, gt=0)
    t_end: float = Field(0.2, gt=0)
    samples: int = Field(20, ge=2)
    cfl: float = Field(0.4, gt=0, le=0.9)
    expansion_order: Literal[0, 1] = 1
    initial: InitialData = InitialData()


class EntropyResponse(BaseModel):
    times: list[float]
    entropy: list[float]
    entropy_sup: float
    entropy_min: float


class StudyRequest(BaseModel):
    eps_list: list[float] = Field(min_length=3)
    ion_temp: float = Field(1.0, gt=0)
    wall_potential: float = -0.5
    domain_length: float = Field(1.0, gt=0)
    limit_cells: int = Field(512, ge=16)
    interior_cells: int = Field(256, ge=16)
    grading_ratio: float = Field(1.1, gt=1.0, le=1.2)
    first_cell_scale: float = Field(1.0 / 24.0, gt=0)
    t_end: float = Field(0.2, gt=0)
    samples: int = Field(20, ge=2)
    cfl: float = Field(0.4, gt=0, le=0.9)
    jobs: int = Field(1, ge=1, le=8)
    initial: InitialData = InitialData()


class StudyRecordModel(BaseModel):
    epsilon: float
    l2_n: float
    l2_u: float
    linf_n_bl: float
    linf_phi_bl: float
    entropy_sup: float


class RateFitModel(BaseModel):
    slope: float
    intercept: float
    r_squared: float
    points_used: int


class StudyResult(BaseModel):
    records: list[StudyRecordModel]
    fits: dict[str, RateFitModel]


class JobStatus(BaseModel):
    id: str
    state: Literal["queued", "running", "done", "failed"]
    error: Optional[str] = None
    result: Optional[StudyResult] = None
