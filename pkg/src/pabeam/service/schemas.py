"""Pydantic request/response models for the beamforming service.

Binary payloads (PARF frames, PAIM images, PGM renders) travel base64-encoded
inside JSON so responses stay byte-exact end to end.
"""

from typing import List, Literal, Optional

from pydantic import BaseModel, Field


class RoiModel(BaseModel):
    x_lo: float
    x_hi: float
    z_lo: float
    z_hi: float


class SimulateRequest(BaseModel):
    config_text: str
    seed: Optional[int] = None


class SimulateResponse(BaseModel):
    frame_b64: str
    sha256: str
    num_elements: int
    num_samples: int
    sampling_freq_hz: float
    sound_speed_mps: float
    truncated_targets: List[int] = Field(default_factory=list)


class BeamformRequest(BaseModel):
    config_text: str
    frame_b64: str
    method: Optional[Literal["das", "dmas", "nl"]] = None
    p: Optional[int] = None
    apply_filter: Optional[bool] = None
    filter_lo_hz: Optional[float] = None
    filter_hi_hz: Optional[float] = None
    dynamic_range_db: Optional[float] = None


class BeamformResponse(BaseModel):
    method: str
    p: Optional[int]
    nx: int
    nz: int
    raw_b64: str
    filtered_b64: Optional[str] = None
    envelope_b64: str
    log_b64: str
    pgm_b64: str


class MetricsRequest(BaseModel):
    config_text: str
    envelope_b64: str
    log_b64: str
    target_rois: Optional[List[RoiModel]] = None
    noise_roi: Optional[RoiModel] = None
    depths_m: Optional[List[float]] = None
    method: Optional[str] = None
    p: Optional[int] = None


class ProfilePayload(BaseModel):
    depth_m: float
    csv: str


class MetricsResponse(BaseModel):
    metrics_csv: str
    profiles: List[ProfilePayload]


class SweepRequest(BaseModel):
    config_text: str
    p_list: List[int]
    frame_b64: Optional[str] = None
    seed: Optional[int] = None
    target_rois: Optional[List[RoiModel]] = None
    noise_roi: Optional[RoiModel] = None
    depths_m: Optional[List[float]] = None


class SweepItemPayload(BaseModel):
    p: int
    envelope_b64: str
    log_b64: str
    pgm_b64: str


class SweepResponse(BaseModel):
    items: List[SweepItemPayload]
    metrics_csv: str


class BenchRequest(BaseModel):
    methods: List[str] = Field(default_factory=lambda: ["das", "dmas", "nl:5"])
    element_counts: List[int] = Field(default_factory=lambda: [16, 32, 64, 128])
    repeats: int = 5
    seed: int = 0
    nx: int = 256
    nz: int = 256
    parallel: bool = False


class BenchRow(BaseModel):
    method: str
    p: Optional[int]
    num_elements: int
    grid_pixels: int
    repeats: int
    median_seconds: float
    ops_per_pixel: int
    parallel: bool


class BenchResponse(BaseModel):
    results: List[BenchRow]
    csv: str


class HealthResponse(BaseModel):
    status: str
    service: str
    version: str


class ErrorBody(BaseModel):
    error: str
    kind: Literal["usage", "data"]
