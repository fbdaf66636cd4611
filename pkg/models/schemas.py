"""
Pydantic settings models for sensors, the Poisson solver and experiments.
"""

import math
from typing import Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from models.config import (
    DEFAULT_C_GRID,
    DEFAULT_DELTA_SWEEP,
    DEFAULT_DURATION,
    DEFAULT_EVS_MIN,
    DEFAULT_FRAME_MAX,
    DEFAULT_FRAME_MIN,
    DEFAULT_INTENSITY_POINTS,
    DEFAULT_INTENSITY_RANGE,
    DEFAULT_MU,
    DEFAULT_MU_CLIP_SIGMAS,
    DEFAULT_MU_SIGMA,
    DEFAULT_PITCH,
    DEFAULT_PUPIL_DIAMETER,
    DEFAULT_QUANT_STEP,
    DEFAULT_READOUT_SIGMA,
    DEFAULT_RESOLUTION,
    DEFAULT_SEEDS,
    DEFAULT_TWO_DELTA,
    DEFAULT_WAVELENGTH,
    MAX_OSA_INDEX,
    OUTPUT_DIR,
    SWEEP_WORKERS,
)
from models.exceptions import ConfigurationError

TABLE_PHASES = ["phase0", "phase1", "phase2", "phase3"]


def default_intensity_levels() -> List[float]:
    low, high = DEFAULT_INTENSITY_RANGE
    return [float(v) for v in np.logspace(math.log10(low), math.log10(high), DEFAULT_INTENSITY_POINTS)]


class FrameSensorConfig(BaseModel):
    """Frame (image) sensor degradation: Poisson, readout noise, clipping, quantization."""
    readout_sigma: float = Field(DEFAULT_READOUT_SIGMA, ge=0)
    quant_step: float = Field(DEFAULT_QUANT_STEP, gt=0)
    min_measurable: float = Field(DEFAULT_FRAME_MIN, gt=0)
    max_measurable: float = Field(DEFAULT_FRAME_MAX, gt=0)
    pitch: float = Field(DEFAULT_PITCH, gt=0)
    resolution: Tuple[int, int] = DEFAULT_RESOLUTION
    enable_poisson: bool = True
    quant_mode: Literal["nearest", "floor"] = "nearest"

    @model_validator(mode="after")
    def _check_range(self) -> "FrameSensorConfig":
        if self.min_measurable > self.max_measurable:
            raise ValueError("min_measurable must not exceed max_measurable")
        return self

    def noise_free(self) -> "FrameSensorConfig":
        return self.model_copy(update={"enable_poisson": False, "readout_sigma": 0.0})


class EvsConfig(BaseModel):
    """Event sensor degradation: Poisson, threshold fluctuation, integer counts."""
    mu: float = Field(DEFAULT_MU, gt=0)
    mu_sigma: float = Field(DEFAULT_MU_SIGMA, ge=0)
    mu_clip_sigmas: float = Field(DEFAULT_MU_CLIP_SIGMAS, gt=0)
    min_measurable: float = Field(DEFAULT_EVS_MIN, gt=0)
    pitch: float = Field(DEFAULT_PITCH, gt=0)
    resolution: Tuple[int, int] = DEFAULT_RESOLUTION
    enable_poisson: bool = True

    def noise_free(self) -> "EvsConfig":
        return self.model_copy(update={"enable_poisson": False, "mu_sigma": 0.0})


class SolveConfig(BaseModel):
    """Regularized Neumann Poisson solve shared by TIE and TEE."""
    wavenumber: float = Field(2.0 * math.pi / DEFAULT_WAVELENGTH, gt=0)
    reg_constant: Optional[float] = Field(None, ge=0)
    auto_c: bool = True
    candidate_grid: List[float] = Field(default_factory=lambda: list(DEFAULT_C_GRID))
    frequency_units: Literal["physical", "pixel", "cycles"] = "cycles"
    boundary: Literal["neumann"] = "neumann"

    @field_validator("candidate_grid")
    @classmethod
    def _positive_candidates(cls, value: List[float]) -> List[float]:
        if any(c <= 0 for c in value):
            raise ValueError("all regularization candidates must be positive")
        return value


class ExperimentConfig(BaseModel):
    """Everything one simulation or ingestion run needs."""
    target: str = "phase0"
    weights: Optional[Dict[int, float]] = None
    wavelength: float = Field(DEFAULT_WAVELENGTH, gt=0)
    pupil_diameter: float = Field(DEFAULT_PUPIL_DIAMETER, gt=0)
    resolution: Tuple[int, int] = DEFAULT_RESOLUTION
    pitch: float = Field(DEFAULT_PITCH, gt=0)
    two_delta: float = Field(DEFAULT_TWO_DELTA, gt=0)
    intensity: float = Field(2.0, gt=0)
    intensity_levels: List[float] = Field(default_factory=default_intensity_levels, min_length=1)
    delta_values: List[float] = Field(default_factory=lambda: list(DEFAULT_DELTA_SWEEP), min_length=1)
    phases: List[str] = Field(default_factory=lambda: list(TABLE_PHASES), min_length=1)
    seeds: List[int] = Field(default_factory=lambda: list(DEFAULT_SEEDS), min_length=1)
    seed: int = 0
    method: Literal["tie", "tee", "both"] = "both"
    noise_free: bool = False
    max_index: int = Field(MAX_OSA_INDEX, ge=0)
    pad_mode: Literal["edge", "zero"] = "zero"
    extend_target: bool = False
    workers: int = Field(SWEEP_WORKERS, ge=1)
    output_dir: str = OUTPUT_DIR
    window_start: Optional[float] = None
    window_end: Optional[float] = None
    event_samples: int = Field(64, ge=2)
    duration: float = Field(DEFAULT_DURATION, gt=0)
    reference: Optional[str] = None
    frame: FrameSensorConfig = Field(default_factory=FrameSensorConfig)
    evs: EvsConfig = Field(default_factory=EvsConfig)
    solve: SolveConfig = Field(default_factory=SolveConfig)

    @field_validator("intensity_levels", "delta_values")
    @classmethod
    def _positive_list(cls, value: List[float]) -> List[float]:
        if any(v <= 0 for v in value):
            raise ValueError("values must be positive")
        return value

    @model_validator(mode="after")
    def _check_weight_indices(self) -> "ExperimentConfig":
        if self.weights:
            bad = sorted(i for i in self.weights if i < 0 or i > self.max_index)
            if bad:
                raise ValueError(
                    f"Zernike indices {bad} outside 0..{self.max_index}; raise max_index to use them"
                )
        return self

    @model_validator(mode="after")
    def _sync_geometry(self) -> "ExperimentConfig":
        rows, cols = self.resolution
        if rows <= 0 or cols <= 0:
            raise ValueError("resolution must be positive")
        if self.pupil_diameter > min(rows, cols) * self.pitch * (1 + 1e-12):
            raise ValueError("pupil_diameter exceeds the frame")
        for name in ("frame", "evs"):
            sensor = getattr(self, name)
            explicit = sensor.model_fields_set
            for key in ("resolution", "pitch"):
                wanted = getattr(self, key)
                if getattr(sensor, key) == wanted:
                    continue
                if key in explicit:
                    raise ValueError(f"{name}.{key} does not match experiment {key}")
                sensor = sensor.model_copy(update={key: wanted})
            setattr(self, name, sensor)
        wavenumber = 2.0 * math.pi / self.wavelength
        if self.solve.wavenumber != wavenumber:
            self.solve = self.solve.model_copy(update={"wavenumber": wavenumber})
        if (
            self.window_start is not None
            and self.window_end is not None
            and self.window_start >= self.window_end
        ):
            raise ValueError("window_start must precede window_end")
        return self

    @property
    def delta(self) -> float:
        return self.two_delta / 2.0

    def frame_sensor(self) -> FrameSensorConfig:
        return self.frame.noise_free() if self.noise_free else self.frame

    def event_sensor(self) -> EvsConfig:
        return self.evs.noise_free() if self.noise_free else self.evs

    def methods(self) -> List[str]:
        return ["tie", "tee"] if self.method == "both" else [self.method]

    def echo(self) -> Dict[str, object]:
        """Scalar parameters echoed into reports."""
        return {
            "target": self.target,
            "wavelength": self.wavelength,
            "pupil_diameter": self.pupil_diameter,
            "resolution": list(self.resolution),
            "pitch": self.pitch,
            "two_delta": self.two_delta,
            "noise_free": self.noise_free,
            "pad_mode": self.pad_mode,
            "extend_target": self.extend_target,
            "frame": self.frame_sensor().model_dump(mode="json"),
            "evs": self.event_sensor().model_dump(mode="json"),
            "solve": self.solve.model_dump(mode="json", exclude={"candidate_grid"}),
        }


def build_experiment_config(data: Dict[str, object]) -> ExperimentConfig:
    """Validate a nested settings dict, turning pydantic errors into ConfigurationError."""
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        fields = sorted({".".join(str(p) for p in err["loc"]) or "<root>" for err in e.errors()})
        raise ConfigurationError(f"Invalid configuration in {', '.join(fields)}: {e}") from e
