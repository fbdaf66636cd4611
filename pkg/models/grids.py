"""
Grid data models: pupil geometry, phase and intensity maps, coherent fields
and axial derivative maps.

All grids are 2D numpy arrays indexed [row, col]; pitch is in meters/pixel.
"""

import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Optional, Tuple

import numpy as np

from models.config import ERROR_MESSAGES
from models.exceptions import DimensionError, DomainError


@dataclass(frozen=True)
class PupilGrid:
    """Sampling geometry of the focus plane and the circular pupil on it."""
    resolution: Tuple[int, int]
    pitch: float
    pupil_diameter: float

    def __post_init__(self):
        rows, cols = self.resolution
        if rows <= 0 or cols <= 0:
            raise DimensionError(f"Resolution must be positive, got {self.resolution}")
        if self.pitch <= 0 or self.pupil_diameter <= 0:
            raise DimensionError("Pitch and pupil diameter must be positive")
        frame = min(rows, cols) * self.pitch
        # Tolerate float noise in the product
        if self.pupil_diameter > frame * (1 + 1e-12):
            raise DimensionError(
                f"Pupil diameter {self.pupil_diameter:g} m exceeds frame width {frame:g} m"
            )

    @cached_property
    def coordinates(self) -> Tuple[np.ndarray, np.ndarray]:
        """Pixel-center (x, y) coordinates in meters, origin at grid center, y up."""
        rows, cols = self.resolution
        x = (np.arange(cols) - (cols - 1) / 2.0) * self.pitch
        y = ((rows - 1) / 2.0 - np.arange(rows)) * self.pitch
        return np.meshgrid(x, y, indexing="xy")

    @cached_property
    def polar(self) -> Tuple[np.ndarray, np.ndarray]:
        """Normalized radius rho (1 at the pupil edge) and azimuth theta."""
        x, y = self.coordinates
        radius = self.pupil_diameter / 2.0
        return np.hypot(x, y) / radius, np.arctan2(y, x)

    @cached_property
    def mask(self) -> np.ndarray:
        rho, _ = self.polar
        mask = rho <= 1.0
        mask.flags.writeable = False
        return mask

    @property
    def pupil_pixels(self) -> int:
        return int(np.count_nonzero(self.mask))


@dataclass
class PhaseMap:
    """Phase in radians on a regular grid."""
    values: np.ndarray
    pitch: float

    @property
    def shape(self) -> Tuple[int, int]:
        return self.values.shape


@dataclass
class IntensityMap:
    """Non-negative intensity in linear arbitrary units.

    z is the axial offset from the focus plane in meters when known;
    z_label is a free-form tag such as "focus", "minus" or "plus".
    """
    values: np.ndarray
    pitch: float
    z_label: str = "arbitrary"
    z: Optional[float] = None

    def __post_init__(self):
        if np.any(self.values < 0):
            raise DomainError("Intensity values must be non-negative")

    @property
    def shape(self) -> Tuple[int, int]:
        return self.values.shape

    def scaled(self, factor: float) -> "IntensityMap":
        return IntensityMap(self.values * factor, self.pitch, self.z_label, self.z)


@dataclass
class ComplexField:
    """Coherent complex amplitude sampled on a regular grid."""
    amplitude: np.ndarray
    pitch: float
    wavelength: float

    def __post_init__(self):
        if self.wavelength <= 0:
            raise DomainError(f"Wavelength must be positive, got {self.wavelength}")
        if self.pitch <= 0:
            raise DomainError(f"Pitch must be positive, got {self.pitch}")

    @property
    def wavenumber(self) -> float:
        return 2.0 * math.pi / self.wavelength

    @property
    def shape(self) -> Tuple[int, int]:
        return self.amplitude.shape

    def energy(self) -> float:
        return float(np.sum(np.abs(self.amplitude) ** 2))


class DerivativeKind(str, Enum):
    LINEAR = "linear"
    LOGARITHMIC = "logarithmic"


@dataclass
class DerivativeMap:
    """Axial derivative estimate.

    LINEAR holds dI/dz in intensity/m, LOGARITHMIC holds d(log I)/dz in 1/m.
    """
    values: np.ndarray
    kind: DerivativeKind
    pitch: float


def require_same_shape(a: np.ndarray, b: np.ndarray, what: str = "grids") -> None:
    if a.shape != b.shape:
        raise DimensionError(f"{ERROR_MESSAGES['shape_mismatch']} ({what}): {a.shape} vs {b.shape}")
