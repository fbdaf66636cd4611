"""
Zernike wavefront synthesis and least-squares fitting over a circular pupil.

Indices follow the OSA/ANSI single-index scheme and polynomials use ANSI
unit-variance normalization, so a weight is the RMS contribution of its mode
in radians.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Tuple

import numpy as np

from models.config import MAX_OSA_INDEX
from models.exceptions import DimensionError, IllPosedFitError, UnsupportedIndexError
from models.grids import PhaseMap, PupilGrid


@dataclass
class ZernikeWeights:
    """Sparse OSA index -> coefficient (radians). Absent indices are zero."""
    entries: Dict[int, float] = field(default_factory=dict)
    max_index: int = MAX_OSA_INDEX

    def __post_init__(self):
        for index in self.entries:
            if index < 0 or index > self.max_index:
                raise UnsupportedIndexError(
                    f"Zernike index {index} outside 0..{self.max_index}"
                )

    def get(self, index: int) -> float:
        return float(self.entries.get(index, 0.0))

    def as_vector(self) -> np.ndarray:
        vector = np.zeros(self.max_index + 1)
        for index, value in self.entries.items():
            vector[index] = value
        return vector

    @classmethod
    def from_vector(cls, vector: np.ndarray) -> "ZernikeWeights":
        return cls({i: float(v) for i, v in enumerate(vector)}, max_index=len(vector) - 1)

    def nonzero(self) -> Dict[int, float]:
        return {i: v for i, v in sorted(self.entries.items()) if v != 0.0}


# Target aberrations used throughout the simulations
PRESETS: Dict[str, ZernikeWeights] = {
    "zero": ZernikeWeights({}),
    "phase0": ZernikeWeights({2: 0.08, 4: 0.10, 5: 0.05, 7: 0.08}),
    "phase1": ZernikeWeights({4: 0.08, 8: 0.04, 12: 0.10, 19: 0.06, 27: 0.07}),
    "phase2": ZernikeWeights({3: 0.05, 13: 0.11, 17: 0.06}),
    "phase3": ZernikeWeights({14: 0.03, 16: 0.10, 24: 0.08}),
}


def osa_to_nm(i: int) -> Tuple[int, int]:
    """OSA single index -> (radial order n, azimuthal frequency m)."""
    if i < 0:
        raise UnsupportedIndexError(f"OSA index must be non-negative, got {i}")
    n = (math.isqrt(8 * i + 1) - 1) // 2
    m = 2 * i - n * (n + 2)
    return n, m


def nm_to_osa(n: int, m: int) -> int:
    return (n * (n + 2) + m) // 2


def _radial_coefficients(n: int, m: int) -> List[Tuple[int, float]]:
    m = abs(m)
    terms = []
    for s in range((n - m) // 2 + 1):
        coef = (-1) ** s * math.factorial(n - s) / (
            math.factorial(s)
            * math.factorial((n + m) // 2 - s)
            * math.factorial((n - m) // 2 - s)
        )
        terms.append((n - 2 * s, coef))
    return terms


def radial_polynomial(n: int, m: int, rho: np.ndarray) -> np.ndarray:
    result = np.zeros_like(rho)
    for power, coef in _radial_coefficients(n, m):
        result += coef * rho ** power
    return result


@lru_cache(maxsize=256)
def _basis_values(i: int, grid: PupilGrid, masked: bool = True) -> np.ndarray:
    n, m = osa_to_nm(i)
    rho, theta = grid.polar
    norm = math.sqrt(2 * (n + 1) / (2 if m == 0 else 1))
    if m >= 0:
        angular = np.cos(m * theta)
    else:
        angular = np.sin(-m * theta)
    values = norm * radial_polynomial(n, m, rho) * angular
    if masked:
        values[~grid.mask] = 0.0
    values.flags.writeable = False
    return values


def zernike_basis(i: int, grid: PupilGrid, max_index: int = MAX_OSA_INDEX) -> PhaseMap:
    """Evaluate the ANSI-normalized Zernike polynomial Z_i on the pupil, zero outside."""
    if i < 0 or i > max_index:
        raise UnsupportedIndexError(f"Zernike index {i} outside 0..{max_index}")
    return PhaseMap(_basis_values(i, grid).copy(), grid.pitch)


def synthesize_phase(weights: ZernikeWeights, grid: PupilGrid, extend: bool = False) -> PhaseMap:
    """Pixelwise weighted sum of Zernike modes.

    Zero outside the pupil unless extend is set, in which case the
    polynomials continue across the whole frame (a tilted beam filling the
    sensor has no phase step at the pupil rim).
    """
    phase = np.zeros(grid.resolution)
    for index, value in sorted(weights.entries.items()):
        if index > weights.max_index:
            raise UnsupportedIndexError(f"Zernike index {index} outside 0..{weights.max_index}")
        if value != 0.0:
            phase += value * _basis_values(index, grid, not extend)
    return PhaseMap(phase, grid.pitch)


@lru_cache(maxsize=16)
def _design_matrix(grid: PupilGrid, max_index: int) -> np.ndarray:
    mask = grid.mask
    columns = [_basis_values(i, grid)[mask] for i in range(max_index + 1)]
    matrix = np.stack(columns, axis=1)
    matrix.flags.writeable = False
    return matrix


def fit_weights(phase: PhaseMap, grid: PupilGrid, max_index: int = MAX_OSA_INDEX) -> ZernikeWeights:
    """Least-squares projection of a phase map onto modes 0..max_index over the pupil."""
    if phase.values.shape != tuple(grid.resolution):
        raise DimensionError(
            f"Phase shape {phase.values.shape} does not match grid {grid.resolution}"
        )
    if grid.pupil_pixels < max_index + 1:
        raise IllPosedFitError(
            f"{grid.pupil_pixels} pupil pixels cannot determine {max_index + 1} Zernike weights"
        )
    matrix = _design_matrix(grid, max_index)
    coefficients, *_ = np.linalg.lstsq(matrix, phase.values[grid.mask], rcond=None)
    return ZernikeWeights.from_vector(coefficients)


def resolve_preset(name: str) -> ZernikeWeights:
    key = name.strip().lower().replace(" ", "").replace("_", "")
    if key not in PRESETS:
        raise KeyError(name)
    return PRESETS[key]
