"""
Coherent field construction and Fresnel (transfer-function) propagation.

Pitch stays fixed between planes. Positive distances move toward the end
position of the sensor translation (focus + delta).
"""

import math
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import fft as sfft

from models.exceptions import DomainError, SamplingError
from models.grids import ComplexField, IntensityMap, PhaseMap

PAD_MODES = {"edge": "edge", "zero": "constant"}


def field_from_phase(phase: PhaseMap, intensity_level: float, wavelength: float) -> ComplexField:
    """Uniform-intensity field sqrt(I) * exp(j * phase)."""
    if not intensity_level > 0:
        raise DomainError(f"Intensity level must be positive, got {intensity_level}")
    amplitude = math.sqrt(intensity_level) * np.exp(1j * phase.values)
    return ComplexField(amplitude, phase.pitch, wavelength)


def intensity_of(field: ComplexField, z_label: str = "arbitrary", z: Optional[float] = None) -> IntensityMap:
    u = field.amplitude
    return IntensityMap(u.real ** 2 + u.imag ** 2, field.pitch, z_label, z)


def padded_shape(shape: Tuple[int, int]) -> Tuple[int, int]:
    """At least twice the linear size, rounded up to a fast FFT length."""
    return tuple(sfft.next_fast_len(2 * n) for n in shape)


def _pad_widths(shape: Tuple[int, int]) -> List[Tuple[int, int]]:
    widths = []
    for n, p in zip(shape, padded_shape(shape)):
        before = (p - n) // 2
        widths.append((before, p - n - before))
    return widths


def pad_field(field: ComplexField, pad_mode: str = "zero") -> ComplexField:
    """Symmetric padding to the propagation domain."""
    if pad_mode not in PAD_MODES:
        raise DomainError(f"Unknown pad mode '{pad_mode}', expected one of {sorted(PAD_MODES)}")
    padded = np.pad(field.amplitude, _pad_widths(field.shape), mode=PAD_MODES[pad_mode])
    return ComplexField(padded, field.pitch, field.wavelength)


def max_distance(shape: Tuple[int, int], pitch: float, wavelength: float) -> float:
    """Largest |z| for which the transfer-function chirp is sampled without aliasing."""
    return min(shape) * pitch ** 2 / wavelength


def _build_transfer(shape: Tuple[int, int], pitch: float, wavelength: float, distance: float) -> np.ndarray:
    fy = sfft.fftfreq(shape[0], d=pitch)
    fx = sfft.fftfreq(shape[1], d=pitch)
    chirp = -math.pi * wavelength * distance * (fy[:, None] ** 2 + fx[None, :] ** 2)
    k = 2.0 * math.pi / wavelength
    transfer = np.exp(1j * (k * distance + chirp))
    transfer.flags.writeable = False
    return transfer


# One padded 539x539 transfer function is ~19 MB
_transfer_function = lru_cache(maxsize=8)(_build_transfer)


def fresnel_propagate(
    field: ComplexField,
    distance: float,
    pad_mode: str = "zero",
    crop: bool = True,
) -> ComplexField:
    """Propagate a field by a signed distance with the Fresnel transfer function.

    Args:
        field: Input field at the source plane
        distance: Signed propagation distance in meters
        pad_mode: "zero" pads with darkness so the padded-domain energy
            equals the input energy; "edge" continues the border values
        crop: If False, return the padded-domain field

    Returns:
        Propagated field with the same pitch and wavelength

    Raises:
        SamplingError: If the chirp aliases at the padded grid's Nyquist frequency
    """
    padded = pad_field(field, pad_mode)
    if distance == 0:
        out = padded.amplitude.copy()
    else:
        limit = max_distance(padded.shape, field.pitch, field.wavelength)
        if abs(distance) > limit:
            raise SamplingError(
                f"|distance| {abs(distance):g} m exceeds the aliasing-free limit {limit:g} m "
                f"for {padded.shape} samples at {field.pitch:g} m pitch"
            )
        transfer = _transfer_function(padded.shape, field.pitch, field.wavelength, float(distance))
        out = sfft.ifft2(sfft.fft2(padded.amplitude) * transfer)
    if crop:
        (top, _), (left, _) = _pad_widths(field.shape)
        rows, cols = field.shape
        out = out[top:top + rows, left:left + cols]
    return ComplexField(out, field.pitch, field.wavelength)


def propagate_planes(
    field: ComplexField,
    distances: Sequence[float],
    pad_mode: str = "zero",
) -> List[Tuple[float, IntensityMap]]:
    """Intensity at several axial offsets, sharing one forward FFT."""
    padded = pad_field(field, pad_mode)
    spectrum = sfft.fft2(padded.amplitude)
    (top, _), (left, _) = _pad_widths(field.shape)
    rows, cols = field.shape
    limit = max_distance(padded.shape, field.pitch, field.wavelength)
    planes = []
    for distance in distances:
        if abs(distance) > limit:
            raise SamplingError(f"|distance| {abs(distance):g} m exceeds the aliasing-free limit {limit:g} m")
        if distance == 0:
            u = padded.amplitude
        else:
            transfer = _transfer_function(padded.shape, field.pitch, field.wavelength, float(distance))
            u = sfft.ifft2(spectrum * transfer)
        u = u[top:top + rows, left:left + cols]
        cropped = ComplexField(u, field.pitch, field.wavelength)
        planes.append((float(distance), intensity_of(cropped, z_label=f"z={distance:+.6g}", z=float(distance))))
    return planes
