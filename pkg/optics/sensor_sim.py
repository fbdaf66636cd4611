"""
Sensor degradation models.

Frame sensor: Poisson shot noise -> Gaussian readout noise -> clipping ->
quantization with a measurable floor.

Event sensor (endpoint model): Poisson on both defocus intensities -> floor
at the minimum measurable intensity -> per-pixel Gaussian threshold
fluctuation -> integer event counts truncated toward zero.

Event sensor (stepwise model): per-pixel reference log-intensity updated by
whole thresholds along an axial trajectory, emitting timestamped events.
"""

import math
from typing import List, Optional, Sequence, Tuple

import numpy as np

from models.events import EventPlane, EventRecord
from models.exceptions import DomainError, EventOrderError
from models.grids import IntensityMap, require_same_shape
from models.schemas import EvsConfig, FrameSensorConfig
from utils.logger import logger


def dynamic_range_db(cfg: FrameSensorConfig) -> float:
    return 20.0 * math.log10(cfg.max_measurable / cfg.min_measurable)


def simulate_frame(ideal: IntensityMap, cfg: FrameSensorConfig, seed: Optional[int] = None) -> IntensityMap:
    """Degrade an ideal intensity map into a frame-sensor reading."""
    rng = np.random.default_rng(seed)
    values = np.asarray(ideal.values, dtype=np.float64)
    if cfg.enable_poisson:
        values = rng.poisson(values).astype(np.float64)
    if cfg.readout_sigma > 0:
        values = values + rng.normal(0.0, cfg.readout_sigma, size=values.shape)
    clipped = np.count_nonzero(values > cfg.max_measurable)
    if clipped:
        logger.debug(f"Frame sensor clipped {clipped} pixels at {cfg.max_measurable:g}")
    values = np.clip(values, 0.0, cfg.max_measurable)

    steps = values / cfg.quant_step
    if cfg.quant_mode == "nearest":
        steps = np.floor(steps + 0.5)
    else:
        steps = np.floor(steps)
    values = steps * cfg.quant_step
    values[values < cfg.min_measurable] = 0.0
    return IntensityMap(values, ideal.pitch, ideal.z_label, ideal.z)


def sample_thresholds(cfg: EvsConfig, shape: Tuple[int, ...], rng: np.random.Generator) -> np.ndarray:
    """Per-pixel contrast thresholds mu + N(0, mu_sigma), truncated from below.

    Draws at or under max(mu - mu_clip_sigmas * mu_sigma, 0) are redrawn.
    """
    if cfg.mu_sigma == 0:
        return np.full(shape, cfg.mu)
    floor = max(cfg.mu - cfg.mu_clip_sigmas * cfg.mu_sigma, 0.0)
    thresholds = cfg.mu + rng.normal(0.0, cfg.mu_sigma, size=shape)
    bad = thresholds <= floor
    redraws = 0
    while np.any(bad):
        redraws += int(np.count_nonzero(bad))
        thresholds[bad] = cfg.mu + rng.normal(0.0, cfg.mu_sigma, size=int(np.count_nonzero(bad)))
        bad = thresholds <= floor
    if redraws:
        logger.debug(f"Redrew {redraws} contrast thresholds at or below {floor:g}")
    return thresholds


def _delta_from_maps(i_minus: IntensityMap, i_plus: IntensityMap) -> Optional[float]:
    if i_minus.z is None or i_plus.z is None:
        return None
    return (i_plus.z - i_minus.z) / 2.0


def simulate_event_plane(
    i_minus: IntensityMap,
    i_plus: IntensityMap,
    cfg: EvsConfig,
    seed: Optional[int] = None,
    delta: Optional[float] = None,
    duration: float = 1.0,
) -> EventPlane:
    """Net event counts between the two defocus planes.

    Args:
        i_minus: Ideal intensity at focus - delta
        i_plus: Ideal intensity at focus + delta
        cfg: Event sensor settings
        seed: RNG seed
        delta: Half translation distance; inferred from the maps' z when omitted
        duration: Translation time 2T in seconds

    Returns:
        EventPlane with integer counts and the nominal threshold
    """
    require_same_shape(i_minus.values, i_plus.values, "defocus intensities")
    if delta is None:
        delta = _delta_from_maps(i_minus, i_plus)
    if delta is None or delta <= 0:
        raise DomainError("Event plane needs a positive delta (pass delta= or set z on both maps)")

    rng = np.random.default_rng(seed)
    thresholds = sample_thresholds(cfg, i_minus.shape, rng)
    minus = np.asarray(i_minus.values, dtype=np.float64)
    plus = np.asarray(i_plus.values, dtype=np.float64)
    if cfg.enable_poisson:
        minus = rng.poisson(minus).astype(np.float64)
        plus = rng.poisson(plus).astype(np.float64)
    minus = np.maximum(minus, cfg.min_measurable)
    plus = np.maximum(plus, cfg.min_measurable)

    counts = np.trunc((np.log(plus) - np.log(minus)) / thresholds).astype(np.int64)
    return EventPlane(counts, cfg.mu, float(delta), float(duration), i_minus.pitch)


def log_interpolated_trajectory(
    i_minus: IntensityMap,
    i_plus: IntensityMap,
    samples: int,
) -> List[Tuple[float, IntensityMap]]:
    """Trajectory whose log-intensity moves linearly between the two endpoint maps.

    The endpoints are reused verbatim so that accumulation over the trajectory
    sees exactly the same first and last intensities as the endpoint model.
    """
    if samples < 2:
        raise DomainError("A trajectory needs at least two samples")
    delta = _delta_from_maps(i_minus, i_plus) or 1.0
    z0 = i_minus.z if i_minus.z is not None else -delta
    log_minus = np.log(np.maximum(i_minus.values, np.finfo(float).tiny))
    log_plus = np.log(np.maximum(i_plus.values, np.finfo(float).tiny))
    trajectory = [(z0, i_minus)]
    for s in np.linspace(0.0, 1.0, samples)[1:-1]:
        z = z0 + 2.0 * delta * s
        values = np.exp((1.0 - s) * log_minus + s * log_plus)
        trajectory.append((float(z), IntensityMap(values, i_minus.pitch, "trajectory", float(z))))
    trajectory.append((z0 + 2.0 * delta, i_plus))
    return trajectory


def simulate_event_stream(
    trajectory: Sequence[Tuple[float, IntensityMap]],
    cfg: EvsConfig,
    T: float = 0.5,
    seed: Optional[int] = None,
) -> List[EventRecord]:
    """Stepwise event generation along a constant-velocity axial translation.

    Each pixel keeps the log-intensity of its last event (the first sample
    initially). When a sample departs from it by at least one threshold,
    trunc(departure / threshold) events fire and the reference advances by
    that many thresholds. Event times are the linearly interpolated crossing
    times, mapped from z by t = (z - z_start) * T / delta.

    Raises:
        EventOrderError: If the trajectory is not sorted in z
    """
    if len(trajectory) < 2:
        raise DomainError("A trajectory needs at least two samples")
    zs = [z for z, _ in trajectory]
    if any(b < a for a, b in zip(zs, zs[1:])):
        raise EventOrderError("Trajectory samples must be sorted by z")
    z_start, z_end = zs[0], zs[-1]
    delta = (z_end - z_start) / 2.0
    if delta <= 0:
        raise DomainError("Trajectory must span a positive axial distance")

    shape = trajectory[0][1].shape
    rng = np.random.default_rng(seed)
    thresholds = sample_thresholds(cfg, shape, rng)

    def observe(intensity: IntensityMap) -> np.ndarray:
        require_same_shape(intensity.values, np.empty(shape), "trajectory samples")
        values = np.asarray(intensity.values, dtype=np.float64)
        if cfg.enable_poisson:
            values = rng.poisson(values).astype(np.float64)
        return np.log(np.maximum(values, cfg.min_measurable))

    reference = observe(trajectory[0][1])
    previous = reference.copy()
    t_previous = 0.0
    events: List[EventRecord] = []
    for z, intensity in trajectory[1:]:
        t = (z - z_start) * T / delta
        current = observe(intensity)
        n = np.trunc((current - reference) / thresholds).astype(np.int64)
        rows, cols = np.nonzero(n)
        for row, col in zip(rows.tolist(), cols.tolist()):
            count = int(n[row, col])
            polarity = 1 if count > 0 else -1
            mu = thresholds[row, col]
            start, stop = previous[row, col], current[row, col]
            span = stop - start
            for k in range(1, abs(count) + 1):
                level = reference[row, col] + polarity * k * mu
                fraction = (level - start) / span if span != 0 else 1.0
                fraction = min(max(fraction, 0.0), 1.0)
                events.append(EventRecord(t_previous + fraction * (t - t_previous), col, row, polarity))
        reference = reference + n * thresholds
        previous = current
        t_previous = t

    events.sort(key=lambda e: e.t)
    logger.debug(f"Stepwise simulator emitted {len(events)} events over {len(trajectory)} samples")
    return events
