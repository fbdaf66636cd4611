"""
Tests for the frame sensor and event sensor degradation models.
"""

import math

import numpy as np
import pytest
from scipy import stats

from models.events import EventStream
from models.exceptions import DimensionError, EventOrderError
from models.grids import IntensityMap
from models.schemas import EvsConfig, FrameSensorConfig
from optics.sensor_sim import (
    dynamic_range_db,
    log_interpolated_trajectory,
    sample_thresholds,
    simulate_event_plane,
    simulate_event_stream,
    simulate_frame,
)
from utils.events_io import accumulate

PITCH = 6.4e-6
QUIET_FRAME = FrameSensorConfig(enable_poisson=False, readout_sigma=0.0)
QUIET_EVS = EvsConfig(enable_poisson=False, mu_sigma=0.0)


def _map(values, z=None) -> IntensityMap:
    return IntensityMap(np.asarray(values, dtype=float), PITCH, "test", z)


def _uniform(value: float, shape=(4, 4), z=None) -> IntensityMap:
    return _map(np.full(shape, value), z)


# ============================================================================
# Frame sensor
# ============================================================================

def test_frame_rounds_to_nearest_step():
    assert simulate_frame(_uniform(2.4), QUIET_FRAME).values[0, 0] == 2.0
    assert simulate_frame(_uniform(2.6), QUIET_FRAME).values[0, 0] == 3.0


def test_frame_floor_mode():
    cfg = QUIET_FRAME.model_copy(update={"quant_mode": "floor"})
    assert simulate_frame(_uniform(2.6), cfg).values[0, 0] == 2.0


def test_frame_drops_values_below_minimum():
    assert simulate_frame(_uniform(0.4), QUIET_FRAME).values[0, 0] == 0.0


def test_frame_clips_at_ceiling():
    assert simulate_frame(_uniform(1e6), QUIET_FRAME).values[0, 0] == 3350.0


def test_default_ceiling_matches_dynamic_range():
    assert dynamic_range_db(FrameSensorConfig()) == pytest.approx(70.5, abs=0.01)


def test_frame_poisson_mean():
    cfg = FrameSensorConfig(readout_sigma=0.0)
    frame = simulate_frame(_uniform(100.0, shape=(100, 1000)), cfg, seed=11)
    assert frame.values.mean() == pytest.approx(100.0, abs=1.0)


def test_frame_is_deterministic_per_seed():
    ideal = _uniform(5.0, shape=(32, 32))
    a = simulate_frame(ideal, FrameSensorConfig(), seed=4)
    b = simulate_frame(ideal, FrameSensorConfig(), seed=4)
    np.testing.assert_array_equal(a.values, b.values)


def test_frame_does_not_modify_input():
    ideal = _uniform(0.3, shape=(8, 8))
    simulate_frame(ideal, QUIET_FRAME)
    np.testing.assert_array_equal(ideal.values, 0.3)


# ============================================================================
# Event plane
# ============================================================================

def test_equal_endpoints_give_no_events():
    plane = simulate_event_plane(_uniform(3.0), _uniform(3.0), QUIET_EVS, delta=0.02)
    assert not plane.counts.any()


def test_log_ratio_one_gives_ten_events():
    plane = simulate_event_plane(_uniform(1.0), _uniform(math.e), QUIET_EVS, delta=0.02)
    np.testing.assert_array_equal(plane.counts, 10)
    assert plane.mu == 0.1
    assert plane.delta == 0.02


def test_partial_threshold_does_not_fire():
    plane = simulate_event_plane(_uniform(1.0), _uniform(math.exp(0.55)), QUIET_EVS, delta=0.02)
    np.testing.assert_array_equal(plane.counts, 5)
    negative = simulate_event_plane(_uniform(math.exp(0.55)), _uniform(1.0), QUIET_EVS, delta=0.02)
    np.testing.assert_array_equal(negative.counts, -5)


def test_dark_values_are_floored():
    floored = simulate_event_plane(_uniform(1.0), _uniform(0.05), QUIET_EVS, delta=0.02)
    at_floor = simulate_event_plane(_uniform(1.0), _uniform(0.1), QUIET_EVS, delta=0.02)
    np.testing.assert_array_equal(floored.counts, at_floor.counts)
    assert floored.counts[0, 0] == -23


def test_delta_is_inferred_from_map_positions():
    plane = simulate_event_plane(_uniform(1.0, z=-0.02), _uniform(2.0, z=0.02), QUIET_EVS)
    assert plane.delta == pytest.approx(0.02)


def test_shape_mismatch_is_rejected():
    with pytest.raises(DimensionError):
        simulate_event_plane(_uniform(1.0, (4, 4)), _uniform(1.0, (4, 5)), QUIET_EVS, delta=0.02)


def test_counts_are_monotone_in_plus_intensity():
    minus = _uniform(1.0, shape=(1, 50))
    plus = _map(np.linspace(0.2, 5.0, 50)[None, :])
    counts = simulate_event_plane(minus, plus, QUIET_EVS, delta=0.02).counts[0]
    assert np.all(np.diff(counts) >= 0)


def test_scale_invariance_without_noise():
    rng = np.random.default_rng(5)
    minus = _map(rng.uniform(0.5, 2.0, (16, 16)))
    plus = _map(rng.uniform(0.5, 2.0, (16, 16)))
    base = simulate_event_plane(minus, plus, QUIET_EVS, delta=0.02).counts
    scaled = simulate_event_plane(minus.scaled(50.0), plus.scaled(50.0), QUIET_EVS, delta=0.02).counts
    np.testing.assert_array_equal(base, scaled)


def test_event_plane_is_deterministic_per_seed():
    minus, plus = _uniform(2.0, (16, 16)), _uniform(3.0, (16, 16))
    a = simulate_event_plane(minus, plus, EvsConfig(), seed=9, delta=0.02)
    b = simulate_event_plane(minus, plus, EvsConfig(), seed=9, delta=0.02)
    np.testing.assert_array_equal(a.counts, b.counts)


def test_thresholds_are_positive():
    cfg = EvsConfig(mu=0.1, mu_sigma=0.2)
    thresholds = sample_thresholds(cfg, (200, 200), np.random.default_rng(0))
    assert thresholds.min() > 0


def test_thresholds_are_truncated_below_mu():
    cfg = EvsConfig(mu=0.1, mu_sigma=0.03, mu_clip_sigmas=1.0)
    thresholds = sample_thresholds(cfg, (300, 300), np.random.default_rng(1))
    assert thresholds.min() > 0.07
    # Upper tail is untouched
    assert thresholds.max() > 0.1 + 3 * 0.03


def _expected_truncated_count(log_ratio: float, mu: float, sigma: float, floor: float) -> float:
    # E[trunc(d / mu')] with mu' ~ N(mu, sigma) conditioned on mu' > floor
    lower = stats.norm.cdf((floor - mu) / sigma)
    total, k = 0.0, 1
    while True:
        term = max(stats.norm.cdf((log_ratio / k - mu) / sigma) - lower, 0.0) / (1.0 - lower)
        if term < 1e-12:
            break
        total += term
        k += 1
    return total


def test_mean_count_matches_threshold_expectation():
    cfg = EvsConfig(enable_poisson=False, mu_sigma=0.01)
    log_ratio = 0.47
    minus, plus = _uniform(1.0, (1, 1)), _uniform(math.exp(log_ratio), (1, 1))
    counts = np.array([
        simulate_event_plane(minus, plus, cfg, seed=s, delta=0.02).counts[0, 0] for s in range(10_000)
    ])
    floor = cfg.mu - cfg.mu_clip_sigmas * cfg.mu_sigma
    expected = _expected_truncated_count(log_ratio, cfg.mu, cfg.mu_sigma, floor)
    standard_error = counts.std(ddof=1) / math.sqrt(len(counts))
    assert abs(counts.mean() - expected) < 3 * standard_error + 1e-9


# ============================================================================
# Event stream
# ============================================================================

def test_constant_trajectory_emits_nothing():
    trajectory = [(z, _uniform(2.0, z=z)) for z in np.linspace(-0.01, 0.01, 8)]
    assert simulate_event_stream(trajectory, QUIET_EVS, T=0.5) == []


def test_unsorted_trajectory_is_rejected():
    trajectory = [(0.01, _uniform(1.0)), (-0.01, _uniform(2.0))]
    with pytest.raises(EventOrderError):
        simulate_event_stream(trajectory, QUIET_EVS)


def test_endpoint_trajectory_matches_event_plane():
    rng = np.random.default_rng(2)
    minus = _map(rng.uniform(0.2, 5.0, (12, 12)), z=-0.02)
    plus = _map(rng.uniform(0.2, 5.0, (12, 12)), z=0.02)
    events = simulate_event_stream([(-0.02, minus), (0.02, plus)], QUIET_EVS, T=0.5)
    stream = EventStream(events, (12, 12))
    np.testing.assert_array_equal(
        accumulate(stream, None, 0.1, 0.02).counts,
        simulate_event_plane(minus, plus, QUIET_EVS).counts,
    )


def test_ramp_crossing_times():
    T = 0.5
    zs = np.linspace(-0.02, 0.02, 100)
    height = 0.35
    trajectory = [
        (float(z), _map(np.full((1, 1), math.exp(height * i / 99)), z=float(z))) for i, z in enumerate(zs)
    ]
    events = simulate_event_stream(trajectory, QUIET_EVS, T=T)
    assert len(events) == 3
    assert all(e.polarity == 1 for e in events)
    spacing = 2 * T / 99
    for level, event in zip((0.1, 0.2, 0.3), events):
        crossing = level / height * 2 * T
        assert abs(event.t - crossing) <= spacing


def test_stream_and_plane_agree_on_monotone_trajectories():
    rng = np.random.default_rng(8)
    minus = _map(rng.uniform(0.2, 8.0, (10, 10)), z=-0.01)
    plus = _map(rng.uniform(0.2, 8.0, (10, 10)), z=0.01)
    cfg = EvsConfig(enable_poisson=False)
    trajectory = log_interpolated_trajectory(minus, plus, 64)
    events = simulate_event_stream(trajectory, cfg, T=0.5, seed=21)
    stream = EventStream(events, (10, 10))
    np.testing.assert_array_equal(
        accumulate(stream, None, cfg.mu, 0.01).counts,
        simulate_event_plane(minus, plus, cfg, seed=21).counts,
    )


def test_event_times_stay_in_translation():
    rng = np.random.default_rng(6)
    minus = _map(rng.uniform(0.5, 4.0, (6, 6)), z=-0.01)
    plus = _map(rng.uniform(0.5, 4.0, (6, 6)), z=0.01)
    events = simulate_event_stream(log_interpolated_trajectory(minus, plus, 16), QUIET_EVS, T=0.5)
    times = [e.t for e in events]
    assert times == sorted(times)
    assert all(0.0 <= t <= 1.0 for t in times)
