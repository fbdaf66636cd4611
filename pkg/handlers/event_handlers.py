"""
Event stream workflows: writing simulated recordings and retrieving phase
from recorded event CSVs.
"""

import math
import os
import uuid
from typing import Optional, Tuple

import numpy as np

from models.events import EventPlane, EventStream
from models.exceptions import StorageError
from models.grids import PhaseMap
from models.reports import EvalReport
from models.schemas import ExperimentConfig
from optics.retrieval import log_derivative, solve_tee
from optics.sensor_sim import simulate_event_stream
from optics.wavefield import field_from_phase, propagate_planes
from optics.zernike import fit_weights, synthesize_phase
from handlers.experiment_handlers import (
    build_report,
    choose_reg_constant,
    derive_cell_seeds,
    load_reference,
    memoized_solver,
    phase_weights,
    pupil_grid,
    target_label,
)
from utils.config import EVENTS_CSV, REPORT_CSV, REPORT_JSONL, RunLayout, run_layout
from utils.events_io import accumulate, parse_event_csv, write_event_csv
from utils.logger import logger
from utils.save_files import save_csv, save_grid, save_jsonl


def simulate_events_csv(
    config: ExperimentConfig,
    path: Optional[str] = None,
    layout: Optional[RunLayout] = None,
) -> Tuple[str, int]:
    """
    Record a simulated translation of the configured target as an event CSV.

    The trajectory holds config.event_samples Fresnel-propagated planes
    evenly spaced from focus - delta to focus + delta. The true phase is
    written next to it as a raster for later comparison.

    Returns:
        Tuple of (CSV path, number of events)
    """
    operation_id = str(uuid.uuid4())[:8]
    phase_id = target_label(config)
    layout = layout or run_layout(config.output_dir)
    path = path or os.path.join(layout.events_dir, EVENTS_CSV)
    logger.info(
        f"[{operation_id}] Simulating event stream: target={phase_id}, I={config.intensity:g}, "
        f"2D={config.two_delta:g} m, {config.event_samples} samples"
    )

    grid = pupil_grid(config)
    true_phase = synthesize_phase(phase_weights(config, phase_id), grid, config.extend_target)
    wave = field_from_phase(true_phase, config.intensity, config.wavelength)
    distances = np.linspace(-config.delta, config.delta, config.event_samples)
    trajectory = propagate_planes(wave, distances.tolist(), config.pad_mode)
    _, _, seed_events = derive_cell_seeds(config.seed, phase_id, config.intensity, config.two_delta)
    records = simulate_event_stream(trajectory, config.event_sensor(), config.duration / 2.0, seed_events)

    try:
        with open(path, "w", newline="") as f:
            count = write_event_csv(records, f)
    except OSError as e:
        raise StorageError(f"Cannot write events to {path}: {e}") from e
    save_grid(layout.raster("true_phase"), true_phase.values, true_phase.pitch)
    logger.info(f"[{operation_id}] Wrote {count} events to {path}")
    return path, count


def _window(config: ExperimentConfig) -> Optional[Tuple[float, float]]:
    if config.window_start is None and config.window_end is None:
        return None
    start = config.window_start if config.window_start is not None else 0.0
    end = config.window_end if config.window_end is not None else math.inf
    return start, end


def accumulate_events(events_path: str, config: ExperimentConfig) -> Tuple[EventStream, EventPlane]:
    """Parse an event CSV and sum it over the configured window."""
    try:
        with open(events_path, "rb") as f:
            raw = f.read()
    except OSError as e:
        raise StorageError(f"Cannot read events from {events_path}: {e}") from e
    stream = parse_event_csv(raw, tuple(config.resolution), duration_hint=config.duration)
    plane = accumulate(stream, _window(config), config.evs.mu, config.delta, config.duration, config.pitch)
    return stream, plane


def run_from_events(
    events_path: str,
    config: ExperimentConfig,
    reference: Optional[str] = None,
    layout: Optional[RunLayout] = None,
) -> Tuple[Optional[EvalReport], PhaseMap]:
    """
    Retrieve phase from a recorded event CSV with the event transport solve.

    Args:
        events_path: CSV in the event interchange format
        config: Supplies mu, delta, pitch, wavelength and C
        reference: Optional raster path or preset name to score against;
            falls back to config.reference
        layout: Output layout; defaults to config.output_dir

    Returns:
        Tuple of (report or None without a reference, retrieved phase)

    Raises:
        ConfigurationError: Without a reference when solve.C is not pinned
    """
    operation_id = str(uuid.uuid4())[:8]
    logger.info(f"[{operation_id}] Retrieving phase from events in {events_path}")
    layout = layout or run_layout(config.output_dir)
    stream, plane = accumulate_events(events_path, config)
    if len(stream) == 0:
        logger.warning(f"[{operation_id}] Event stream is empty; the retrieved phase will be zero")
    else:
        logger.info(f"[{operation_id}] {len(stream)} events parsed, {plane.total_events} net in window")

    derivative = log_derivative(plane)
    trial = memoized_solver(lambda c: solve_tee(derivative, config.solve, c))
    reference = reference or config.reference
    grid = pupil_grid(config)
    reference_phase = load_reference(reference, config) if reference else None
    c_used = choose_reg_constant(config.solve, trial, reference_phase, grid.mask)
    retrieved = trial(c_used)

    save_grid(layout.raster("phase_tee_events"), retrieved.values, retrieved.pitch)
    save_grid(layout.raster("event_counts"), plane.counts, plane.pitch, "coolwarm")
    if reference_phase is None:
        logger.info(f"[{operation_id}] No reference; retrieved with pinned C={c_used:g}")
        return None, retrieved

    if os.path.isfile(reference):
        true_weights = fit_weights(reference_phase, grid, config.max_index)
        phase_id = os.path.splitext(os.path.basename(reference))[0]
    else:
        true_weights = phase_weights(config, reference)
        phase_id = reference
    report = build_report(
        config, "tee", phase_id, true_weights, retrieved, reference_phase, grid,
        None, config.two_delta, config.seed, c_used,
    )
    save_csv(layout.table(REPORT_CSV), [report.to_row()])
    save_jsonl(layout.table(REPORT_JSONL), [report.to_json()])
    logger.info(f"[{operation_id}] Event retrieval rmse={report.rmse:.4f}, C={c_used:g}")
    return report, retrieved
