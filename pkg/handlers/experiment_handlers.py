"""
Simulation experiments: single retrieval, intensity sweep, translation
distance sweep and the noise-free baseline.

Every cell follows the same path: synthesize the target phase, propagate a
unit-intensity field to focus -/+ delta, scale to the cell's intensity,
degrade with the frame and/or event sensor model, estimate the axial
derivative, solve, and score against the known phase.
"""

import hashlib
import os
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from models.config import ACCEPTABLE_RMSE, ERROR_MESSAGES
from models.events import EventPlane
from models.exceptions import ConfigurationError, UnsupportedIndexError
from models.grids import DerivativeMap, IntensityMap, PhaseMap, PupilGrid
from models.reports import EvalReport
from models.schemas import ExperimentConfig, SolveConfig
from optics.metrics import rmse, rmse_full_frame, summarize, weight_errors
from optics.retrieval import linear_derivative, log_derivative, select_regularization, solve_tee, solve_tie
from optics.sensor_sim import simulate_event_plane, simulate_frame
from optics.wavefield import field_from_phase, propagate_planes
from optics.zernike import PRESETS, ZernikeWeights, resolve_preset, synthesize_phase
from utils.config import (
    BASELINE_CSV,
    DELTA_SUMMARY_CSV,
    DELTA_SWEEP_CSV,
    INTENSITY_SUMMARY_CSV,
    INTENSITY_SWEEP_CSV,
    REPORT_CSV,
    REPORT_JSONL,
    RunLayout,
    run_layout,
)
from utils.logger import logger
from utils.save_files import load_raster, save_csv, save_grid, save_jsonl

BASELINE_PHASES = ("phase0", "phase3")


@dataclass
class CellResult:
    """Everything one (phase, intensity, 2*delta, seed) cell produced."""
    reports: Dict[str, EvalReport] = field(default_factory=dict)
    phases: Dict[str, PhaseMap] = field(default_factory=dict)
    derivatives: Dict[str, DerivativeMap] = field(default_factory=dict)
    true_phase: Optional[PhaseMap] = None
    event_plane: Optional[EventPlane] = None


# ============================================================================
# Setup helpers
# ============================================================================

def pupil_grid(config: ExperimentConfig) -> PupilGrid:
    return PupilGrid(tuple(config.resolution), config.pitch, config.pupil_diameter)


def phase_weights(config: ExperimentConfig, phase_id: str) -> ZernikeWeights:
    """Weights for a phase id: inline config weights for the configured target, else a preset."""
    if config.weights is not None and phase_id == target_label(config):
        try:
            return ZernikeWeights(dict(config.weights), max_index=config.max_index)
        except UnsupportedIndexError as e:
            raise ConfigurationError(f"{ERROR_MESSAGES['bad_index']}: {e}") from e
    try:
        return resolve_preset(phase_id)
    except KeyError:
        raise ConfigurationError(
            f"Unknown phase '{phase_id}'; presets are {', '.join(PRESETS)}"
        ) from None


def target_label(config: ExperimentConfig) -> str:
    if config.weights is not None and "target" not in config.model_fields_set:
        return "custom"
    return config.target


def derive_cell_seeds(seed: int, phase_id: str, intensity: float, two_delta: float) -> Tuple[int, int, int]:
    """Independent seeds (frame minus, frame plus, events) keyed by cell content.

    Keying by content instead of position makes a sweep cell reproducible by a
    single run with the same parameters.
    """
    key = f"{seed}|{phase_id}|{intensity!r}|{two_delta!r}".encode("utf-8")
    digest = hashlib.sha256(key).digest()
    root = np.random.SeedSequence(int.from_bytes(digest[:16], "little"))
    return tuple(int(child.generate_state(1, dtype=np.uint64)[0]) for child in root.spawn(3))


@lru_cache(maxsize=16)
def _unit_defocus_pair(
    weight_items: Tuple[Tuple[int, float], ...],
    max_index: int,
    grid: PupilGrid,
    wavelength: float,
    two_delta: float,
    pad_mode: str,
    extend: bool,
) -> Tuple[PhaseMap, IntensityMap, IntensityMap]:
    weights = ZernikeWeights(dict(weight_items), max_index=max_index)
    true_phase = synthesize_phase(weights, grid, extend)
    wave = field_from_phase(true_phase, 1.0, wavelength)
    delta = two_delta / 2.0
    (_, minus), (_, plus) = propagate_planes(wave, [-delta, delta], pad_mode)
    for values in (true_phase.values, minus.values, plus.values):
        values.flags.writeable = False
    return true_phase, minus, plus


def defocus_pair(
    config: ExperimentConfig,
    weights: ZernikeWeights,
    two_delta: float,
) -> Tuple[PhaseMap, IntensityMap, IntensityMap]:
    """True phase and unit-intensity images at focus -/+ delta (cached, read-only)."""
    return _unit_defocus_pair(
        tuple(sorted(weights.entries.items())),
        weights.max_index,
        pupil_grid(config),
        config.wavelength,
        float(two_delta),
        config.pad_mode,
        config.extend_target,
    )


def load_reference(reference: str, config: ExperimentConfig) -> PhaseMap:
    """Reference phase from a raster file or a preset/target name."""
    if os.path.isfile(reference):
        values, pitch = load_raster(reference)
        return PhaseMap(values, pitch)
    return synthesize_phase(phase_weights(config, reference), pupil_grid(config), config.extend_target)


def memoized_solver(solver: Callable[[float], PhaseMap]) -> Callable[[float], PhaseMap]:
    cache: Dict[float, PhaseMap] = {}

    def trial(c: float) -> PhaseMap:
        if c not in cache:
            cache[c] = solver(c)
        return cache[c]

    return trial


def choose_reg_constant(
    solve_cfg: SolveConfig,
    trial: Callable[[float], PhaseMap],
    reference: Optional[PhaseMap],
    mask: Optional[np.ndarray],
) -> float:
    """Sweep the candidate grid when a reference exists and C is not pinned."""
    if reference is not None and (solve_cfg.auto_c or solve_cfg.reg_constant is None):
        return select_regularization(solve_cfg, trial, reference, mask)
    return select_regularization(solve_cfg, trial)


def build_report(
    config: ExperimentConfig,
    method: str,
    phase_id: str,
    weights: ZernikeWeights,
    retrieved: PhaseMap,
    reference: PhaseMap,
    grid: PupilGrid,
    intensity: Optional[float],
    two_delta: float,
    seed: int,
    c_used: float,
) -> EvalReport:
    return EvalReport(
        rmse=rmse(reference, retrieved, grid.mask),
        per_index_weight_error=weight_errors(weights, retrieved, grid, config.max_index),
        config_echo=config.echo(),
        rmse_full_frame=rmse_full_frame(reference, retrieved),
        method=method,
        phase_id=phase_id,
        intensity=intensity,
        two_delta=two_delta,
        seed=seed,
        c_used=c_used,
    )


# ============================================================================
# One cell
# ============================================================================

def run_cell(
    config: ExperimentConfig,
    phase_id: str,
    intensity: float,
    two_delta: float,
    seed: int,
    methods: Optional[List[str]] = None,
) -> CellResult:
    """Simulate and retrieve one phase at one intensity, translation and seed."""
    methods = methods or config.methods()
    weights = phase_weights(config, phase_id)
    grid = pupil_grid(config)
    true_phase, unit_minus, unit_plus = defocus_pair(config, weights, two_delta)
    i_minus, i_plus = unit_minus.scaled(intensity), unit_plus.scaled(intensity)
    seed_minus, seed_plus, seed_events = derive_cell_seeds(seed, phase_id, intensity, two_delta)
    delta = two_delta / 2.0
    solve_cfg = config.solve

    result = CellResult(true_phase=true_phase)
    for method in methods:
        if method == "tie":
            frame_cfg = config.frame_sensor()
            obs_minus = simulate_frame(i_minus, frame_cfg, seed_minus)
            obs_plus = simulate_frame(i_plus, frame_cfg, seed_plus)
            derivative = linear_derivative(obs_minus, obs_plus, delta)
            trial = memoized_solver(lambda c, d=derivative: solve_tie(d, intensity, solve_cfg, c))
        elif method == "tee":
            plane = simulate_event_plane(
                i_minus, i_plus, config.event_sensor(), seed_events, delta=delta, duration=config.duration
            )
            result.event_plane = plane
            derivative = log_derivative(plane)
            trial = memoized_solver(lambda c, d=derivative: solve_tee(d, solve_cfg, c))
        else:
            raise ConfigurationError(f"Unknown method '{method}'")

        c_used = choose_reg_constant(solve_cfg, trial, true_phase, grid.mask)
        retrieved = trial(c_used)
        report = build_report(
            config, method, phase_id, weights, retrieved, true_phase, grid, intensity, two_delta, seed, c_used
        )
        result.reports[method] = report
        result.phases[method] = retrieved
        result.derivatives[method] = derivative
        logger.debug(
            f"Cell {phase_id} I={intensity:g} 2D={two_delta:g} seed={seed} {method}: "
            f"rmse={report.rmse:.4f} C={c_used:g}"
        )
    return result


def _run_cells(config: ExperimentConfig, cells: List[tuple], methods: List[str]) -> List[EvalReport]:
    """Run cells (phase_id, intensity, two_delta, seed), rows in cell order."""
    def work(cell: tuple) -> List[EvalReport]:
        phase_id, intensity, two_delta, seed = cell
        result = run_cell(config, phase_id, intensity, two_delta, seed, methods)
        return [result.reports[m] for m in methods]

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as executor:
            batches = list(executor.map(work, cells))
    else:
        batches = [work(cell) for cell in cells]
    return [report for batch in batches for report in batch]


# ============================================================================
# Experiments
# ============================================================================

def run_single(config: ExperimentConfig, layout: Optional[RunLayout] = None) -> List[EvalReport]:
    """
    Retrieve the configured target once per method and write artifacts.

    Args:
        config: Validated experiment configuration
        layout: Output layout; defaults to config.output_dir

    Returns:
        One EvalReport per method, in method order
    """
    operation_id = str(uuid.uuid4())[:8]
    phase_id = target_label(config)
    logger.info(
        f"[{operation_id}] Single run: target={phase_id}, methods={config.methods()}, "
        f"I={config.intensity:g}, 2D={config.two_delta:g} m, seed={config.seed}"
    )
    layout = layout or run_layout(config.output_dir)
    result = run_cell(config, phase_id, config.intensity, config.two_delta, config.seed)

    save_grid(layout.raster("true_phase"), result.true_phase.values, result.true_phase.pitch)
    for method, phase in result.phases.items():
        save_grid(layout.raster(f"phase_{method}"), phase.values, phase.pitch)
        derivative = result.derivatives[method]
        save_grid(layout.raster(f"derivative_{derivative.kind.value}"), derivative.values, derivative.pitch, "coolwarm")
    if result.event_plane is not None:
        save_grid(layout.raster("event_counts"), result.event_plane.counts, result.event_plane.pitch, "coolwarm")

    reports = [result.reports[m] for m in config.methods()]
    save_csv(layout.table(REPORT_CSV), [r.to_row() for r in reports])
    save_jsonl(layout.table(REPORT_JSONL), [r.to_json() for r in reports])
    for report in reports:
        logger.info(
            f"[{operation_id}] {report.method.upper()} rmse={report.rmse:.4f} "
            f"(full frame {report.rmse_full_frame:.4f}), C={report.c_used:g}"
        )
    return reports


def run_intensity_sweep(
    config: ExperimentConfig,
    layout: Optional[RunLayout] = None,
) -> Tuple[List[dict], List[dict]]:
    """
    RMSE against intensity level for every phase, seed and method.

    Returns:
        Tuple of (raw rows, mean per (method, I) rows)
    """
    operation_id = str(uuid.uuid4())[:8]
    methods = config.methods()
    cells = [
        (phase_id, intensity, config.two_delta, seed)
        for intensity in config.intensity_levels
        for phase_id in config.phases
        for seed in config.seeds
    ]
    logger.info(
        f"[{operation_id}] Intensity sweep: {len(config.intensity_levels)} levels x "
        f"{len(config.phases)} phases x {len(config.seeds)} seeds, methods={methods}, workers={config.workers}"
    )
    layout = layout or run_layout(config.output_dir)
    rows = [r.to_row() for r in _run_cells(config, cells, methods)]
    summary = summarize(rows, ["method", "I"])
    save_csv(layout.table(INTENSITY_SWEEP_CSV), rows)
    save_csv(layout.table(INTENSITY_SUMMARY_CSV), summary)
    logger.info(f"[{operation_id}] Intensity sweep completed: {len(rows)} rows, {len(summary)} aggregates")
    return rows, summary


def run_delta_sweep(
    config: ExperimentConfig,
    layout: Optional[RunLayout] = None,
) -> Tuple[List[dict], List[dict]]:
    """
    TEE RMSE against translation distance 2*delta at the configured intensity.

    The summary ends with the acceptable-RMSE reference row.

    Returns:
        Tuple of (raw rows, mean per 2*delta rows)
    """
    operation_id = str(uuid.uuid4())[:8]
    cells = [
        (phase_id, config.intensity, two_delta, seed)
        for two_delta in config.delta_values
        for phase_id in config.phases
        for seed in config.seeds
    ]
    logger.info(
        f"[{operation_id}] Delta sweep: 2D in {config.delta_values} m at I={config.intensity:g}, "
        f"{len(config.phases)} phases x {len(config.seeds)} seeds"
    )
    layout = layout or run_layout(config.output_dir)
    rows = [r.to_row() for r in _run_cells(config, cells, ["tee"])]
    summary = summarize(rows, ["two_delta"])
    summary.append({"two_delta": "acceptable", "mean_rmse": ACCEPTABLE_RMSE, "std_rmse": "", "count": ""})
    save_csv(layout.table(DELTA_SWEEP_CSV), rows)
    save_csv(layout.table(DELTA_SUMMARY_CSV), summary)

    worst = max(row["rmse"] for row in rows)
    if worst > ACCEPTABLE_RMSE:
        logger.warning(f"[{operation_id}] Worst TEE RMSE {worst:.4f} exceeds acceptable {ACCEPTABLE_RMSE}")
    logger.info(f"[{operation_id}] Delta sweep completed: {len(rows)} rows")
    return rows, summary


def run_baseline(config: ExperimentConfig, layout: Optional[RunLayout] = None) -> Dict[str, float]:
    """
    Noise-free retrieval of phases 0 and 3 with both methods.

    Quantization stays on. Returns the mean pupil RMSE per method.
    """
    operation_id = str(uuid.uuid4())[:8]
    quiet = config.model_copy(update={"noise_free": True})
    logger.info(f"[{operation_id}] Noise-free baseline at I={config.intensity:g}, 2D={config.two_delta:g} m")
    layout = layout or run_layout(config.output_dir)
    cells = [(phase_id, config.intensity, config.two_delta, config.seed) for phase_id in BASELINE_PHASES]
    reports = _run_cells(quiet, cells, ["tee", "tie"])
    rows = [r.to_row() for r in reports]
    averages = {row["method"]: row["mean_rmse"] for row in summarize(rows, ["method"])}
    save_csv(layout.table(BASELINE_CSV), rows + [
        {"phase_id": "mean", "method": method, "rmse": value} for method, value in averages.items()
    ])
    for method, value in averages.items():
        logger.info(f"[{operation_id}] Baseline {method.upper()} mean RMSE {value:.4f}")
    return averages


def preset_table() -> List[Dict[str, object]]:
    """Non-zero weights of every preset, one row per (preset, index)."""
    rows = []
    for name, weights in PRESETS.items():
        for index, value in weights.nonzero().items():
            rows.append({"preset": name, "index": index, "weight": value})
    return rows
