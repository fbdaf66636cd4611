"""
Numerical engines for event-based phase retrieval.

Zernike wavefronts, Fresnel propagation, frame and event sensor models,
the TIE/TEE Poisson solve and evaluation metrics.
"""

from .metrics import rmse, rmse_full_frame, summarize, weight_errors
from .retrieval import (
    discrete_laplacian,
    inverse_laplacian,
    linear_derivative,
    log_derivative,
    select_regularization,
    solve_tee,
    solve_tie,
)
from .sensor_sim import (
    dynamic_range_db,
    log_interpolated_trajectory,
    sample_thresholds,
    simulate_event_plane,
    simulate_event_stream,
    simulate_frame,
)
from .wavefield import field_from_phase, fresnel_propagate, intensity_of, propagate_planes
from .zernike import PRESETS, ZernikeWeights, fit_weights, resolve_preset, synthesize_phase, zernike_basis

__all__ = [
    "PRESETS",
    "ZernikeWeights",
    "discrete_laplacian",
    "dynamic_range_db",
    "field_from_phase",
    "fit_weights",
    "fresnel_propagate",
    "intensity_of",
    "inverse_laplacian",
    "linear_derivative",
    "log_derivative",
    "log_interpolated_trajectory",
    "propagate_planes",
    "resolve_preset",
    "rmse",
    "rmse_full_frame",
    "sample_thresholds",
    "select_regularization",
    "simulate_event_plane",
    "simulate_event_stream",
    "simulate_frame",
    "solve_tee",
    "solve_tie",
    "summarize",
    "synthesize_phase",
    "weight_errors",
    "zernike_basis",
]
