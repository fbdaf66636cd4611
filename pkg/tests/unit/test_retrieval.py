"""
Tests for derivative estimation, the Neumann Poisson solve and C selection.
"""

import math

import numpy as np
import pytest
from scipy import fft as sfft

from models.events import EventPlane
from models.exceptions import ConfigurationError, DerivativeKindError, DomainError
from models.grids import DerivativeKind, DerivativeMap, IntensityMap, PhaseMap
from models.schemas import SolveConfig
from optics.retrieval import (
    discrete_laplacian,
    inverse_laplacian,
    linear_derivative,
    log_derivative,
    select_regularization,
    solve_tee,
    solve_tie,
)

PITCH = 6.4e-6


def _random_phase(shape=(48, 64), seed=0) -> np.ndarray:
    phi = np.random.default_rng(seed).normal(size=shape)
    return phi - phi.mean()


def _cosine_mode(shape, ky: int, kx: int) -> np.ndarray:
    rows, cols = shape
    y = np.cos(np.pi * ky * (np.arange(rows) + 0.5) / rows)
    x = np.cos(np.pi * kx * (np.arange(cols) + 0.5) / cols)
    return y[:, None] * x[None, :]


def _mode_eigenvalue(shape, ky: int, kx: int, pitch: float) -> float:
    rows, cols = shape
    return (4.0 / pitch ** 2) * (
        math.sin(math.pi * ky / (2 * rows)) ** 2 + math.sin(math.pi * kx / (2 * cols)) ** 2
    )


# ============================================================================
# Derivatives
# ============================================================================

def test_linear_derivative_central_difference():
    minus = IntensityMap(np.full((4, 4), 3.0), PITCH)
    plus = IntensityMap(np.full((4, 4), 5.0), PITCH)
    d = linear_derivative(minus, plus, 0.02)
    assert d.kind == DerivativeKind.LINEAR
    np.testing.assert_allclose(d.values, 50.0)


def test_log_derivative_from_counts():
    plane = EventPlane(np.full((4, 4), 10, dtype=np.int64), 0.1, 0.02, pitch=PITCH)
    d = log_derivative(plane)
    assert d.kind == DerivativeKind.LOGARITHMIC
    assert d.pitch == PITCH
    np.testing.assert_allclose(d.values, 25.0)


def test_derivatives_reject_bad_inputs():
    with pytest.raises(DomainError):
        linear_derivative(IntensityMap(np.ones((2, 2)), PITCH), IntensityMap(np.ones((2, 2)), PITCH), 0.0)
    with pytest.raises(DomainError):
        log_derivative(EventPlane(np.zeros((2, 2), dtype=np.int64), 0.1, 0.0))


# ============================================================================
# Poisson solve
# ============================================================================

def test_zero_rhs_gives_zero_phase():
    phi = inverse_laplacian(np.zeros((16, 16)), 0.0, PITCH)
    assert not phi.values.any()


def test_cosine_mode_is_an_eigenfunction():
    shape = (8, 2048)
    mode = _cosine_mode(shape, 3, 5)
    eig = _mode_eigenvalue(shape, 3, 5, PITCH)
    phi = inverse_laplacian(mode, 0.0, PITCH).values
    expected = -mode / eig
    assert np.max(np.abs(phi - expected)) / np.max(np.abs(expected)) < 1e-6


def test_discrete_laplacian_acts_on_cosine_mode():
    shape = (16, 24)
    mode = _cosine_mode(shape, 2, 7)
    eig = _mode_eigenvalue(shape, 2, 7, PITCH)
    np.testing.assert_allclose(discrete_laplacian(mode, PITCH), -eig * mode, atol=1e-6 * eig)


def test_solve_inverts_discrete_laplacian():
    phi = _random_phase()
    recovered = inverse_laplacian(discrete_laplacian(phi, PITCH), 0.0, PITCH).values
    assert np.linalg.norm(recovered - phi) / np.linalg.norm(phi) < 1e-8


def test_solution_has_zero_mean():
    rhs = np.random.default_rng(1).normal(size=(32, 32)) + 5.0
    assert abs(inverse_laplacian(rhs, 1e-3, PITCH).values.mean()) < 1e-12


def test_constant_rhs_offset_changes_nothing():
    rhs = np.random.default_rng(2).normal(size=(32, 32))
    base = inverse_laplacian(rhs, 0.0, PITCH).values
    shifted = inverse_laplacian(rhs + 7.0, 0.0, PITCH).values
    np.testing.assert_allclose(shifted, base, atol=1e-12 * np.abs(base).max())


def test_solve_is_linear():
    rng = np.random.default_rng(3)
    r1, r2 = rng.normal(size=(24, 24)), rng.normal(size=(24, 24))
    combined = inverse_laplacian(2.0 * r1 - 0.5 * r2, 1e6, PITCH).values
    separate = 2.0 * inverse_laplacian(r1, 1e6, PITCH).values - 0.5 * inverse_laplacian(r2, 1e6, PITCH).values
    np.testing.assert_allclose(combined, separate, atol=1e-12 * np.abs(separate).max())


def test_analytic_neumann_mode_at_full_resolution():
    # The 5-point stencil undershoots |omega|^2 by a relative (pi*k/2N)^2/3
    n = 539
    mode = _cosine_mode((n, n), 1, 1)
    continuous = 2.0 * (math.pi / (n * PITCH)) ** 2
    phi = inverse_laplacian(-continuous * mode, 0.0, PITCH).values
    error = np.max(np.abs(phi - mode)) / np.max(np.abs(mode))
    assert error < 1.001 * (math.pi / (2 * n)) ** 2 / 3


def test_larger_c_damps_every_mode():
    shape = (32, 32)
    mode = _cosine_mode(shape, 1, 9)
    amplitudes = [np.abs(inverse_laplacian(mode, c, PITCH).values).max() for c in (0.0, 1e-6, 1e-3, 1.0)]
    assert all(a > b for a, b in zip(amplitudes, amplitudes[1:]))


@pytest.mark.parametrize("frequency_units", ["cycles", "pixel", "physical"])
def test_high_band_energy_never_grows_with_c(frequency_units):
    rng = np.random.default_rng(11)
    for _ in range(100):
        shape = tuple(int(s) for s in rng.integers(8, 40, size=2))
        rhs = rng.normal(size=shape) * 10.0 ** rng.uniform(-3, 3)
        grid = np.sort(10.0 ** rng.uniform(-13, 2, size=6))
        rows, cols = shape
        ky, kx = np.meshgrid(np.arange(rows), np.arange(cols), indexing="ij")
        high = (ky >= rows / 2) | (kx >= cols / 2)
        energies = []
        for c in np.concatenate([[0.0], grid]):
            phi = inverse_laplacian(rhs, float(c), PITCH, frequency_units).values
            energies.append(np.sum(sfft.dctn(phi, type=2, norm="ortho")[high] ** 2))
        assert all(b <= a * (1 + 1e-12) for a, b in zip(energies, energies[1:])), shape


def test_negative_c_is_rejected():
    with pytest.raises(DomainError):
        inverse_laplacian(np.zeros((4, 4)), -1.0, PITCH)


def test_pixel_units_rescale_c():
    rhs = np.random.default_rng(4).normal(size=(20, 20))
    c_pixel = 1e-3
    pixel = inverse_laplacian(rhs, c_pixel, PITCH, frequency_units="pixel").values
    physical = inverse_laplacian(rhs, c_pixel / PITCH ** 2, PITCH, frequency_units="physical").values
    np.testing.assert_allclose(pixel, physical, rtol=1e-9, atol=1e-12 * np.abs(physical).max())


def test_cycles_units_rescale_c():
    rhs = np.random.default_rng(5).normal(size=(20, 20))
    c_cycles = 1e-3
    cycles = inverse_laplacian(rhs, c_cycles, PITCH).values
    pixel = inverse_laplacian(rhs, c_cycles * 4 * math.pi ** 2, PITCH, frequency_units="pixel").values
    np.testing.assert_allclose(cycles, pixel, rtol=1e-9, atol=1e-12 * np.abs(pixel).max())


def test_candidate_grid_damps_noise_at_default_units():
    # A physical-unit C from the grid would leave the solution untouched
    rhs = np.random.default_rng(6).normal(size=(64, 64))
    free = np.linalg.norm(inverse_laplacian(rhs, 0.0, PITCH).values)
    damped = np.linalg.norm(inverse_laplacian(rhs, 1e-2, PITCH).values)
    assert damped < 0.5 * free


def test_unknown_frequency_units_are_rejected():
    with pytest.raises(DomainError):
        inverse_laplacian(np.zeros((4, 4)), 0.0, PITCH, frequency_units="radians")


# ============================================================================
# TIE and TEE
# ============================================================================

def test_solvers_check_derivative_kind():
    cfg = SolveConfig()
    linear = DerivativeMap(np.zeros((4, 4)), DerivativeKind.LINEAR, PITCH)
    logarithmic = DerivativeMap(np.zeros((4, 4)), DerivativeKind.LOGARITHMIC, PITCH)
    with pytest.raises(DerivativeKindError):
        solve_tie(logarithmic, 1.0, cfg)
    with pytest.raises(DerivativeKindError):
        solve_tee(linear, cfg)


def test_tee_recovers_phase_from_exact_log_derivative():
    cfg = SolveConfig(reg_constant=0.0)
    phi = _random_phase(seed=5)
    d_log = -discrete_laplacian(phi, PITCH) / cfg.wavenumber
    recovered = solve_tee(DerivativeMap(d_log, DerivativeKind.LOGARITHMIC, PITCH), cfg).values
    np.testing.assert_allclose(recovered, phi, atol=1e-8 * np.abs(phi).max())


def test_tie_and_tee_agree_for_uniform_intensity():
    cfg = SolveConfig()
    level = 4.0
    d_log = np.random.default_rng(6).normal(size=(32, 32))
    tee = solve_tee(DerivativeMap(d_log, DerivativeKind.LOGARITHMIC, PITCH), cfg, reg_constant=1e-4)
    tie = solve_tie(DerivativeMap(level * d_log, DerivativeKind.LINEAR, PITCH), level, cfg, reg_constant=1e-4)
    np.testing.assert_allclose(tie.values, tee.values, atol=1e-10 * np.abs(tee.values).max())


def test_explicit_c_overrides_pinned_value():
    d = DerivativeMap(_cosine_mode((16, 16), 1, 1), DerivativeKind.LOGARITHMIC, PITCH)
    pinned = solve_tee(d, SolveConfig(reg_constant=1e12))
    overridden = solve_tee(d, SolveConfig(reg_constant=1e12), reg_constant=0.0)
    assert np.abs(overridden.values).max() > np.abs(pinned.values).max()


# ============================================================================
# Regularization selection
# ============================================================================

def _scaled_solver(best: float):
    # Error grows with the log distance from the best candidate
    reference = _random_phase((16, 16), seed=7)

    def solver(c: float) -> PhaseMap:
        return PhaseMap(reference * (1.0 + abs(math.log10(c) - math.log10(best))), PITCH)

    return PhaseMap(reference, PITCH), solver


def test_selection_finds_best_candidate():
    reference, solver = _scaled_solver(1e-6)
    cfg = SolveConfig(candidate_grid=[1e-2, 1e-4, 1e-6, 1e-8])
    assert select_regularization(cfg, solver, reference) == 1e-6


def test_single_candidate_is_returned():
    reference, solver = _scaled_solver(1e-6)
    assert select_regularization(SolveConfig(candidate_grid=[1e-3]), solver, reference) == 1e-3


def test_ties_go_to_the_smaller_c():
    reference = PhaseMap(_random_phase((8, 8), seed=8), PITCH)
    cfg = SolveConfig(candidate_grid=[1e-2, 1e-9, 1e-5])
    assert select_regularization(cfg, lambda c: reference, reference) == 1e-9


def test_selection_without_reference_uses_pinned_c():
    cfg = SolveConfig(reg_constant=1e-7)
    assert select_regularization(cfg, lambda c: pytest.fail("no trial expected")) == 1e-7


def test_selection_without_reference_or_pinned_c_fails():
    with pytest.raises(ConfigurationError):
        select_regularization(SolveConfig(), lambda c: None)


def test_selection_with_empty_grid_fails():
    reference = PhaseMap(np.zeros((4, 4)), PITCH)
    with pytest.raises(ConfigurationError):
        select_regularization(SolveConfig(candidate_grid=[]), lambda c: reference, reference)
