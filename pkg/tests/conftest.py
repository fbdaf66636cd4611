"""
Shared pytest fixtures and the --run-slow switch for full-scale runs.
"""

import pytest

from models.grids import PupilGrid
from models.schemas import build_experiment_config


def pytest_addoption(parser):
    parser.addoption("--run-slow", action="store_true", default=False, help="run full-scale acceptance tests")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-slow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --run-slow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def small_grid():
    """64x64 grid whose pupil spans the full width."""
    return PupilGrid((64, 64), 6.4e-6, 64 * 6.4e-6)


@pytest.fixture
def small_config(tmp_path):
    """Reduced 128x128 experiment writing into a temporary directory."""
    pitch = 6.4e-6
    return build_experiment_config({
        "resolution": [128, 128],
        "pitch": pitch,
        "pupil_diameter": 100 * pitch,
        "two_delta": 10e-3,
        "intensity": 50.0,
        "intensity_levels": [2.0, 50.0],
        "delta_values": [4e-3, 10e-3],
        "phases": ["phase0", "phase3"],
        "seeds": [0, 1],
        "solve": {"candidate_grid": [1e-2, 1e-6]},
        "output_dir": str(tmp_path / "runs"),
    })
