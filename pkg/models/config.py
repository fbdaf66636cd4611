"""
Configuration settings and physical defaults for the phase retrieval toolkit.
"""

import os
from typing import Dict, List, Tuple

from dotenv import load_dotenv

# Load environment variables
load_dotenv()

# Environment variables
OUTPUT_DIR = os.getenv("OUTPUT_DIR", "tmp/runs")
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
LOG_TO_FILE = os.getenv("LOG_TO_FILE", "").lower() in ("1", "true", "yes")
SWEEP_WORKERS = int(os.getenv("SWEEP_WORKERS", "1"))

# Optical geometry
DEFAULT_WAVELENGTH = 635e-9  # m
DEFAULT_PUPIL_DIAMETER = 3.2e-3  # m
DEFAULT_RESOLUTION: Tuple[int, int] = (539, 539)
DEFAULT_PITCH = 6.4e-6  # m/pixel
DEFAULT_TWO_DELTA = 40e-3  # m
DEFAULT_DURATION = 1.0  # 2T in seconds

# Zernike
MAX_OSA_INDEX = 27

# Frame sensor
DEFAULT_READOUT_SIGMA = 0.5
DEFAULT_QUANT_STEP = 1.0
DEFAULT_FRAME_MIN = 1.0
# 70.5 dB dynamic range above the unit floor: 10 ** (70.5 / 20)
DEFAULT_FRAME_MAX = 3350.0

# Event sensor
DEFAULT_MU = 0.1
DEFAULT_MU_SIGMA = 0.03
DEFAULT_EVS_MIN = 0.1
# Threshold draws are truncated this many sigmas below mu
DEFAULT_MU_CLIP_SIGMAS = 1.0

# Regularization candidates 1e-2 .. 1e-13
DEFAULT_C_GRID: List[float] = [10.0 ** -p for p in range(2, 14)]

# Sweeps
DEFAULT_INTENSITY_POINTS = 20
DEFAULT_INTENSITY_RANGE: Tuple[float, float] = (0.1, 100.0)
DEFAULT_DELTA_SWEEP: List[float] = [4e-3, 10e-3, 25e-3, 40e-3, 70e-3, 100e-3]
DEFAULT_SEEDS: List[int] = list(range(10))
DELTA_SWEEP_INTENSITY = 2.0
ACCEPTABLE_RMSE = 0.141

# Exit codes
EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG_ERROR = 2
EXIT_IO_ERROR = 3

# Error messages
ERROR_MESSAGES: Dict[str, str] = {
    "missing_pinned_c": "No reference phase and no pinned solve.C; set solve.C or supply a reference",
    "empty_mask": "RMSE mask selects no pixels",
    "shape_mismatch": "Input grids have different shapes",
    "unknown_key": "Unknown configuration key",
    "bad_index": "Zernike index outside the configured range",
}
