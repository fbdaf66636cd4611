"""
Artifact writers: binary rasters with PGM/PNG previews, CSV tables and
JSON-lines reports.
"""

import csv
import json
import re
import struct
from typing import Any, Dict, Iterable, List, Sequence

import matplotlib as mpl
import numpy as np
from PIL import Image

from models.exceptions import StorageError

RASTER_MAGIC = b"RAS1"
_HEADER = struct.Struct("<4sIId")


def to_snake_case(input_string: str) -> str:
    """
    Converts a string to snake_case, keeping only numbers, letters and dots,
    and replacing everything else with underscores.
    """
    s1 = re.sub(r"[^a-zA-Z0-9\.]+", "_", input_string)
    return s1.strip("_").lower()


# ============================================================================
# Rasters
# ============================================================================

def save_raster(path: str, values: np.ndarray, pitch: float) -> str:
    """Write a little-endian float64 raster: magic, rows, cols, pitch, data."""
    values = np.ascontiguousarray(values, dtype="<f8")
    if values.ndim != 2:
        raise StorageError(f"Rasters must be 2D, got shape {values.shape}")
    rows, cols = values.shape
    try:
        with open(path, "wb") as f:
            f.write(_HEADER.pack(RASTER_MAGIC, rows, cols, float(pitch)))
            f.write(values.tobytes(order="C"))
    except OSError as e:
        raise StorageError(f"Cannot write raster {path}: {e}") from e
    return path


def load_raster(path: str) -> tuple:
    """Read a raster written by save_raster. Returns (values, pitch)."""
    try:
        with open(path, "rb") as f:
            header = f.read(_HEADER.size)
            payload = f.read()
    except OSError as e:
        raise StorageError(f"Cannot read raster {path}: {e}") from e
    if len(header) != _HEADER.size:
        raise StorageError(f"{path}: truncated raster header")
    magic, rows, cols, pitch = _HEADER.unpack(header)
    if magic != RASTER_MAGIC:
        raise StorageError(f"{path}: not a raster file (magic {magic!r})")
    if len(payload) != rows * cols * 8:
        raise StorageError(f"{path}: expected {rows * cols} samples, found {len(payload) // 8}")
    values = np.frombuffer(payload, dtype="<f8").reshape(rows, cols).astype(np.float64)
    return values, pitch


def _normalize(values: np.ndarray) -> np.ndarray:
    a = np.nan_to_num(np.asarray(values, dtype=np.float64), nan=0.0, posinf=0.0, neginf=0.0)
    a = a - a.min()
    mx = a.max()
    return a / mx if mx > 0 else np.zeros(a.shape)


def save_pgm16(path: str, values: np.ndarray) -> str:
    """Min-max scaled 16-bit grayscale PGM preview."""
    scaled = np.round(_normalize(values) * 65535.0).astype(np.int32)
    try:
        Image.fromarray(scaled).save(path, format="PPM")
    except OSError as e:
        raise StorageError(f"Cannot write PGM {path}: {e}") from e
    return path


def save_png(path: str, values: np.ndarray, cmap: str = "viridis") -> str:
    """Colormapped 8-bit RGB PNG preview."""
    rgba = mpl.colormaps[cmap](_normalize(values))
    rgb = np.round(rgba[..., :3] * 255.0).astype(np.uint8)
    try:
        Image.fromarray(rgb).save(path, format="PNG")
    except OSError as e:
        raise StorageError(f"Cannot write PNG {path}: {e}") from e
    return path


def save_grid(base_path: str, values: np.ndarray, pitch: float, cmap: str = "viridis") -> List[str]:
    """Raster plus both previews next to it."""
    return [
        save_raster(f"{base_path}.ras", values, pitch),
        save_pgm16(f"{base_path}.pgm", values),
        save_png(f"{base_path}.png", values, cmap),
    ]


# ============================================================================
# Tables
# ============================================================================

def _fieldnames(rows: Sequence[Dict[str, Any]]) -> List[str]:
    names: List[str] = []
    for row in rows:
        for key in row:
            if key not in names:
                names.append(key)
    return names


def save_csv(path: str, rows: Sequence[Dict[str, Any]]) -> str:
    """Write dict rows with the union of their keys as header."""
    try:
        with open(path, "w", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=_fieldnames(rows), lineterminator="\n")
            writer.writeheader()
            writer.writerows(rows)
    except OSError as e:
        raise StorageError(f"Cannot write CSV {path}: {e}") from e
    return path


def save_jsonl(path: str, records: Iterable[Dict[str, Any]]) -> str:
    try:
        with open(path, "w") as f:
            for record in records:
                f.write(json.dumps(record, sort_keys=True) + "\n")
    except OSError as e:
        raise StorageError(f"Cannot write JSON lines {path}: {e}") from e
    return path
