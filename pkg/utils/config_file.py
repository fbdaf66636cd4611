"""
Flat key-value configuration files.

    # comment
    wavelength = 635e-9
    resolution = 539x539
    intensity_levels = 0.1, 1, 10
    sensor.evs.mu = 0.1
    solve.C = auto
    zernike.i.4 = 0.10

Dotted prefixes act as sections. Every key maps onto one ExperimentConfig
field; unknown keys are rejected.
"""

import os
from typing import Any, Dict, Mapping, Optional

from models.config import ERROR_MESSAGES
from models.exceptions import ConfigurationError, StorageError
from models.schemas import ExperimentConfig, build_experiment_config
from optics.zernike import PRESETS
from utils.logger import logger
from utils.save_files import to_snake_case

# Flat key -> ExperimentConfig field path
_SCALAR_KEYS: Dict[str, str] = {
    "target": "target",
    "wavelength": "wavelength",
    "pupil_diameter": "pupil_diameter",
    "pitch": "pitch",
    "two_delta": "two_delta",
    "intensity": "intensity",
    "seed": "seed",
    "method": "method",
    "noise_free": "noise_free",
    "max_index": "max_index",
    "pad_mode": "pad_mode",
    "extend_target": "extend_target",
    "workers": "workers",
    "output_dir": "output_dir",
    "reference": "reference",
    "solve.auto_C": "solve.auto_c",
    "solve.frequency_units": "solve.frequency_units",
    "events.window_start": "window_start",
    "events.window_end": "window_end",
    "events.samples": "event_samples",
    "events.duration": "duration",
}
_LIST_KEYS: Dict[str, str] = {
    "intensity_levels": "intensity_levels",
    "delta_values": "delta_values",
    "phases": "phases",
    "seeds": "seeds",
    "solve.C_grid": "solve.candidate_grid",
}
_SENSOR_FIELDS = {
    "frame": {"readout_sigma", "quant_step", "min_measurable", "max_measurable", "pitch",
              "resolution", "enable_poisson", "quant_mode"},
    "evs": {"mu", "mu_sigma", "mu_clip_sigmas", "min_measurable", "pitch", "resolution", "enable_poisson"},
}


def parse_resolution(value: str) -> list:
    parts = value.lower().replace(" ", "").split("x")
    if len(parts) != 2:
        raise ConfigurationError(f"Resolution must look like 539x539, got '{value}'")
    try:
        return [int(parts[0]), int(parts[1])]
    except ValueError:
        raise ConfigurationError(f"Resolution must look like 539x539, got '{value}'") from None


def _split_list(value: str) -> list:
    return [item.strip() for item in value.split(",") if item.strip()]


def _set(data: Dict[str, Any], path: str, value: Any) -> None:
    node = data
    parts = path.split(".")
    for part in parts[:-1]:
        node = node.setdefault(part, {})
    node[parts[-1]] = value


def parse_config_text(text: str) -> Dict[str, str]:
    """Raw `key = value` pairs in file order; later duplicates win."""
    pairs: Dict[str, str] = {}
    for line_number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigurationError(f"Config line {line_number}: expected 'key = value', got '{stripped}'")
        key, value = (s.strip() for s in stripped.split("=", 1))
        # Trailing comments
        value = value.split("#", 1)[0].strip()
        if not key:
            raise ConfigurationError(f"Config line {line_number}: empty key")
        if key in pairs:
            logger.debug(f"Config key '{key}' repeated on line {line_number}; last value wins")
        pairs[key] = value
    return pairs


def flat_to_nested(pairs: Mapping[str, Any]) -> Dict[str, Any]:
    """Translate flat config keys into the nested ExperimentConfig layout."""
    data: Dict[str, Any] = {}
    unknown = []
    c_pinned = False
    for key, value in pairs.items():
        is_text = isinstance(value, str)
        if key in _SCALAR_KEYS:
            _set(data, _SCALAR_KEYS[key], value)
        elif key in _LIST_KEYS:
            _set(data, _LIST_KEYS[key], _split_list(value) if is_text else value)
        elif key == "resolution":
            data["resolution"] = parse_resolution(value) if is_text else value
        elif key == "solve.C":
            if is_text and value.lower() == "auto":
                _set(data, "solve.reg_constant", None)
                _set(data, "solve.auto_c", True)
            else:
                _set(data, "solve.reg_constant", value)
                c_pinned = True
        elif key.startswith("zernike.i."):
            try:
                index = int(key[len("zernike.i."):])
            except ValueError:
                unknown.append(key)
                continue
            data.setdefault("weights", {})[index] = value
        elif key.startswith("sensor."):
            parts = key.split(".")
            if len(parts) != 3 or parts[1] not in _SENSOR_FIELDS or parts[2] not in _SENSOR_FIELDS[parts[1]]:
                unknown.append(key)
                continue
            if parts[2] == "resolution" and is_text:
                value = parse_resolution(value)
            _set(data, f"{parts[1]}.{parts[2]}", value)
        else:
            unknown.append(key)
    if unknown:
        raise ConfigurationError(f"{ERROR_MESSAGES['unknown_key']}: {', '.join(sorted(unknown))}")
    # A pinned C is used as given unless auto selection was asked for explicitly
    if c_pinned and "solve.auto_C" not in pairs:
        _set(data, "solve.auto_c", False)
    return data


def parse_weight_file(path: str) -> Dict[int, float]:
    """Read `index value` lines (whitespace, comma, '=' or ':' separated)."""
    weights: Dict[int, float] = {}
    try:
        with open(path, "r") as f:
            lines = f.read().splitlines()
    except OSError as e:
        raise StorageError(f"Cannot read weight file {path}: {e}") from e
    for line_number, line in enumerate(lines, start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        for sep in (",", "=", ":"):
            stripped = stripped.replace(sep, " ")
        parts = stripped.split()
        try:
            index, value = int(parts[0]), float(parts[1])
        except (IndexError, ValueError):
            raise ConfigurationError(f"{path}:{line_number}: expected 'index value'") from None
        weights[index] = value
    return weights


def load_config(path: Optional[str] = None, overrides: Optional[Mapping[str, Any]] = None) -> ExperimentConfig:
    """Build an ExperimentConfig from an optional file plus flat-key overrides.

    A target that names neither a preset nor inline weights is read as a
    weight file.
    """
    pairs: Dict[str, Any] = {}
    if path:
        try:
            with open(path, "r", encoding="utf-8") as f:
                pairs.update(parse_config_text(f.read()))
        except OSError as e:
            raise StorageError(f"Cannot read config file {path}: {e}") from e
    pairs.update({k: v for k, v in (overrides or {}).items() if v is not None})

    data = flat_to_nested(pairs)
    target = data.get("target")
    if target and "weights" not in data:
        key = str(target).strip().lower().replace(" ", "").replace("_", "")
        if key not in PRESETS:
            if not os.path.isfile(target):
                raise ConfigurationError(
                    f"target '{target}' is neither a preset ({', '.join(PRESETS)}) nor a weight file"
                )
            data["weights"] = parse_weight_file(target)
            data["target"] = to_snake_case(os.path.splitext(os.path.basename(target))[0])
    return build_experiment_config(data)
