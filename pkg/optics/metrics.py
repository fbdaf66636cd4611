"""
Evaluation metrics: piston-removed RMSE and Zernike weight errors.
"""

from typing import Any, Dict, Iterable, List, Sequence

import numpy as np

from models.config import ERROR_MESSAGES, MAX_OSA_INDEX
from models.exceptions import DomainError
from models.grids import PhaseMap, PupilGrid, require_same_shape
from optics.zernike import ZernikeWeights, fit_weights


def rmse(a: PhaseMap, b: PhaseMap, mask: np.ndarray) -> float:
    """Root-mean-square phase difference over the mask, piston removed from both maps."""
    require_same_shape(a.values, b.values, "phase maps")
    mask = np.asarray(mask, dtype=bool)
    require_same_shape(a.values, mask, "phase and mask")
    if not mask.any():
        raise DomainError(ERROR_MESSAGES["empty_mask"])
    da = a.values[mask] - a.values[mask].mean()
    db = b.values[mask] - b.values[mask].mean()
    return float(np.sqrt(np.mean((da - db) ** 2)))


def rmse_full_frame(a: PhaseMap, b: PhaseMap) -> float:
    return rmse(a, b, np.ones(a.shape, dtype=bool))


def weight_errors(
    true_weights: ZernikeWeights,
    retrieved_phase: PhaseMap,
    grid: PupilGrid,
    max_index: int = MAX_OSA_INDEX,
) -> Dict[int, float]:
    """|true - fitted| Zernike weight per OSA index 1..max_index (piston excluded)."""
    fitted = fit_weights(retrieved_phase, grid, max_index)
    return {
        i: abs(true_weights.get(i) - fitted.get(i))
        for i in range(1, max_index + 1)
    }


def summarize(
    rows: Iterable[Dict[str, Any]],
    keys: Sequence[str],
    value: str = "rmse",
) -> List[Dict[str, Any]]:
    """Mean, standard deviation and count of `value` per distinct `keys` tuple.

    Groups keep first-appearance order.
    """
    groups: Dict[tuple, List[float]] = {}
    for row in rows:
        groups.setdefault(tuple(row[k] for k in keys), []).append(float(row[value]))
    summary = []
    for group_key, values in groups.items():
        entry: Dict[str, Any] = dict(zip(keys, group_key))
        arr = np.asarray(values)
        entry[f"mean_{value}"] = float(arr.mean())
        entry[f"std_{value}"] = float(arr.std(ddof=1)) if len(arr) > 1 else 0.0
        entry["count"] = len(arr)
        summary.append(entry)
    return summary
