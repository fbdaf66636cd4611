"""
Evaluation report data model.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Optional


@dataclass
class EvalReport:
    """Quantitative result of one retrieval."""
    rmse: float
    per_index_weight_error: Dict[int, float] = field(default_factory=dict)
    config_echo: Dict[str, Any] = field(default_factory=dict)
    rmse_full_frame: Optional[float] = None
    method: str = ""
    phase_id: str = ""
    intensity: Optional[float] = None
    two_delta: Optional[float] = None
    seed: Optional[int] = None
    c_used: Optional[float] = None

    def __post_init__(self):
        if self.rmse < 0:
            raise ValueError("RMSE must be non-negative")
        if any(v < 0 for v in self.per_index_weight_error.values()):
            raise ValueError("Weight errors must be non-negative")

    def to_row(self) -> Dict[str, Any]:
        """Flat CSV row."""
        row: Dict[str, Any] = {
            "phase_id": self.phase_id,
            "method": self.method,
            "I": self.intensity,
            "two_delta": self.two_delta,
            "seed": self.seed,
            "rmse": self.rmse,
            "rmse_full_frame": self.rmse_full_frame,
            "C_used": self.c_used,
        }
        for index in sorted(self.per_index_weight_error):
            row[f"werr_{index}"] = self.per_index_weight_error[index]
        return row

    def to_json(self) -> Dict[str, Any]:
        data = {k: v for k, v in self.to_row().items() if not k.startswith("werr_")}
        data["per_index_weight_error"] = {str(k): v for k, v in sorted(self.per_index_weight_error.items())}
        data["config"] = self.config_echo
        return data
