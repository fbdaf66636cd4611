"""
Event data models: single events, recorded streams and accumulated planes.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from models.config import DEFAULT_PITCH


@dataclass(frozen=True)
class EventRecord:
    """One event: time since translation start (s), pixel (x=col, y=row), polarity +1/-1."""
    t: float
    x: int
    y: int
    polarity: int


@dataclass
class EventPlane:
    """Net event counts (positive minus negative) over one axial translation.

    delta is the half translation distance in meters, duration is 2T in seconds.
    """
    counts: np.ndarray
    mu: float
    delta: float
    duration: float = 1.0
    pitch: float = DEFAULT_PITCH

    @property
    def shape(self) -> Tuple[int, int]:
        return self.counts.shape

    @property
    def total_events(self) -> int:
        return int(np.abs(self.counts).sum())


@dataclass
class EventStream:
    """Time-ordered events from one recording."""
    records: List[EventRecord] = field(default_factory=list)
    resolution: Tuple[int, int] = (0, 0)
    duration_hint: Optional[float] = None

    def __len__(self) -> int:
        return len(self.records)

    def as_arrays(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Column arrays (t, x, y, polarity)."""
        if not self.records:
            empty_i = np.zeros(0, dtype=np.int64)
            return np.zeros(0, dtype=np.float64), empty_i, empty_i.copy(), empty_i.copy()
        t = np.fromiter((r.t for r in self.records), dtype=np.float64, count=len(self.records))
        x = np.fromiter((r.x for r in self.records), dtype=np.int64, count=len(self.records))
        y = np.fromiter((r.y for r in self.records), dtype=np.int64, count=len(self.records))
        p = np.fromiter((r.polarity for r in self.records), dtype=np.int64, count=len(self.records))
        return t, x, y, p
