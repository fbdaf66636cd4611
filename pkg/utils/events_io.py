"""
Event stream CSV interchange and accumulation into event planes.

Format: UTF-8 text, one event per line `t_us,x,y,polarity`, with integer
microsecond timestamps, x the column and y the row, polarity in {0, 1}
(0 meaning negative) or {-1, +1}. Lines starting with `#` and blank lines are
ignored; an optional header `t,x,y,p` may open the file.
"""

import csv
import math
from typing import IO, Iterable, Optional, Tuple, Union

import numpy as np

from models.config import DEFAULT_PITCH
from models.events import EventPlane, EventRecord, EventStream
from models.exceptions import DomainError, EventBoundsError, EventOrderError, EventParseError, EventStreamError
from utils.logger import logger

HEADER = ("t", "x", "y", "p")
_HEADER_ALIASES = {HEADER, ("t_us", "x", "y", "polarity")}
REORDER_TOLERANCE = 1e-3  # seconds
_POLARITY = {"1": 1, "+1": 1, "0": -1, "-1": -1}


def _read_text(byte_stream: Union[bytes, IO[bytes]]) -> str:
    raw = byte_stream if isinstance(byte_stream, (bytes, bytearray)) else byte_stream.read()
    try:
        return bytes(raw).decode("utf-8")
    except UnicodeDecodeError as e:
        raise EventStreamError(f"Event stream is not UTF-8: {e}") from e


def _parse_timestamp(token: str, line_number: int) -> float:
    try:
        micros = int(token)
        seconds = micros / 1e6
    except ValueError:
        try:
            seconds = float(token) / 1e6
        except ValueError:
            raise EventParseError(f"bad timestamp '{token}'", line_number) from None
    if not math.isfinite(seconds) or seconds < 0:
        raise EventParseError(f"timestamp must be finite and non-negative, got '{token}'", line_number)
    return seconds


def _parse_int(token: str, what: str, line_number: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise EventParseError(f"bad {what} '{token}'", line_number) from None


def parse_event_csv(
    byte_stream: Union[bytes, IO[bytes]],
    resolution: Tuple[int, int],
    duration_hint: Optional[float] = None,
) -> EventStream:
    """Parse and validate an event CSV into a time-sorted EventStream.

    Args:
        byte_stream: Raw bytes or a binary file object
        resolution: Sensor (rows, cols) used for bounds checks
        duration_hint: Optional translation time 2T in seconds

    Returns:
        EventStream with timestamps in seconds

    Raises:
        EventParseError: Malformed line (message names the line number)
        EventBoundsError: Pixel outside the sensor
        EventOrderError: Timestamp regression beyond the reorder tolerance
    """
    rows, cols = resolution
    text = _read_text(byte_stream)
    records = []
    latest = -math.inf
    seen_data = False
    for line_number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        # Comments may hold quotes or commas; drop them before CSV splitting
        if not stripped or stripped.startswith("#"):
            continue
        fields = [f.strip() for f in next(csv.reader([line]))]
        if not seen_data and tuple(f.lower() for f in fields) in _HEADER_ALIASES:
            seen_data = True
            continue
        seen_data = True
        if len(fields) != 4:
            raise EventParseError(f"expected 4 fields, got {len(fields)}", line_number)

        t = _parse_timestamp(fields[0], line_number)
        x = _parse_int(fields[1], "x", line_number)
        y = _parse_int(fields[2], "y", line_number)
        if fields[3] not in _POLARITY:
            raise EventParseError(f"bad polarity '{fields[3]}'", line_number)
        if not (0 <= x < cols and 0 <= y < rows):
            raise EventBoundsError(f"line {line_number}: pixel ({x}, {y}) outside {cols}x{rows} sensor")
        if t < latest - REORDER_TOLERANCE:
            raise EventOrderError(
                f"line {line_number}: timestamp {t:.6f} s precedes {latest:.6f} s by more than "
                f"{REORDER_TOLERANCE * 1e3:g} ms"
            )
        latest = max(latest, t)
        records.append(EventRecord(t, x, y, _POLARITY[fields[3]]))

    # Stable sort absorbs the tolerated reordering
    records.sort(key=lambda r: r.t)
    logger.debug(f"Parsed {len(records)} events")
    return EventStream(records, (rows, cols), duration_hint)


def write_event_csv(records: Iterable[EventRecord], stream: IO[str]) -> int:
    """Write events in the canonical format (header, integer microseconds, polarity 1/0).

    Returns:
        Number of events written
    """
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(HEADER)
    count = 0
    for record in records:
        writer.writerow((int(round(record.t * 1e6)), record.x, record.y, 1 if record.polarity > 0 else 0))
        count += 1
    return count


def accumulate(
    stream: EventStream,
    window: Optional[Tuple[float, float]],
    mu: float,
    delta: float,
    duration: Optional[float] = None,
    pitch: float = DEFAULT_PITCH,
) -> EventPlane:
    """Signed event sum per pixel over the half-open window [t_start, t_end).

    A window of None takes every record.
    """
    t, x, y, p = stream.as_arrays()
    if window is not None:
        t_start, t_end = window
        if not t_start < t_end:
            raise DomainError(f"Window start {t_start} must precede end {t_end}")
        keep = (t >= t_start) & (t < t_end)
        x, y, p = x[keep], y[keep], p[keep]
    counts = np.zeros(stream.resolution, dtype=np.int64)
    np.add.at(counts, (y, x), p)
    if duration is None:
        duration = stream.duration_hint if stream.duration_hint is not None else 1.0
    return EventPlane(counts, mu, delta, duration, pitch)
