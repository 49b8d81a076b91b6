"""Slice minute-aligned trajectories into fixed-shape prediction windows.

A window is 16 input waypoints plus ``horizon`` target waypoints taken
from the same trajectory with exact 60 s spacing throughout. The input
length is a constant, not a knob, so prompt templates stay stable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, TextIO

from .domain import Trajectory, Waypoint

INPUT_LENGTH = 16
SUPPORTED_HORIZONS = (1, 4, 8)
STEP_SECONDS = 60


@dataclass(frozen=True)
class Window:
    """16 input waypoints and the targets that immediately follow them."""

    callsign: str
    inputs: tuple[Waypoint, ...]
    targets: tuple[Waypoint, ...]

    @property
    def horizon(self) -> int:
        return len(self.targets)

    def waypoints(self) -> tuple[Waypoint, ...]:
        return self.inputs + self.targets


def check_continuity(waypoints: Iterable[Waypoint]) -> bool:
    """True iff every adjacent timestamp gap is exactly 60 s."""
    seq = list(waypoints)
    return all(b.timestamp - a.timestamp == STEP_SECONDS for a, b in zip(seq, seq[1:]))


def default_stride(horizon: int) -> int:
    """Smallest stride strictly larger than the window size."""
    return INPUT_LENGTH + horizon + 1


def sample_windows(
    traj: Trajectory,
    horizon: int,
    stride: int | None = None,
    *,
    allow_any_horizon: bool = False,
) -> list[Window]:
    """Scan a trajectory left to right and emit continuous windows.

    A window is emitted at offset k only if the 16 + horizon timestamps
    starting at k are exactly 60 s apart. After an emission the scan
    advances by ``stride``; after a continuity break it resumes at the
    first waypoint past the break, which maximizes yield without ever
    spanning a gap.
    """
    if horizon not in SUPPORTED_HORIZONS and not allow_any_horizon:
        raise ValueError(
            f"unsupported horizon {horizon}: expected one of {SUPPORTED_HORIZONS}"
        )
    if horizon < 1:
        raise ValueError(f"unsupported horizon {horizon}: must be >= 1")
    window_size = INPUT_LENGTH + horizon
    if stride is None:
        stride = default_stride(horizon)
    if stride < window_size:
        raise ValueError(f"stride too small: {stride} < window size {window_size}")

    waypoints = traj.waypoints
    windows: list[Window] = []
    k = 0
    while k + window_size <= len(waypoints):
        break_at = _first_break(waypoints, k, window_size)
        if break_at is None:
            windows.append(
                Window(
                    callsign=traj.callsign,
                    inputs=tuple(waypoints[k : k + INPUT_LENGTH]),
                    targets=tuple(waypoints[k + INPUT_LENGTH : k + window_size]),
                )
            )
            k += stride
        else:
            k = break_at + 1
    return windows


def _first_break(waypoints: tuple[Waypoint, ...], start: int, size: int) -> int | None:
    """Index of the first waypoint whose successor is not 60 s later."""
    for i in range(start, start + size - 1):
        if waypoints[i + 1].timestamp - waypoints[i].timestamp != STEP_SECONDS:
            return i
    return None


# --- JSON Lines interchange --------------------------------------------------


def _waypoint_to_row(w: Waypoint) -> list[float]:
    return [w.timestamp, w.longitude, w.latitude, w.altitude, w.velocity, w.heading]


def _waypoint_from_row(row: list[float]) -> Waypoint:
    return Waypoint(int(row[0]), float(row[1]), float(row[2]), float(row[3]), float(row[4]), float(row[5]))


def window_to_obj(window: Window) -> dict:
    return {
        "callsign": window.callsign,
        "horizon": window.horizon,
        "input": [_waypoint_to_row(w) for w in window.inputs],
        "target": [_waypoint_to_row(w) for w in window.targets],
    }


def window_from_obj(obj: dict) -> Window:
    return Window(
        callsign=obj["callsign"],
        inputs=tuple(_waypoint_from_row(r) for r in obj["input"]),
        targets=tuple(_waypoint_from_row(r) for r in obj["target"]),
    )


def write_windows_jsonl(windows: Iterable[Window], target: str | Path | TextIO) -> None:
    if isinstance(target, (str, Path)):
        with open(target, "w", encoding="utf-8") as fh:
            write_windows_jsonl(windows, fh)
            return
    for window in windows:
        target.write(json.dumps(window_to_obj(window)))
        target.write("\n")


def read_windows_jsonl(source: str | Path | TextIO) -> list[Window]:
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as fh:
            return read_windows_jsonl(fh)
    return [window_from_obj(json.loads(line)) for line in source if line.strip()]
