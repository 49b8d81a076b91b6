"""Serialize windows into chat prompts and parse model completions back.

The text format is the contract here: one "(lon, lat, alt, vel, hdg)"
tuple per line with fixed decimal counts 5/5/3/3/2, so that serializing
canonically rounded waypoints and parsing the text back is lossless.
Completions from real models are messy; parsing never raises and sorts
every outcome into waypoints or one of three failure classes.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

from .domain import LATITUDE_RANGE, LONGITUDE_RANGE, Waypoint
from .windowing import STEP_SECONDS, Window

TEMPLATE_VERSION = "v1"

#: Waypoints whose longitude or latitude strays farther than this from the
#: last observed position are treated as severe deviations. Five degrees is
#: far beyond any few-minute airliner displacement, so only pathological
#: output trips it.
DEFAULT_PLAUSIBILITY_RADIUS_DEG = 5.0

_SYSTEM_TEMPLATE = (
    "You are an expert in flight prediction. You are given the recent "
    "trajectory of an aircraft as a sequence of waypoints, one per minute. "
    "Each waypoint has the form (longitude, latitude, altitude, velocity, "
    "heading): longitude and latitude in degrees, altitude in meters, "
    "velocity in kilometers per hour, and heading in degrees clockwise "
    "from north, in [0, 360). "
    "Predict the next {horizon} waypoint{plural} of the flight. "
    "Output only coordinate tuples, one per line, in exactly the input "
    "format with 5, 5, 3, 3, and 2 decimal places; no explanations and "
    "no extra text."
)

_HORIZON_RE = re.compile(r"[Pp]redict the next (\d+) waypoint")
_TUPLE_RE = re.compile(r"\(([^()]*)\)")
_NUMBER_RE = re.compile(r"^[+-]?(?:\d+(?:\.\d*)?|\.\d+)$")


@dataclass(frozen=True)
class PromptRecord:
    """System/user/assistant text triple; assistant is empty at inference."""

    system: str
    user: str
    assistant: str
    template_version: str = TEMPLATE_VERSION


class FailureKind(Enum):
    MISSING_TRAJECTORY = "missing-trajectory"
    UNEXPECTED_FORMAT = "unexpected-format"
    SEVERE_DEVIATION = "severe-deviation"


@dataclass(frozen=True)
class ParseOutcome:
    """Either parsed waypoints or a classified failure, never both."""

    waypoints: tuple[Waypoint, ...] | None = None
    failure: FailureKind | None = None
    diagnostic: str = ""

    def __post_init__(self) -> None:
        if (self.waypoints is None) == (self.failure is None):
            raise ValueError("exactly one of waypoints/failure must be set")

    @property
    def ok(self) -> bool:
        return self.waypoints is not None

    @classmethod
    def success(cls, waypoints: Sequence[Waypoint], diagnostic: str = "") -> "ParseOutcome":
        return cls(waypoints=tuple(waypoints), diagnostic=diagnostic)

    @classmethod
    def failed(cls, kind: FailureKind, diagnostic: str) -> "ParseOutcome":
        return cls(failure=kind, diagnostic=diagnostic)


def serialize_waypoint(w: Waypoint) -> str:
    """One waypoint as "(lon, lat, alt, vel, hdg)" at canonical precision."""
    return (
        f"({w.longitude:.5f}, {w.latitude:.5f}, {w.altitude:.3f}, "
        f"{w.velocity:.3f}, {w.heading:.2f})"
    )


def serialize_waypoints(waypoints: Sequence[Waypoint]) -> str:
    """Newline-joined tuples, no trailing newline. Timestamps are implicit."""
    return "\n".join(serialize_waypoint(w) for w in waypoints)


def system_text(horizon: int) -> str:
    return _SYSTEM_TEMPLATE.format(horizon=horizon, plural="s" if horizon != 1 else "")


def horizon_from_system(text: str) -> int | None:
    """Recover the horizon stated in a system prompt, None if absent."""
    match = _HORIZON_RE.search(text)
    return int(match.group(1)) if match else None


def build_prompt(window: Window, include_assistant: bool) -> PromptRecord:
    """Render a window into the canonical prompt triple.

    With ``include_assistant`` the targets are serialized as the assistant
    turn (fine-tuning records); without it the assistant text is empty
    (inference records).
    """
    return PromptRecord(
        system=system_text(window.horizon),
        user=serialize_waypoints(window.inputs),
        assistant=serialize_waypoints(window.targets) if include_assistant else "",
    )


def extract_tuples(text: str) -> list[list[str]]:
    """Parenthesized groups that plausibly hold data, as raw item strings.

    A group counts as a candidate tuple if at least one comma-separated
    item inside it parses as a plain decimal number; purely textual
    parentheticals in surrounding prose are ignored. Items keep their raw
    text so the caller can distinguish bad arity from bad fields.
    """
    candidates = []
    for match in _TUPLE_RE.finditer(text):
        items = [item.strip().strip("`*_").strip() for item in match.group(1).split(",")]
        if any(_NUMBER_RE.match(item) for item in items):
            candidates.append(items)
    return candidates


def classify_severe(
    predicted: Waypoint,
    context: Window,
    radius: float = DEFAULT_PLAUSIBILITY_RADIUS_DEG,
) -> bool:
    """True when a parsed prediction is too implausible to score.

    Flags coordinates outside the valid box, positions farther than
    ``radius`` degrees from the last observed waypoint, and the
    characteristic sign-flip failure (longitude or latitude coming back
    with the opposite sign when the aircraft is clearly away from zero).
    """
    last = context.inputs[-1]
    if not (LONGITUDE_RANGE[0] <= predicted.longitude <= LONGITUDE_RANGE[1]):
        return True
    if not (LATITUDE_RANGE[0] <= predicted.latitude <= LATITUDE_RANGE[1]):
        return True
    if abs(predicted.longitude - last.longitude) > radius:
        return True
    if abs(predicted.latitude - last.latitude) > radius:
        return True
    if abs(last.longitude) > 1.0 and predicted.longitude * last.longitude < 0.0:
        return True
    if abs(last.latitude) > 1.0 and predicted.latitude * last.latitude < 0.0:
        return True
    return False


def parse_completion(
    text: str,
    horizon: int,
    context: Window,
    radius: float = DEFAULT_PLAUSIBILITY_RADIUS_DEG,
) -> ParseOutcome:
    """Parse arbitrary model output into waypoints or a failure class.

    Never raises. Classification: no numeric tuples at all is a missing
    trajectory; too few tuples, wrong arity, or non-numeric fields is an
    unexpected format; an implausible parsed waypoint is a severe
    deviation. Tuples beyond the requested horizon are ignored.
    """
    candidates = extract_tuples(text)
    if not candidates:
        return ParseOutcome.failed(FailureKind.MISSING_TRAJECTORY, "no coordinate tuples found")
    if len(candidates) < horizon:
        return ParseOutcome.failed(
            FailureKind.UNEXPECTED_FORMAT,
            f"found {len(candidates)} tuple(s), expected {horizon}",
        )

    last_ts = context.inputs[-1].timestamp
    waypoints = []
    for step, items in enumerate(candidates[:horizon], start=1):
        if len(items) != 5:
            return ParseOutcome.failed(
                FailureKind.UNEXPECTED_FORMAT,
                f"tuple {step} has {len(items)} fields, expected 5",
            )
        bad = [item for item in items if not _NUMBER_RE.match(item)]
        if bad:
            return ParseOutcome.failed(
                FailureKind.UNEXPECTED_FORMAT,
                f"tuple {step} has non-numeric field {bad[0]!r}",
            )
        values = [float(item) for item in items]
        waypoints.append(Waypoint(last_ts + step * STEP_SECONDS, *values))

    for step, w in enumerate(waypoints, start=1):
        if classify_severe(w, context, radius):
            return ParseOutcome.failed(
                FailureKind.SEVERE_DEVIATION,
                f"waypoint {step} deviates implausibly from the last observed position",
            )

    diagnostic = ""
    if len(candidates) > horizon:
        diagnostic = f"ignored {len(candidates) - horizon} extra tuple(s)"
    return ParseOutcome.success(waypoints, diagnostic)


# --- Dataset emission --------------------------------------------------------


def emit_dataset(records: Iterable[PromptRecord], path: str | Path) -> dict:
    """Write prompt records as JSON Lines plus a sidecar manifest.

    All records must share one template version. The manifest (written to
    ``<path>.manifest.json``) pins template version, horizon, record count,
    and a digest of the emitted bytes, which makes regeneration checks a
    file compare. Returns the manifest.
    """
    records = list(records)
    versions = {r.template_version for r in records}
    if len(versions) > 1:
        raise ValueError(f"records mix template versions: {sorted(versions)}")

    path = Path(path)
    lines = [
        json.dumps({"system": r.system, "user": r.user, "assistant": r.assistant})
        for r in records
    ]
    payload = "".join(line + "\n" for line in lines)
    path.write_text(payload, encoding="utf-8")

    manifest = {
        "template_version": records[0].template_version if records else TEMPLATE_VERSION,
        "horizon": horizon_from_system(records[0].system) if records else None,
        "records": len(records),
        "sha256": hashlib.sha256(payload.encode("utf-8")).hexdigest(),
    }
    manifest_path = path.with_name(path.name + ".manifest.json")
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return manifest


def read_dataset(path: str | Path) -> list[PromptRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                obj = json.loads(line)
                records.append(
                    PromptRecord(system=obj["system"], user=obj["user"], assistant=obj["assistant"])
                )
    return records


# --- Token counting ----------------------------------------------------------


class TokenScheme(Enum):
    DIGIT_SPLIT = "digit-split"
    NUMBER_ATOMIC = "number-atomic"


_TOKEN_RE = re.compile(r"\d+(?:\.\d+)?|[A-Za-z]+|.", re.DOTALL)


def estimate_tokens(text: str, scheme: TokenScheme) -> int:
    """Crude token count for latency analysis; never used for truncation.

    Words count 1; every other character (punctuation and whitespace
    alike) counts 1. A number like "103.25" counts 1 under NUMBER_ATOMIC
    and as its digit groups plus separators (3) under DIGIT_SPLIT.
    """
    count = 0
    for token in _TOKEN_RE.findall(text):
        if token[0].isdigit():
            if scheme is TokenScheme.NUMBER_ATOMIC:
                count += 1
            else:
                count += 2 * len(token.split(".")) - 1
        else:
            count += 1
    return count
