"""Chat-completions client with retries, latency capture, and a mock backend.

The real client talks to any OpenAI-style ``/chat/completions`` endpoint
and measures wall-clock latency per request. The mock backend answers
in-process with one of four scripted behaviors (a kinematic prediction
and the three classic failure modes) and a synthetic latency derived from
token counts, so every downstream latency assertion is reproducible.
"""

from __future__ import annotations

import logging
import os
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import requests

from .domain import Waypoint, round_waypoint
from .predictors import predict_kinematic
from .prompts import (
    PromptRecord,
    TokenScheme,
    estimate_tokens,
    extract_tuples,
    horizon_from_system,
    serialize_waypoints,
)
from .windowing import INPUT_LENGTH, STEP_SECONDS, Window

logger = logging.getLogger(__name__)

TOKEN_ENV_VAR = "FTP_LLM_TOKEN"

#: Synthetic cost of one token in the mock backend, seconds.
MOCK_SECONDS_PER_TOKEN = 0.001


@dataclass
class EndpointConfig:
    """Connection settings for a chat-completions endpoint."""

    base_url: str
    model: str
    temperature: float = 0.0
    max_tokens: int = 512
    timeout_s: float = 30.0
    retries: int = 2
    auth_token: str | None = None
    backoff_base_s: float = 1.0
    max_in_flight: int = 4

    def __post_init__(self) -> None:
        if self.retries < 0:
            raise ValueError("retry count must be >= 0")
        if self.timeout_s <= 0:
            raise ValueError("timeout must be > 0")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.auth_token is None:
            self.auth_token = os.environ.get(TOKEN_ENV_VAR)


@dataclass(frozen=True)
class CompletionResult:
    """Verbatim response text with its end-to-end latency."""

    text: str
    latency_s: float
    attempts: int


class EndpointError(RuntimeError):
    def __init__(self, message: str, attempts: int = 1):
        super().__init__(message)
        self.attempts = attempts


def complete(record: PromptRecord, cfg: EndpointConfig) -> CompletionResult:
    """Send one prompt and return the first choice's text verbatim.

    The record must be an inference record (empty assistant). Transport
    failures are retried up to ``cfg.retries`` times with exponential
    backoff (base delay doubling, plus jitter); HTTP error statuses are
    not retried. Latency is wall clock from request send to full response
    on the successful attempt, so server-side queuing is included.
    """
    if record.assistant:
        raise ValueError("inference record must have an empty assistant part")
    url = cfg.base_url.rstrip("/") + "/chat/completions"
    headers = {"Content-Type": "application/json"}
    if cfg.auth_token:
        headers["Authorization"] = f"Bearer {cfg.auth_token}"
    payload = {
        "model": cfg.model,
        "messages": [
            {"role": "system", "content": record.system},
            {"role": "user", "content": record.user},
        ],
        "temperature": cfg.temperature,
        "max_tokens": cfg.max_tokens,
    }

    attempts = cfg.retries + 1
    for attempt in range(1, attempts + 1):
        start = time.perf_counter()
        try:
            response = requests.post(url, json=payload, headers=headers, timeout=cfg.timeout_s)
        except requests.Timeout as exc:
            if attempt == attempts:
                raise EndpointError(f"timeout after {attempt} attempt(s): {exc}", attempt) from exc
            _backoff_sleep(cfg, attempt)
            continue
        except requests.RequestException as exc:
            if attempt == attempts:
                raise EndpointError(
                    f"endpoint unreachable after {attempt} attempt(s): {exc}", attempt
                ) from exc
            _backoff_sleep(cfg, attempt)
            continue
        latency = time.perf_counter() - start
        if response.status_code != 200:
            raise EndpointError(
                f"endpoint returned status {response.status_code}: {response.text[:200]}",
                attempt,
            )
        try:
            text = response.json()["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise EndpointError(
                f"malformed response body: {response.text[:200]}", attempt
            ) from exc
        return CompletionResult(text=text if text is not None else "", latency_s=latency, attempts=attempt)
    raise AssertionError("unreachable")


def _backoff_sleep(cfg: EndpointConfig, attempt: int) -> None:
    delay = cfg.backoff_base_s * 2 ** (attempt - 1)
    delay += random.uniform(0, delay * 0.1)
    logger.debug("retrying in %.2fs (attempt %d failed)", delay, attempt)
    time.sleep(delay)


def complete_many(records: Sequence[PromptRecord], cfg: EndpointConfig) -> list[CompletionResult]:
    """Run prompts concurrently up to the in-flight limit, preserving order."""
    with ThreadPoolExecutor(max_workers=max(1, cfg.max_in_flight)) as pool:
        return list(pool.map(lambda r: complete(r, cfg), records))


# --- Mock backend ------------------------------------------------------------


class MockBehavior(Enum):
    KINEMATIC = "kinematic"
    EMPTY = "empty"
    GARBLED = "garbled"
    SIGN_FLIP = "sign-flip"


_GARBLED_TEXT = (
    "The aircraft is expected to keep following its current route near "
    "(103.2, 30.5, 10000) over the coming minutes."
)


def _window_from_prompt(record: PromptRecord) -> tuple[Window, int]:
    horizon = horizon_from_system(record.system)
    if horizon is None:
        raise ValueError("malformed prompt: system text states no horizon")
    tuples = extract_tuples(record.user)
    waypoints = []
    for items in tuples:
        if len(items) != 5:
            raise ValueError("malformed prompt: user text holds a non 5-tuple")
        try:
            waypoints.append(
                Waypoint(len(waypoints) * STEP_SECONDS, *(float(item) for item in items))
            )
        except ValueError as exc:
            raise ValueError(f"malformed prompt: {exc}") from exc
    if len(waypoints) != INPUT_LENGTH:
        raise ValueError(
            f"malformed prompt: user text holds {len(waypoints)} waypoints, expected {INPUT_LENGTH}"
        )
    window = Window(callsign="mock", inputs=tuple(waypoints), targets=())
    return window, horizon


def mock_complete(
    record: PromptRecord, behavior: MockBehavior = MockBehavior.KINEMATIC
) -> CompletionResult:
    """Deterministic in-process stand-in for a served model.

    KINEMATIC dead-reckons from the prompt's own waypoints; EMPTY returns
    nothing; GARBLED returns prose with a single 3-field tuple; SIGN_FLIP
    returns the kinematic answer with longitude signs negated. Latency is
    synthetic: one millisecond per number-atomic token of the user text
    plus the response text.
    """
    window, horizon = _window_from_prompt(record)
    if behavior is MockBehavior.EMPTY:
        text = ""
    elif behavior is MockBehavior.GARBLED:
        text = _GARBLED_TEXT
    else:
        predicted = [round_waypoint(w) for w in predict_kinematic(window, horizon)]
        if behavior is MockBehavior.SIGN_FLIP:
            predicted = [
                Waypoint(w.timestamp, -w.longitude, w.latitude, w.altitude, w.velocity, w.heading)
                for w in predicted
            ]
        text = serialize_waypoints(predicted)
    tokens = estimate_tokens(record.user, TokenScheme.NUMBER_ATOMIC) + estimate_tokens(
        text, TokenScheme.NUMBER_ATOMIC
    )
    return CompletionResult(text=text, latency_s=tokens * MOCK_SECONDS_PER_TOKEN, attempts=1)
