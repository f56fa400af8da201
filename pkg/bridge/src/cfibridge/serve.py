"""Sequential request/response loop for the scoring wire protocol.

The engine side speaks newline-delimited JSON over a child process's
standard streams: one hello/ready handshake, then strictly alternating
score requests and scores responses. This module is the serving half;
plug in any callable that maps a batch of instances to class-1
probabilities.

Scores outside [0, 1] are reported as errors, never clamped: a clamped
score would silently break the additivity arithmetic downstream.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass
from typing import Callable, IO, Sequence

PROTOCOL_VERSION = 1

FeatureValue = float | str
Prediction = Callable[[list[list[FeatureValue]]], Sequence[float]]


@dataclass
class BridgeSession:
    """One connection's state: the model callable and the instance arity
    locked in by the first non-empty request."""

    prediction: Prediction
    protocol_version: int = PROTOCOL_VERSION
    arity: int | None = None


def _check_instances(session: BridgeSession, instances: object) -> list[list[FeatureValue]]:
    if not isinstance(instances, list):
        raise ValueError('"instances" must be an array')
    checked: list[list[FeatureValue]] = []
    for row in instances:
        if not isinstance(row, list):
            raise ValueError("each instance must be an array of values")
        for value in row:
            if isinstance(value, bool) or not isinstance(value, (int, float, str)):
                raise ValueError(f"instance values must be numbers or strings, got {value!r}")
        if session.arity is None:
            session.arity = len(row)
        elif len(row) != session.arity:
            raise ValueError(
                f"instance has {len(row)} values, session is locked to {session.arity}"
            )
        checked.append(row)
    return checked


def _check_scores(scores: object, expected: int) -> list[float]:
    if not isinstance(scores, Sequence) or isinstance(scores, (str, bytes)):
        raise ValueError("prediction must return a sequence of scores")
    if len(scores) != expected:
        raise ValueError(f"prediction returned {len(scores)} scores for {expected} instances")
    out: list[float] = []
    for score in scores:
        if isinstance(score, bool) or not isinstance(score, (int, float)):
            raise ValueError(f"score {score!r} is not a number")
        score = float(score)
        if score != score or not 0.0 <= score <= 1.0:
            raise ValueError(f"score {score!r} is outside [0, 1]")
        out.append(score)
    return out


def serve_loop(
    prediction: Prediction,
    stdin: IO[str] | None = None,
    stdout: IO[str] | None = None,
) -> int:
    """Serve until EOF. Returns the process exit status: 0 on a clean EOF,
    1 after emitting an error object (protocol violation, prediction
    failure, or an out-of-range score)."""
    stdin = sys.stdin if stdin is None else stdin
    stdout = sys.stdout if stdout is None else stdout

    def emit(obj: dict) -> None:
        stdout.write(json.dumps(obj) + "\n")
        stdout.flush()

    def fail(request_id: int, message: str) -> int:
        emit({"type": "error", "id": request_id, "message": message})
        return 1

    first = stdin.readline()
    if not first:
        return 0
    try:
        hello = json.loads(first)
    except ValueError:
        return fail(0, "handshake line is not valid JSON")
    if not isinstance(hello, dict) or hello.get("type") != "hello":
        return fail(0, "expected a hello object before any requests")
    if hello.get("protocol") != PROTOCOL_VERSION:
        return fail(0, f"unsupported protocol {hello.get('protocol')!r}")
    emit({"type": "ready", "protocol": PROTOCOL_VERSION})

    session = BridgeSession(prediction=prediction)
    for line in stdin:
        if not line.strip():
            continue
        try:
            request = json.loads(line)
        except ValueError:
            return fail(0, "request line is not valid JSON")
        if not isinstance(request, dict) or request.get("type") != "score":
            kind = request.get("type") if isinstance(request, dict) else request
            return fail(0, f"expected a score request, got {kind!r}")
        request_id = request.get("id")
        if isinstance(request_id, bool) or not isinstance(request_id, int) or request_id < 0:
            return fail(0, f"request id must be a non-negative integer, got {request_id!r}")

        try:
            instances = _check_instances(session, request.get("instances"))
        except ValueError as exc:
            return fail(request_id, str(exc))
        try:
            scores = _check_scores(prediction(instances), len(instances))
        except Exception as exc:
            return fail(request_id, f"prediction failed: {exc}")

        emit({"type": "scores", "id": request_id, "scores": scores})
    return 0
