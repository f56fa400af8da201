"""Client side of the external-scorer wire protocol.

An external model is any process that speaks newline-delimited JSON over its
standard streams, one object per line, UTF-8:

* handshake: we send ``{"type": "hello", "protocol": 1}``; the process must
  answer ``{"type": "ready", "protocol": 1}``.
* request:   ``{"type": "score", "id": n, "instances": [[v, ...], ...]}``
  with values as JSON numbers or strings.
* response:  ``{"type": "scores", "id": n, "scores": [s, ...]}`` echoing the
  request id, one score in [0, 1] per instance, same order.
* failure:   ``{"type": "error", "id": n, "message": "..."}`` aborts the run.

Requests are strictly serial (no pipelining) and each round-trip is bounded
by CFIKIT_BRIDGE_TIMEOUT_MS (default 30000). Scores outside [0, 1] are a hard
error, not clamped: silently rescaling a misconfigured model would corrupt
every downstream sum. A dead bridge fails the run; restarts are never
attempted, so a report either reflects one live process or does not exist.

A handle is single-flight: it may move between threads but concurrent batches
through one handle are not supported.
"""

from __future__ import annotations

import json
import math
import os
import select
import shlex
import subprocess
import time
from typing import Sequence

from .core import Instance
from .errors import (
    BridgeError,
    BridgeTimeoutError,
    HandshakeError,
    ScoreOutOfRangeError,
    SpawnError,
)

PROTOCOL_VERSION = 1
DEFAULT_TIMEOUT_MS = 30_000
TIMEOUT_ENV_VAR = "CFIKIT_BRIDGE_TIMEOUT_MS"


def configured_timeout_ms() -> int:
    raw = os.environ.get(TIMEOUT_ENV_VAR)
    if raw is None:
        return DEFAULT_TIMEOUT_MS
    try:
        value = int(raw)
    except ValueError:
        raise BridgeError(f"{TIMEOUT_ENV_VAR} must be an integer, got {raw!r}") from None
    if value <= 0:
        raise BridgeError(f"{TIMEOUT_ENV_VAR} must be positive, got {value}")
    return value


class _LineReader:
    """Buffered line reader over a pipe fd with a deadline per line."""

    def __init__(self, fd: int):
        self._fd = fd
        self._buffer = b""
        self._eof = False

    def readline(self, timeout_s: float) -> bytes | None:
        """One line without the newline, or None on clean EOF."""
        deadline = time.monotonic() + timeout_s
        while True:
            newline = self._buffer.find(b"\n")
            if newline >= 0:
                line, self._buffer = self._buffer[:newline], self._buffer[newline + 1 :]
                return line
            if self._eof:
                if self._buffer:
                    line, self._buffer = self._buffer, b""
                    return line
                return None
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise BridgeTimeoutError(
                    f"no response from bridge within {timeout_s * 1000:.0f} ms"
                )
            ready, _, _ = select.select([self._fd], [], [], remaining)
            if not ready:
                raise BridgeTimeoutError(
                    f"no response from bridge within {timeout_s * 1000:.0f} ms"
                )
            chunk = os.read(self._fd, 65536)
            if chunk:
                self._buffer += chunk
            else:
                self._eof = True


class BridgeModel:
    """Scoring handle backed by a child process speaking the wire protocol."""

    def __init__(self, process: subprocess.Popen, timeout_ms: int):
        self._process = process
        self._timeout_s = timeout_ms / 1000.0
        self._reader = _LineReader(process.stdout.fileno())
        self._next_id = 0
        self._closed = False

    @classmethod
    def spawn(cls, command_line: str, *, timeout_ms: int | None = None) -> "BridgeModel":
        """Start the bridge process and complete the handshake."""
        argv = shlex.split(command_line)
        if not argv:
            raise SpawnError("empty bridge command line")
        try:
            process = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=None,  # stderr passthrough is allowed for bridge logging
            )
        except OSError as exc:
            raise SpawnError(f"cannot start bridge {argv[0]!r}: {exc}") from exc
        handle = cls(process, timeout_ms or configured_timeout_ms())
        try:
            handle._handshake()
        except Exception:
            handle.close()
            raise
        return handle

    def _send(self, obj: dict) -> None:
        try:
            self._process.stdin.write(json.dumps(obj).encode("utf-8") + b"\n")
            self._process.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise BridgeError(f"bridge process closed its input: {exc}") from exc

    def _receive(self) -> dict:
        line = self._reader.readline(self._timeout_s)
        if line is None:
            raise BridgeError("bridge process closed its output mid-session")
        try:
            obj = json.loads(line.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise BridgeError(f"bridge sent a non-JSON line: {line[:200]!r}") from exc
        if not isinstance(obj, dict):
            raise BridgeError(f"bridge sent a non-object message: {obj!r}")
        return obj

    def _handshake(self) -> None:
        self._send({"type": "hello", "protocol": PROTOCOL_VERSION})
        try:
            reply = self._receive()
        except BridgeError as exc:
            raise HandshakeError(str(exc)) from exc
        if reply.get("type") != "ready" or reply.get("protocol") != PROTOCOL_VERSION:
            raise HandshakeError(f"expected ready/protocol {PROTOCOL_VERSION}, got {reply!r}")

    def score_batch(self, instances: Sequence[Instance]) -> list[float]:
        if self._closed:
            raise BridgeError("bridge handle is closed")
        if not instances:
            return []
        request_id = self._next_id
        self._next_id += 1
        self._send(
            {
                "type": "score",
                "id": request_id,
                "instances": [list(x.values) for x in instances],
            }
        )
        reply = self._receive()
        if reply.get("type") == "error":
            raise BridgeError(f"bridge reported an error: {reply.get('message')!r}")
        if reply.get("type") != "scores":
            raise BridgeError(f"expected a scores message, got {reply!r}")
        if reply.get("id") != request_id:
            raise BridgeError(
                f"response id {reply.get('id')!r} does not match request id {request_id}"
            )
        scores = reply.get("scores")
        if not isinstance(scores, list) or len(scores) != len(instances):
            raise BridgeError(
                f"expected {len(instances)} scores, got {scores!r}"
            )
        validated: list[float] = []
        for s in scores:
            if isinstance(s, bool) or not isinstance(s, (int, float)):
                raise ScoreOutOfRangeError(f"bridge returned a non-numeric score {s!r}")
            s = float(s)
            if not math.isfinite(s) or not 0.0 <= s <= 1.0:
                raise ScoreOutOfRangeError(f"bridge returned score {s!r} outside [0, 1]")
            validated.append(s)
        return validated

    def close(self) -> None:
        if self._closed:
            return
        self._closed = True
        process = self._process
        try:
            if process.stdin:
                process.stdin.close()
        except OSError:
            pass
        try:
            process.wait(timeout=2.0)
        except subprocess.TimeoutExpired:
            process.kill()
            process.wait()

    def __enter__(self) -> "BridgeModel":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()
