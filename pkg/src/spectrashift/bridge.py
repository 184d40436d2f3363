"""Host-side client for external frozen encoders.

Wire protocol (version 1): UTF-8 NDJSON, one object per line, newline
terminated, no trailing whitespace. The host opens with
{"type":"hello","version":1}; the adapter answers
{"type":"ready","version":1,"dim":D,"max_length":L}. Embedding requests
{"type":"embed","id":k,"batch":[[...],...]} carry strictly increasing ids
with at most one request in flight; replies
{"type":"embedding","id":k,"vectors":[[...],...]} must match the request
id, batch order, and advertised dimension. Any violation aborts the run;
nothing is ever silently substituted.
"""

from __future__ import annotations

import json
import logging
import queue
import shlex
import socket
import subprocess
import threading
from dataclasses import dataclass

import numpy as np

from .errors import BridgeError, BridgeProtocolError, BridgeTimeoutError

logger = logging.getLogger(__name__)

PROTOCOL_VERSION = 1


@dataclass(frozen=True)
class BridgeEndpoint:
    """Where the adapter lives: a child process on stdio, or a TCP peer."""

    launch_command: tuple[str, ...] | None = None
    host: str | None = None
    port: int | None = None
    timeout_ms: int = 30000

    def __post_init__(self):
        stdio = self.launch_command is not None
        tcp = self.host is not None or self.port is not None
        if stdio == tcp:
            raise BridgeError("configure exactly one transport: stdio or tcp")
        if tcp and (self.host is None or self.port is None):
            raise BridgeError("tcp transport needs both host and port")
        if self.timeout_ms <= 0:
            raise BridgeError(f"timeout_ms must be positive, got {self.timeout_ms}")

    @classmethod
    def stdio(cls, command, timeout_ms: int = 30000) -> "BridgeEndpoint":
        if isinstance(command, str):
            command = tuple(shlex.split(command))
        return cls(launch_command=tuple(command), timeout_ms=timeout_ms)

    @classmethod
    def tcp(cls, host: str, port: int, timeout_ms: int = 30000) -> "BridgeEndpoint":
        return cls(host=host, port=port, timeout_ms=timeout_ms)

    def describe(self) -> str:
        if self.launch_command is not None:
            return " ".join(self.launch_command)
        return f"tcp://{self.host}:{self.port}"


def _encode_line(obj: dict) -> bytes:
    return json.dumps(obj, separators=(",", ":")).encode("utf-8") + b"\n"


def _decode_line(raw: bytes) -> dict:
    if not raw.endswith(b"\n"):
        raise BridgeProtocolError("reply line is not newline-terminated")
    body = raw[:-1]
    if body != body.rstrip():
        raise BridgeProtocolError("reply line carries trailing whitespace")
    try:
        text = body.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise BridgeProtocolError(f"reply is not valid UTF-8 at byte {exc.start}") from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        offset = len(text[: exc.pos].encode("utf-8"))
        raise BridgeProtocolError(
            f"malformed JSON reply at byte offset {offset}: {exc.msg}"
        ) from None
    if not isinstance(obj, dict):
        raise BridgeProtocolError(f"reply must be a JSON object, got {type(obj).__name__}")
    return obj


class _LineReader:
    """Background reader pushing raw lines (or a sentinel on EOF) to a queue."""

    _EOF = object()

    def __init__(self, stream):
        self._queue: queue.Queue = queue.Queue()
        self._thread = threading.Thread(target=self._pump, args=(stream,), daemon=True)
        self._thread.start()

    def _pump(self, stream):
        try:
            for raw in iter(stream.readline, b""):
                self._queue.put(raw)
        except (OSError, ValueError):
            pass
        self._queue.put(self._EOF)

    def readline(self, timeout_s: float) -> bytes:
        try:
            item = self._queue.get(timeout=timeout_s)
        except queue.Empty:
            raise BridgeTimeoutError(f"no reply within {timeout_s * 1000:.0f} ms") from None
        if item is self._EOF:
            raise BridgeProtocolError("adapter closed the connection")
        return item


def _drain_stderr(stream, name: str):
    def pump():
        try:
            for raw in iter(stream.readline, b""):
                logger.debug("%s stderr: %s", name, raw.decode("utf-8", "replace").rstrip())
        except (OSError, ValueError):
            pass

    threading.Thread(target=pump, daemon=True).start()


class BridgeClient:
    """One connection to one adapter; at most one request in flight."""

    def __init__(self, endpoint: BridgeEndpoint):
        self.endpoint = endpoint
        self.dim: int | None = None
        self.max_length: int | None = None
        self._process: subprocess.Popen | None = None
        self._socket: socket.socket | None = None
        self._writer = None
        self._reader: _LineReader | None = None
        self._next_id = 0
        self._connected = False

    def __enter__(self):
        if not self._connected:
            self.connect()
        return self

    def __exit__(self, *exc):
        self.close()

    def connect(self) -> tuple[int, int]:
        """Open the transport and perform the handshake; returns (dim, max_length)."""
        if self.endpoint.launch_command is not None:
            try:
                self._process = subprocess.Popen(
                    list(self.endpoint.launch_command),
                    stdin=subprocess.PIPE,
                    stdout=subprocess.PIPE,
                    stderr=subprocess.PIPE,
                )
            except OSError as exc:
                raise BridgeError(
                    f"cannot launch adapter {self.endpoint.describe()!r}: {exc}"
                ) from exc
            self._writer = self._process.stdin
            self._reader = _LineReader(self._process.stdout)
            _drain_stderr(self._process.stderr, "adapter")
        else:
            try:
                self._socket = socket.create_connection(
                    (self.endpoint.host, self.endpoint.port),
                    timeout=self.endpoint.timeout_ms / 1000.0,
                )
            except OSError as exc:
                raise BridgeError(f"cannot connect to {self.endpoint.describe()}: {exc}") from exc
            self._writer = self._socket.makefile("wb")
            self._reader = _LineReader(self._socket.makefile("rb"))

        self._connected = True
        try:
            reply = self._roundtrip({"type": "hello", "version": PROTOCOL_VERSION})
        except BridgeError:
            self.close()
            raise
        if reply.get("type") == "error":
            self.close()
            raise BridgeError(f"adapter error during handshake: {reply.get('message')}")
        if reply.get("type") != "ready":
            self.close()
            raise BridgeProtocolError(f"expected ready reply, got type {reply.get('type')!r}")
        if reply.get("version") != PROTOCOL_VERSION:
            self.close()
            raise BridgeProtocolError(
                f"protocol version mismatch: host speaks {PROTOCOL_VERSION}, "
                f"adapter advertised {reply.get('version')!r}"
            )
        dim = reply.get("dim")
        max_length = reply.get("max_length")
        if not isinstance(dim, int) or dim < 1:
            self.close()
            raise BridgeProtocolError(f"adapter advertised invalid dim {dim!r}")
        if not isinstance(max_length, int) or max_length < 1:
            self.close()
            raise BridgeProtocolError(f"adapter advertised invalid max_length {max_length!r}")
        self.dim = dim
        self.max_length = max_length
        return dim, max_length

    def _send(self, obj: dict):
        try:
            self._writer.write(_encode_line(obj))
            self._writer.flush()
        except (OSError, ValueError) as exc:
            raise BridgeProtocolError(f"adapter connection lost while sending: {exc}") from None

    def _roundtrip(self, obj: dict) -> dict:
        self._send(obj)
        raw = self._reader.readline(self.endpoint.timeout_ms / 1000.0)
        return _decode_line(raw)

    def embed_batch(self, batch) -> np.ndarray:
        """Embed a batch; any reply irregularity raises and aborts the run."""
        if not self._connected or self.dim is None:
            raise BridgeError("embed_batch before handshake")
        rows = [np.asarray(row, dtype=np.float64) for row in batch]
        for row in rows:
            if row.ndim != 1:
                raise BridgeError(f"batch rows must be 1-D, got shape {row.shape}")
            if row.size > self.max_length:
                raise BridgeError(
                    f"series length {row.size} exceeds adapter max_length {self.max_length}"
                )
        self._next_id += 1
        request_id = self._next_id
        reply = self._roundtrip(
            {"type": "embed", "id": request_id, "batch": [row.tolist() for row in rows]}
        )
        if reply.get("type") == "error":
            raise BridgeError(f"adapter error: {reply.get('message')}")
        if reply.get("type") != "embedding":
            raise BridgeProtocolError(f"expected embedding reply, got {reply.get('type')!r}")
        if reply.get("id") != request_id:
            raise BridgeProtocolError(
                f"id mismatch: sent {request_id}, adapter answered {reply.get('id')!r}"
            )
        vectors = reply.get("vectors")
        if not isinstance(vectors, list) or len(vectors) != len(rows):
            got = len(vectors) if isinstance(vectors, list) else type(vectors).__name__
            raise BridgeProtocolError(
                f"expected {len(rows)} vectors, got {got}"
            )
        for i, vec in enumerate(vectors):
            if not isinstance(vec, list) or len(vec) != self.dim:
                got = len(vec) if isinstance(vec, list) else type(vec).__name__
                raise BridgeProtocolError(
                    f"vector {i} has length {got}, adapter advertised dim {self.dim}"
                )
        matrix = np.asarray(vectors, dtype=np.float64)
        if matrix.size and not np.all(np.isfinite(matrix)):
            raise BridgeError("adapter returned non-finite embedding values")
        self._spot_check_frozen(rows, matrix)
        return matrix.reshape(len(rows), self.dim)

    def _spot_check_frozen(self, rows, matrix):
        """Duplicated inputs in one batch must embed identically (warn only)."""
        seen: dict[bytes, int] = {}
        for i, row in enumerate(rows):
            key = row.tobytes()
            if key in seen:
                j = seen[key]
                if not np.array_equal(matrix[i], matrix[j]):
                    logger.warning(
                        "adapter %s violated the frozen contract: identical inputs "
                        "%d and %d produced different embeddings",
                        self.endpoint.describe(),
                        j,
                        i,
                    )
                return
            seen[key] = i

    def close(self):
        self._connected = False
        if self._writer is not None:
            try:
                self._writer.close()
            except (OSError, ValueError):
                pass
            self._writer = None
        if self._process is not None:
            try:
                self._process.wait(timeout=2.0)
            except subprocess.TimeoutExpired:
                self._process.kill()
                self._process.wait()
            self._process = None
        if self._socket is not None:
            try:
                self._socket.close()
            except OSError:
                pass
            self._socket = None
