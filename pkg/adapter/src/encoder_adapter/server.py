"""Single-threaded request loop: one reply per request, in order."""

from __future__ import annotations

import sys

from .protocol import (
    ProtocolFault,
    embedding_message,
    encode_line,
    error_message,
    parse_request,
    ready_message,
    validate_embed,
    validate_hello,
)


def serve(backbone, batch_limit: int = 256, stdin=None, stdout=None) -> int:
    """Speak the protocol on stdio until EOF; returns the exit code.

    Oversized batches are processed in ``batch_limit`` chunks internally but
    still answered with a single reply. Any protocol fault is reported as an
    error message followed by a nonzero exit, so the host never hangs.
    """
    stdin = stdin if stdin is not None else sys.stdin.buffer
    stdout = stdout if stdout is not None else sys.stdout.buffer

    def send(obj: dict):
        stdout.write(encode_line(obj))
        stdout.flush()

    try:
        for raw in iter(stdin.readline, b""):
            if not raw.strip():
                continue
            msg = parse_request(raw)
            kind = msg["type"]
            if kind == "hello":
                validate_hello(msg)
                send(ready_message(backbone.dim, backbone.max_length))
            elif kind == "embed":
                request_id, rows = validate_embed(msg, backbone.max_length)
                vectors: list[list[float]] = []
                for start in range(0, len(rows), batch_limit):
                    vectors.extend(backbone.embed(rows[start : start + batch_limit]))
                send(embedding_message(request_id, vectors))
            else:
                raise ProtocolFault(f"unknown request type {kind!r}")
    except ProtocolFault as exc:
        send(error_message(str(exc)))
        return 1
    except BrokenPipeError:
        return 1
    return 0
