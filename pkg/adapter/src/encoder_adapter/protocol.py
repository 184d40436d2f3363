"""Wire protocol (version 1): NDJSON over stdio.

One UTF-8 JSON object per line, newline terminated, no trailing
whitespace. The host opens with {"type":"hello","version":1}; the adapter
answers {"type":"ready","version":1,"dim":D,"max_length":L}. Each
{"type":"embed","id":k,"batch":[[...],...]} request gets exactly one
{"type":"embedding","id":k,"vectors":[[...],...]} reply preserving batch
order, with every vector of length D. Fatal conditions are reported as
{"type":"error","message":...} followed by a nonzero exit.
"""

from __future__ import annotations

import json

PROTOCOL_VERSION = 1


class ProtocolFault(Exception):
    """Request stream violated the protocol; the adapter must stop."""


def encode_line(obj: dict) -> bytes:
    return json.dumps(obj, separators=(",", ":")).encode("utf-8") + b"\n"


def ready_message(dim: int, max_length: int) -> dict:
    return {
        "type": "ready",
        "version": PROTOCOL_VERSION,
        "dim": dim,
        "max_length": max_length,
    }


def embedding_message(request_id: int, vectors: list[list[float]]) -> dict:
    return {"type": "embedding", "id": request_id, "vectors": vectors}


def error_message(message: str) -> dict:
    return {"type": "error", "message": message}


def parse_request(raw: bytes) -> dict:
    try:
        obj = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ProtocolFault(f"unparseable request line: {exc}") from None
    if not isinstance(obj, dict) or "type" not in obj:
        raise ProtocolFault("request must be a JSON object with a 'type' field")
    return obj


def validate_hello(msg: dict) -> None:
    if msg.get("version") != PROTOCOL_VERSION:
        raise ProtocolFault(
            f"unsupported protocol version {msg.get('version')!r}; "
            f"this adapter speaks {PROTOCOL_VERSION}"
        )


def validate_embed(msg: dict, max_length: int) -> tuple[int, list[list[float]]]:
    request_id = msg.get("id")
    if not isinstance(request_id, int):
        raise ProtocolFault(f"embed request id must be an integer, got {request_id!r}")
    batch = msg.get("batch")
    if not isinstance(batch, list):
        raise ProtocolFault("embed request needs a 'batch' list")
    rows: list[list[float]] = []
    for i, row in enumerate(batch):
        if not isinstance(row, list):
            raise ProtocolFault(f"batch row {i} is not a list")
        if len(row) > max_length:
            raise ProtocolFault(
                f"batch row {i} has length {len(row)} > max_length {max_length}"
            )
        try:
            rows.append([float(v) for v in row])
        except (TypeError, ValueError):
            raise ProtocolFault(f"batch row {i} contains a non-numeric value") from None
    return request_id, rows
