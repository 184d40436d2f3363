import json
import socket
import sys
import threading

import numpy as np
import pytest

from spectrashift import BridgeClient, BridgeEndpoint
from spectrashift.errors import (
    BridgeError,
    BridgeProtocolError,
    BridgeTimeoutError,
)

# Minimal stdio adapters used as test fixtures. Each is executed with
# `python -c SCRIPT`; the echo adapter answers every embed with the first
# `dim` values of each input row.
ECHO_ADAPTER = """
import json, sys
dim = int(sys.argv[1])
for line in sys.stdin:
    msg = json.loads(line)
    if msg["type"] == "hello":
        out = {"type": "ready", "version": 1, "dim": dim, "max_length": 1048576}
    elif msg["type"] == "embed":
        vecs = [(row + [0.0] * dim)[:dim] for row in msg["batch"]]
        out = {"type": "embedding", "id": msg["id"], "vectors": vecs}
    else:
        break
    sys.stdout.write(json.dumps(out, separators=(",", ":")) + "\\n")
    sys.stdout.flush()
"""


def adapter_command(body: str, *args: str):
    return (sys.executable, "-c", body, *args)


def echo_endpoint(dim=4, timeout_ms=10000):
    return BridgeEndpoint.stdio(adapter_command(ECHO_ADAPTER, str(dim)), timeout_ms=timeout_ms)


FAULT_TEMPLATE = """
import json, sys
mode = sys.argv[1]
def send(obj):
    sys.stdout.write(json.dumps(obj, separators=(",", ":")) + "\\n")
    sys.stdout.flush()
for line in sys.stdin:
    msg = json.loads(line)
    if msg["type"] == "hello":
        if mode == "bad-version":
            send({"type": "ready", "version": 2, "dim": 4, "max_length": 64})
        else:
            send({"type": "ready", "version": 1, "dim": 4, "max_length": 64})
    elif msg["type"] == "embed":
        n = len(msg["batch"])
        if mode == "malformed":
            sys.stdout.write("{nope\\n"); sys.stdout.flush()
        elif mode == "id-mismatch":
            send({"type": "embedding", "id": msg["id"] + 1, "vectors": [[0.0] * 4] * n})
        elif mode == "short-vector":
            send({"type": "embedding", "id": msg["id"], "vectors": [[0.0] * 3] * n})
        elif mode == "non-finite":
            send({"type": "embedding", "id": msg["id"], "vectors": [[float("nan")] * 4] * n})
        elif mode == "silent":
            import time; time.sleep(30)
"""


def fault_endpoint(mode, timeout_ms=10000):
    return BridgeEndpoint.stdio(adapter_command(FAULT_TEMPLATE, mode), timeout_ms=timeout_ms)


class TestEndpointConfig:
    def test_exactly_one_transport(self):
        with pytest.raises(BridgeError):
            BridgeEndpoint()
        with pytest.raises(BridgeError):
            BridgeEndpoint(launch_command=("x",), host="h", port=1)
        with pytest.raises(BridgeError):
            BridgeEndpoint(host="h")  # port missing

    def test_stdio_from_string(self):
        endpoint = BridgeEndpoint.stdio("adapter echo --dim 4")
        assert endpoint.launch_command == ("adapter", "echo", "--dim", "4")


class TestHandshake:
    def test_reports_advertised_dim(self):
        with BridgeClient(echo_endpoint(dim=512)) as client:
            assert client.dim == 512
            assert client.max_length == 1048576

    def test_version_mismatch(self):
        client = BridgeClient(fault_endpoint("bad-version"))
        with pytest.raises(BridgeProtocolError, match="version"):
            client.connect()

    def test_unlaunchable_command(self):
        client = BridgeClient(BridgeEndpoint.stdio(("definitely-not-a-binary-xyz",)))
        with pytest.raises(BridgeError):
            client.connect()


class TestEmbedBatch:
    def test_round_trip_is_bit_exact(self):
        rng = np.random.default_rng(0)
        batch = rng.normal(size=(5, 16))
        with BridgeClient(echo_endpoint(dim=16)) as client:
            vectors = client.embed_batch(batch)
        assert np.array_equal(vectors, batch)

    def test_truncation_takes_first_dim_values(self):
        batch = np.arange(12.0).reshape(2, 6)
        with BridgeClient(echo_endpoint(dim=4)) as client:
            vectors = client.embed_batch(batch)
        assert np.array_equal(vectors, batch[:, :4])

    def test_empty_batch(self):
        with BridgeClient(echo_endpoint(dim=4)) as client:
            vectors = client.embed_batch([])
        assert vectors.shape == (0, 4)

    def test_ids_strictly_increase(self):
        with BridgeClient(echo_endpoint(dim=4)) as client:
            client.embed_batch(np.zeros((1, 4)))
            client.embed_batch(np.zeros((1, 4)))
            assert client._next_id == 2

    def test_series_longer_than_max_length_rejected(self):
        # the fault adapter advertises max_length 64 in every mode
        with BridgeClient(fault_endpoint("unused-mode")) as client:
            with pytest.raises(BridgeError, match="max_length"):
                client.embed_batch(np.zeros((1, 65)))

    def test_malformed_reply_names_byte_offset(self):
        with BridgeClient(fault_endpoint("malformed")) as client:
            with pytest.raises(BridgeProtocolError, match="byte offset"):
                client.embed_batch(np.zeros((1, 4)))

    def test_id_mismatch(self):
        with BridgeClient(fault_endpoint("id-mismatch")) as client:
            with pytest.raises(BridgeProtocolError, match="id mismatch"):
                client.embed_batch(np.zeros((1, 4)))

    def test_wrong_vector_length(self):
        with BridgeClient(fault_endpoint("short-vector")) as client:
            with pytest.raises(BridgeProtocolError, match="length"):
                client.embed_batch(np.zeros((1, 4)))

    def test_non_finite_values(self):
        with BridgeClient(fault_endpoint("non-finite")) as client:
            with pytest.raises(BridgeError, match="non-finite"):
                client.embed_batch(np.zeros((1, 4)))

    def test_timeout(self):
        with BridgeClient(fault_endpoint("silent", timeout_ms=300)) as client:
            with pytest.raises(BridgeTimeoutError):
                client.embed_batch(np.zeros((1, 4)))

    def test_adapter_exit_mid_run(self):
        crashy = """
import json, sys
line = sys.stdin.readline()
sys.stdout.write(json.dumps({"type":"ready","version":1,"dim":4,"max_length":64}) + "\\n")
sys.stdout.flush()
sys.exit(1)
"""
        endpoint = BridgeEndpoint.stdio(adapter_command(crashy))
        with BridgeClient(endpoint) as client:
            with pytest.raises(BridgeProtocolError, match="closed"):
                client.embed_batch(np.zeros((1, 4)))

    def test_duplicate_inputs_warn_on_frozen_violation(self, caplog):
        unfrozen = """
import json, sys
count = 0
for line in sys.stdin:
    msg = json.loads(line)
    if msg["type"] == "hello":
        out = {"type": "ready", "version": 1, "dim": 2, "max_length": 64}
    else:
        vecs = []
        for row in msg["batch"]:
            count += 1
            vecs.append([float(count), 0.0])
        out = {"type": "embedding", "id": msg["id"], "vectors": vecs}
    sys.stdout.write(json.dumps(out, separators=(",", ":")) + "\\n")
    sys.stdout.flush()
"""
        endpoint = BridgeEndpoint.stdio(adapter_command(unfrozen))
        with caplog.at_level("WARNING"):
            with BridgeClient(endpoint) as client:
                client.embed_batch(np.zeros((2, 4)))  # identical rows
        assert any("frozen" in rec.message for rec in caplog.records)

    def test_duplicate_inputs_no_warning_when_frozen(self, caplog):
        with caplog.at_level("WARNING"):
            with BridgeClient(echo_endpoint(dim=4)) as client:
                client.embed_batch(np.zeros((2, 4)))
        assert not any("frozen" in rec.message for rec in caplog.records)


def _tcp_echo_server(dim, ready_event, port_holder):
    server = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    server.bind(("127.0.0.1", 0))
    server.listen(1)
    port_holder.append(server.getsockname()[1])
    ready_event.set()
    conn, _ = server.accept()
    reader = conn.makefile("rb")
    writer = conn.makefile("wb")
    for raw in iter(reader.readline, b""):
        msg = json.loads(raw)
        if msg["type"] == "hello":
            out = {"type": "ready", "version": 1, "dim": dim, "max_length": 4096}
        elif msg["type"] == "embed":
            vecs = [(row + [0.0] * dim)[:dim] for row in msg["batch"]]
            out = {"type": "embedding", "id": msg["id"], "vectors": vecs}
        else:
            break
        writer.write(json.dumps(out, separators=(",", ":")).encode() + b"\n")
        writer.flush()
    conn.close()
    server.close()


def test_tcp_transport_round_trip():
    ready = threading.Event()
    ports = []
    thread = threading.Thread(target=_tcp_echo_server, args=(8, ready, ports), daemon=True)
    thread.start()
    assert ready.wait(5)
    endpoint = BridgeEndpoint.tcp("127.0.0.1", ports[0], timeout_ms=5000)
    batch = np.arange(16.0).reshape(2, 8)
    with BridgeClient(endpoint) as client:
        assert client.dim == 8
        vectors = client.embed_batch(batch)
    assert np.array_equal(vectors, batch)
    thread.join(timeout=5)
