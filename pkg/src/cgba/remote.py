"""Remote-oracle wire protocol: NDJSON frames carrying base64 float32 points.

One JSON object per line. The server opens with a handshake frame
``{"hello": 1, "n": <dims>, "classes": <count>}``; each request
``{"id": <u64>, "shape": [...], "dtype": "f32le",
"data": "<base64 little-endian float32>"}`` is answered by
``{"id": <u64>, "label": <u32>}`` or ``{"id": <u64>, "error": "..."}``.
This module provides the client plus a minimal server around any
``DecisionOracle`` so built-in oracles can be hosted for round-trip tests.
"""

from __future__ import annotations

import base64
import json
import socket
import socketserver
import subprocess
import sys
import threading

import numpy as np

from .errors import ProtocolError
from .oracles import DecisionOracle

DTYPE = "f32le"


def encode_point(x: np.ndarray) -> str:
    return base64.b64encode(
        np.asarray(x).astype("<f4").tobytes()).decode("ascii")


def decode_point(data: str) -> np.ndarray:
    try:
        raw = base64.b64decode(data.encode("ascii"), validate=True)
    except Exception as exc:
        raise ProtocolError(f"bad base64 payload: {exc}") from exc
    if len(raw) % 4 != 0:
        raise ProtocolError("payload length is not a multiple of 4 bytes")
    return np.frombuffer(raw, dtype="<f4").astype(np.float64)


def request_frame(frame_id: int, x: np.ndarray) -> dict:
    arr = np.asarray(x)
    return {"id": int(frame_id), "shape": list(arr.shape), "dtype": DTYPE,
            "data": encode_point(arr)}


def dump_frame(obj: dict) -> bytes:
    return (json.dumps(obj, separators=(",", ":")) + "\n").encode("utf-8")


class RemoteOracle(DecisionOracle):
    """Client side of the wire protocol, usable over TCP or a subprocess."""

    def __init__(self, reader, writer, closer=None):
        self._reader = reader
        self._writer = writer
        self._closer = closer
        self._next_id = 1
        self._lock = threading.Lock()
        hello = self._read_frame()
        if hello.get("hello") != 1 or "n" not in hello or "classes" not in hello:
            raise ProtocolError(f"bad handshake frame: {hello!r}")
        self.n = int(hello["n"])
        self.num_classes = int(hello["classes"])

    @classmethod
    def connect_tcp(cls, host: str, port: int, timeout: float = 10.0) -> "RemoteOracle":
        sock = socket.create_connection((host, port), timeout=timeout)
        reader = sock.makefile("rb")
        writer = sock.makefile("wb")
        return cls(reader, writer, closer=sock.close)

    @classmethod
    def spawn(cls, argv: list[str]) -> "RemoteOracle":
        """Start a stdio-mode server subprocess and connect to its pipes."""
        proc = subprocess.Popen(argv, stdin=subprocess.PIPE,
                                stdout=subprocess.PIPE)

        def closer():
            proc.stdin.close()
            proc.wait(timeout=10)

        oracle = cls(proc.stdout, proc.stdin, closer=closer)
        oracle.process = proc
        return oracle

    def _read_frame(self) -> dict:
        line = self._reader.readline()
        if not line:
            raise ProtocolError("connection closed by server")
        try:
            return json.loads(line)
        except json.JSONDecodeError as exc:
            raise ProtocolError(f"undecodable frame: {exc}") from exc

    def classify(self, x: np.ndarray) -> int:
        with self._lock:
            frame_id = self._next_id
            self._next_id += 1
            self._writer.write(dump_frame(request_frame(frame_id, x)))
            self._writer.flush()
            reply = self._read_frame()
        if reply.get("id") != frame_id:
            raise ProtocolError(
                f"response id {reply.get('id')} does not match request {frame_id}")
        if "error" in reply:
            raise ProtocolError(f"server error: {reply['error']}")
        if "label" not in reply:
            raise ProtocolError(f"response carries no label: {reply!r}")
        return int(reply["label"])

    def close(self) -> None:
        if self._closer is not None:
            self._closer()
            self._closer = None


def _hello_frame(oracle: DecisionOracle) -> dict:
    return {"hello": 1, "n": int(oracle.n), "classes": int(oracle.num_classes)}


def answer_frame(oracle: DecisionOracle, line: bytes | str) -> dict:
    """Answer one request line against ``oracle``; errors become frames."""
    frame_id = 0
    try:
        frame = json.loads(line)
        if isinstance(frame.get("id"), int):
            frame_id = frame["id"]
        if frame.get("dtype") != DTYPE:
            raise ProtocolError(f"unsupported dtype {frame.get('dtype')!r}")
        point = decode_point(frame.get("data", ""))
        shape = frame.get("shape")
        if shape is not None and int(np.prod(shape)) != point.size:
            raise ProtocolError("shape mismatch with payload length")
        if point.size != oracle.n:
            raise ProtocolError(
                f"shape mismatch: oracle expects {oracle.n} values, got {point.size}")
        return {"id": frame_id, "label": int(oracle.classify(point))}
    except ProtocolError as exc:
        return {"id": frame_id, "error": str(exc)}
    except Exception as exc:
        return {"id": frame_id, "error": f"malformed frame: {exc}"}


def serve_stdio(oracle: DecisionOracle, stdin=None, stdout=None) -> None:
    """Serve one lock-step session over stdio; returns at EOF."""
    reader = stdin if stdin is not None else sys.stdin.buffer
    writer = stdout if stdout is not None else sys.stdout.buffer
    writer.write(dump_frame(_hello_frame(oracle)))
    writer.flush()
    for line in reader:
        if not line.strip():
            continue
        writer.write(dump_frame(answer_frame(oracle, line)))
        writer.flush()


class _Handler(socketserver.StreamRequestHandler):
    def handle(self):
        oracle = self.server.oracle
        self.wfile.write(dump_frame(_hello_frame(oracle)))
        for line in self.rfile:
            if not line.strip():
                continue
            self.wfile.write(dump_frame(answer_frame(oracle, line)))


class OracleServer(socketserver.ThreadingTCPServer):
    """TCP server hosting one oracle; one in-flight request per connection."""

    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, oracle: DecisionOracle, host: str = "127.0.0.1",
                 port: int = 0):
        super().__init__((host, port), _Handler)
        self.oracle = oracle

    @property
    def port(self) -> int:
        return self.server_address[1]


def serve_tcp(oracle: DecisionOracle, host: str, port: int) -> None:
    with OracleServer(oracle, host, port) as server:
        server.serve_forever()
