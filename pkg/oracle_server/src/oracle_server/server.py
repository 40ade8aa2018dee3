"""NDJSON oracle server.

One JSON frame per line. On connect the server announces
``{"hello": 1, "n": <dims>, "classes": <count>}``; every request
``{"id": <u64>, "shape": [...], "dtype": "f32le", "data": "<base64 of
little-endian float32>"}`` gets ``{"id": <u64>, "label": <u32>}`` back, or
``{"id": <u64>, "error": "..."}`` with the echoed id (0 when the frame was
unparseable). Requests are answered strictly in order, one in flight per
connection; run several connections for parallelism.
"""

from __future__ import annotations

import base64
import json
import socketserver
import sys
from dataclasses import dataclass

import numpy as np

from .model import LinearSoftmaxModel


@dataclass
class ServerConfig:
    model: LinearSoftmaxModel
    host: str = "127.0.0.1"
    port: int = 0
    stdio: bool = False
    clip: bool = False


class FrameError(Exception):
    pass


def _dump(obj: dict) -> bytes:
    return (json.dumps(obj, separators=(",", ":")) + "\n").encode("utf-8")


def _decode_request(line) -> tuple[int, np.ndarray]:
    try:
        frame = json.loads(line)
    except json.JSONDecodeError as exc:
        raise FrameError(f"undecodable frame: {exc}") from None
    if not isinstance(frame, dict):
        raise FrameError("frame must be a JSON object")
    frame_id = frame.get("id")
    if not isinstance(frame_id, int) or frame_id < 0:
        frame_id = 0
    try:
        if frame.get("dtype") != "f32le":
            raise FrameError(f"unsupported dtype {frame.get('dtype')!r}")
        try:
            raw = base64.b64decode(str(frame.get("data", "")), validate=True)
        except Exception as exc:
            raise FrameError(f"bad base64 payload: {exc}") from None
        if len(raw) % 4 != 0:
            raise FrameError("payload is not a whole number of float32 values")
        values = np.frombuffer(raw, dtype="<f4").astype(np.float64)
        shape = frame.get("shape")
        if shape is not None:
            if (not isinstance(shape, list)
                    or not all(isinstance(d, int) and d > 0 for d in shape)):
                raise FrameError("shape must be a list of positive integers")
            if int(np.prod(shape)) != values.size:
                raise FrameError("shape mismatch with payload length")
        return frame_id, values
    except FrameError as exc:
        exc.frame_id = frame_id
        raise


def handle_line(config: ServerConfig, line) -> dict:
    """Answer one request line; every failure becomes an error frame."""
    try:
        frame_id, values = _decode_request(line)
    except FrameError as exc:
        return {"id": getattr(exc, "frame_id", 0), "error": str(exc)}
    if values.size != config.model.n:
        return {"id": frame_id,
                "error": f"shape mismatch: model expects {config.model.n} "
                         f"values, got {values.size}"}
    if config.clip:
        values = np.clip(values, 0.0, 1.0)
    try:
        return {"id": frame_id, "label": int(config.model.classify(values))}
    except Exception as exc:
        return {"id": frame_id, "error": f"model failure: {exc}"}


def _hello(config: ServerConfig) -> dict:
    return {"hello": 1, "n": int(config.model.n),
            "classes": int(config.model.classes)}


def serve_stdio(config: ServerConfig, stdin=None, stdout=None) -> None:
    reader = stdin if stdin is not None else sys.stdin.buffer
    writer = stdout if stdout is not None else sys.stdout.buffer
    writer.write(_dump(_hello(config)))
    writer.flush()
    for line in reader:
        if not line.strip():
            continue
        writer.write(_dump(handle_line(config, line)))
        writer.flush()


class _Handler(socketserver.StreamRequestHandler):
    def handle(self):
        config = self.server.config
        self.wfile.write(_dump(_hello(config)))
        for line in self.rfile:
            if not line.strip():
                continue
            self.wfile.write(_dump(handle_line(config, line)))


class TcpOracleServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, config: ServerConfig):
        super().__init__((config.host, config.port), _Handler)
        self.config = config

    @property
    def port(self) -> int:
        return self.server_address[1]


def serve(config: ServerConfig) -> None:
    """Run until interrupted (stdio mode returns at EOF)."""
    if config.stdio:
        serve_stdio(config)
        return
    with TcpOracleServer(config) as server:
        server.serve_forever()
