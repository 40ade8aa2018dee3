"""Reference remote-oracle server for the NDJSON/base64-float32 protocol."""

from .model import LinearSoftmaxModel
from .server import ServerConfig, TcpOracleServer, serve, serve_stdio

__version__ = "0.1.0"

__all__ = ["LinearSoftmaxModel", "ServerConfig", "TcpOracleServer", "serve",
           "serve_stdio"]
