"""Reference external embedding server for the newline-delimited JSON
embedding protocol: stdio and HTTP transports, pluggable encoders."""

from .encoders import BridgeConfig, HashEncoder, load_encoder
from .server import handle_line, make_http_server, serve_stdio

__version__ = "0.1.0"

__all__ = [
    "BridgeConfig",
    "HashEncoder",
    "handle_line",
    "load_encoder",
    "make_http_server",
    "serve_stdio",
]
