"""Protocol loop: newline-delimited JSON requests in, responses out.

Contract: every response echoes the request ``id``; vectors are
L2-normalized before emission so the consuming side's re-normalization is a
no-op check, not a correction.  Any per-request failure (malformed JSON,
bad payload, encoder error) becomes ``{"id": ..., "error": ...}`` and the
loop keeps serving.
"""

from __future__ import annotations

import json
import sys
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np


class RequestError(Exception):
    pass


def _embed_payload(encoder, obj: dict) -> dict:
    texts = obj.get("texts")
    if not isinstance(texts, list) or not texts:
        raise RequestError("'texts' must be a non-empty list")
    if not all(isinstance(t, str) for t in texts):
        raise RequestError("'texts' must contain only strings")
    raw = encoder.encode(texts)
    norms = np.linalg.norm(raw, axis=1)
    if np.any(norms == 0.0) or not np.all(np.isfinite(raw)):
        raise RequestError("encoder produced a zero or non-finite vector")
    unit = raw / norms[:, None]
    return {"dim": int(unit.shape[1]), "embeddings": [[float(v) for v in row] for row in unit]}


def handle_line(encoder, line: str) -> str:
    """One request line to one response line; never raises."""
    req_id = None
    try:
        obj = json.loads(line)
        if not isinstance(obj, dict):
            raise RequestError("request must be a JSON object")
        req_id = obj.get("id")
        if obj.get("op") != "embed":
            raise RequestError(f"unsupported op: {obj.get('op')!r}")
        response = {"id": req_id, **_embed_payload(encoder, obj)}
    except Exception as exc:
        response = {"id": req_id, "error": str(exc)}
    return json.dumps(response)


def serve_stdio(encoder, stdin=None, stdout=None) -> None:
    """Serve until EOF on stdin."""
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        stdout.write(handle_line(encoder, line) + "\n")
        stdout.flush()


def make_http_server(encoder, host: str = "127.0.0.1", port: int = 0) -> ThreadingHTTPServer:
    """HTTP transport: each POST body holds request lines, the response body
    the matching response lines."""

    class Handler(BaseHTTPRequestHandler):
        def do_POST(self):
            length = int(self.headers.get("Content-Length", 0))
            body = self.rfile.read(length).decode("utf-8")
            lines = [handle_line(encoder, l) for l in body.splitlines() if l.strip()]
            payload = ("\n".join(lines) + "\n").encode("utf-8")
            self.send_response(200)
            self.send_header("Content-Type", "application/x-ndjson")
            self.send_header("Content-Length", str(len(payload)))
            self.end_headers()
            self.wfile.write(payload)

        def log_message(self, *args):
            pass

    return ThreadingHTTPServer((host, port), Handler)
