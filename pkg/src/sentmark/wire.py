"""Newline-delimited JSON wire protocol for external embedders/generators.

One JSON object per line over a byte stream; requests carry a mandatory
integer ``id`` that the response must echo, and responses may arrive out of
order.  Ops:

* ``{"id": n, "op": "embed", "texts": [...]}``
  -> ``{"id": n, "dim": h, "embeddings": [[...], ...]}``
* ``{"id": n, "op": "continue", "context": [...], "try": t}``
  -> ``{"id": n, "sentence": "..."}``
* failure -> ``{"id": n, "error": "..."}``

Transports: a spawned process's standard I/O (persistent, concurrent
in-flight requests keyed by id) or an HTTP POST per request line.  Endpoint
descriptors are tuples: ``("process", arg0, arg1, ...)`` or ``("http", url)``.
"""

from __future__ import annotations

import itertools
import json
import subprocess
import sys
import threading
import urllib.error
import urllib.request

from .errors import ProtocolContractError, TransportError

DEFAULT_TIMEOUT = 60.0

_registry: dict[tuple, "_Client"] = {}
_registry_lock = threading.Lock()


def client_for(endpoint: tuple) -> "_Client":
    """Shared client for an endpoint; spawned lazily, reused across handles."""
    endpoint = tuple(endpoint)
    with _registry_lock:
        client = _registry.get(endpoint)
        if client is None or not client.alive():
            if endpoint and endpoint[0] == "process":
                client = ProcessClient(endpoint[1:])
            elif endpoint and endpoint[0] == "http":
                client = HttpClient(endpoint[1])
            else:
                raise ValueError(f"unknown endpoint descriptor: {endpoint!r}")
            _registry[endpoint] = client
        return client


def reset_clients() -> None:
    """Close all shared clients (tests spawn fresh subprocesses)."""
    with _registry_lock:
        for client in _registry.values():
            client.close()
        _registry.clear()


class _Client:
    """Shared request plumbing over an exchange primitive."""

    def __init__(self):
        self._ids = itertools.count(1)
        self.timeout = DEFAULT_TIMEOUT

    def alive(self) -> bool:
        return True

    def close(self) -> None:
        pass

    def _roundtrip(self, request: dict) -> dict:
        raise NotImplementedError

    def _call(self, op: str, **payload) -> dict:
        req_id = next(self._ids)
        response = self._roundtrip({"id": req_id, "op": op, **payload})
        if response.get("id") != req_id:
            raise ProtocolContractError(
                f"response id {response.get('id')!r} does not echo request id {req_id}"
            )
        if "error" in response:
            raise ProtocolContractError(f"endpoint error: {response['error']}")
        return response

    def embed(self, texts: list[str], expected_dim: int) -> list:
        response = self._call("embed", texts=list(texts))
        if "dim" not in response or "embeddings" not in response:
            raise ProtocolContractError("embed response missing 'dim' or 'embeddings'")
        if int(response["dim"]) != expected_dim:
            raise ProtocolContractError(
                f"endpoint dim {response['dim']} does not match handle dim {expected_dim}"
            )
        rows = response["embeddings"]
        if len(rows) != len(texts):
            raise ProtocolContractError(
                f"endpoint returned {len(rows)} embeddings for {len(texts)} texts"
            )
        return rows

    def continue_text(self, context: list[str], try_index: int) -> str:
        response = self._call("continue", context=list(context), **{"try": try_index})
        if "sentence" not in response:
            raise ProtocolContractError("continue response missing 'sentence'")
        return str(response["sentence"])


class ProcessClient(_Client):
    """Persistent subprocess speaking the protocol on stdin/stdout.

    A background reader thread files responses by id, so concurrent callers
    may have batches in flight simultaneously and out-of-order replies are
    matched to their waiters.
    """

    def __init__(self, argv):
        super().__init__()
        if not argv:
            raise ValueError("process endpoint needs a command")
        try:
            self._proc = subprocess.Popen(
                list(argv),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise TransportError(f"cannot spawn {argv!r}: {exc}") from exc
        self._cond = threading.Condition()
        self._responses: dict[int, dict] = {}
        self._dead: str | None = None
        self._write_lock = threading.Lock()
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()

    def alive(self) -> bool:
        return self._dead is None and self._proc.poll() is None

    def close(self) -> None:
        if self._proc.poll() is None:
            self._proc.terminate()
            try:
                self._proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self._proc.kill()

    def _read_loop(self) -> None:
        fail = None
        try:
            for line in self._proc.stdout:
                line = line.strip()
                if not line:
                    continue
                try:
                    obj = json.loads(line)
                except ValueError:
                    fail = f"unparseable line from endpoint: {line[:200]!r}"
                    break
                with self._cond:
                    self._responses[obj.get("id")] = obj
                    self._cond.notify_all()
        except Exception as exc:  # pipe errors surface to waiters
            fail = str(exc)
        with self._cond:
            self._dead = fail or "endpoint closed its output stream"
            self._cond.notify_all()

    def _roundtrip(self, request: dict) -> dict:
        line = json.dumps(request)
        try:
            with self._write_lock:
                self._proc.stdin.write(line + "\n")
                self._proc.stdin.flush()
        except (OSError, ValueError) as exc:
            raise TransportError(f"endpoint write failed: {exc}") from exc
        req_id = request["id"]
        with self._cond:
            ok = self._cond.wait_for(
                lambda: req_id in self._responses or self._dead is not None,
                timeout=self.timeout,
            )
            if req_id in self._responses:
                return self._responses.pop(req_id)
            if not ok:
                raise TransportError(f"endpoint timed out after {self.timeout}s")
            raise TransportError(self._dead)


class HttpClient(_Client):
    """One POST per request line; the response body holds the response line."""

    def __init__(self, url: str):
        super().__init__()
        self._url = url

    def _roundtrip(self, request: dict) -> dict:
        body = (json.dumps(request) + "\n").encode("utf-8")
        req = urllib.request.Request(
            self._url, data=body, headers={"Content-Type": "application/x-ndjson"}
        )
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                payload = resp.read().decode("utf-8")
        except (urllib.error.URLError, OSError) as exc:
            raise TransportError(f"HTTP endpoint failed: {exc}") from exc
        for line in payload.splitlines():
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except ValueError as exc:
                raise TransportError(f"unparseable HTTP response line: {line[:200]!r}") from exc
            if obj.get("id") == request["id"]:
                return obj
        raise ProtocolContractError("HTTP response did not echo the request id")


def serve_stdio(handler, stdin=None, stdout=None) -> None:
    """Answer protocol requests on standard I/O until EOF.

    ``handler(obj) -> dict`` produces the response payload (without "id");
    exceptions become ``{"id": ..., "error": ...}`` and the loop continues.
    Used by tests and by reference servers.
    """
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        req_id = None
        try:
            obj = json.loads(line)
            req_id = obj.get("id")
            payload = handler(obj)
            response = {"id": req_id, **payload}
        except Exception as exc:
            response = {"id": req_id, "error": str(exc)}
        stdout.write(json.dumps(response) + "\n")
        stdout.flush()
