import io
import json
import subprocess
import sys
import threading
import urllib.request
from pathlib import Path

import numpy as np
import pytest

from embed_bridge import BridgeConfig, HashEncoder, handle_line, load_encoder, make_http_server
from embed_bridge.server import serve_stdio

FIXTURES = Path(__file__).with_name("fixtures")
GOLDEN_MODEL = "hash:16:7"


@pytest.fixture(scope="module")
def encoder():
    return load_encoder(BridgeConfig(GOLDEN_MODEL))


class TestGoldenFixtures:
    def test_responses_byte_identical(self, encoder):
        requests = (FIXTURES / "golden_requests.ndjson").read_text().splitlines()
        expected = (FIXTURES / "golden_responses.ndjson").read_text().splitlines()
        got = [handle_line(encoder, line) for line in requests]
        assert got == expected

    def test_responses_parse_bit_exactly(self, encoder):
        requests = (FIXTURES / "golden_requests.ndjson").read_text().splitlines()
        expected = (FIXTURES / "golden_responses.ndjson").read_text().splitlines()
        for req_line, exp_line in zip(requests, expected):
            got = json.loads(handle_line(encoder, req_line))
            exp = json.loads(exp_line)
            assert got["id"] == exp["id"]
            assert got["dim"] == exp["dim"]
            for g_vec, e_vec in zip(got["embeddings"], exp["embeddings"]):
                assert all(g == e for g, e in zip(g_vec, e_vec))


class TestHandler:
    def test_vectors_unit_norm(self, encoder):
        resp = json.loads(
            handle_line(encoder, '{"id": 4, "op": "embed", "texts": ["alpha beta", "gamma"]}')
        )
        for vec in resp["embeddings"]:
            assert abs(np.linalg.norm(vec) - 1.0) < 1e-5

    def test_same_text_twice_identical(self, encoder):
        resp = json.loads(
            handle_line(encoder, '{"id": 5, "op": "embed", "texts": ["repeat me", "repeat me"]}')
        )
        assert resp["embeddings"][0] == resp["embeddings"][1]

    def test_id_echo(self, encoder):
        resp = json.loads(handle_line(encoder, '{"id": 914, "op": "embed", "texts": ["x"]}'))
        assert resp["id"] == 914

    def test_empty_texts_is_error(self, encoder):
        resp = json.loads(handle_line(encoder, '{"id": 6, "op": "embed", "texts": []}'))
        assert resp["id"] == 6
        assert "error" in resp

    def test_malformed_json_is_error_with_null_id(self, encoder):
        resp = json.loads(handle_line(encoder, "{nope"))
        assert resp["id"] is None
        assert "error" in resp

    def test_unknown_op_is_error(self, encoder):
        resp = json.loads(handle_line(encoder, '{"id": 8, "op": "paraphrase", "texts": ["x"]}'))
        assert resp["id"] == 8
        assert "error" in resp

    def test_encoder_failure_is_error_and_loop_survives(self, encoder):
        stdin = io.StringIO(
            '{"id": 1, "op": "embed", "texts": ["!!!"]}\n'  # no tokens: model failure
            '{"id": 2, "op": "embed", "texts": ["still alive"]}\n'
        )
        stdout = io.StringIO()
        serve_stdio(encoder, stdin=stdin, stdout=stdout)
        lines = [json.loads(l) for l in stdout.getvalue().splitlines()]
        assert "error" in lines[0] and lines[0]["id"] == 1
        assert "embeddings" in lines[1] and lines[1]["id"] == 2


class TestStdioSubprocess:
    def _spawn(self):
        return subprocess.Popen(
            [sys.executable, "-m", "embed_bridge", "--model", GOLDEN_MODEL, "--stdio"],
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            bufsize=1,
        )

    def test_interleaved_ids_both_answered(self):
        proc = self._spawn()
        try:
            reqs = [
                {"id": 11, "op": "embed", "texts": ["first request"]},
                {"id": 22, "op": "embed", "texts": ["second request"]},
            ]
            for r in reqs:
                proc.stdin.write(json.dumps(r) + "\n")
            proc.stdin.flush()
            responses = [json.loads(proc.stdout.readline()) for _ in range(2)]
            by_id = {r["id"]: r for r in responses}
            assert set(by_id) == {11, 22}
            assert all("embeddings" in r for r in by_id.values())
        finally:
            proc.terminate()
            proc.wait(timeout=5)

    def test_process_stays_alive_after_bad_request(self):
        proc = self._spawn()
        try:
            proc.stdin.write("garbage line\n")
            proc.stdin.write('{"id": 33, "op": "embed", "texts": ["ok"]}\n')
            proc.stdin.flush()
            first = json.loads(proc.stdout.readline())
            second = json.loads(proc.stdout.readline())
            assert "error" in first
            assert second["id"] == 33 and "embeddings" in second
            assert proc.poll() is None
        finally:
            proc.terminate()
            proc.wait(timeout=5)


class TestHttpTransport:
    def test_post_round_trip(self, encoder):
        server = make_http_server(encoder)
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        try:
            url = f"http://127.0.0.1:{server.server_address[1]}/"
            body = '{"id": 44, "op": "embed", "texts": ["over http"]}\n'.encode()
            req = urllib.request.Request(
                url, data=body, headers={"Content-Type": "application/x-ndjson"}
            )
            with urllib.request.urlopen(req, timeout=10) as resp:
                obj = json.loads(resp.read().decode())
            assert obj["id"] == 44
            assert abs(np.linalg.norm(obj["embeddings"][0]) - 1.0) < 1e-5
        finally:
            server.shutdown()


class TestEncoders:
    def test_hash_encoder_deterministic(self):
        enc = HashEncoder(32, seed=5)
        a = enc.encode(["the same words"])
        b = enc.encode(["the same words"])
        assert np.array_equal(a, b)

    def test_hash_encoder_seed_sensitivity(self):
        a = HashEncoder(32, seed=5).encode(["words"])
        b = HashEncoder(32, seed=6).encode(["words"])
        assert not np.array_equal(a, b)

    def test_model_spec_parsing(self):
        enc = load_encoder(BridgeConfig("hash:48:9"))
        assert isinstance(enc, HashEncoder)
        assert enc.dim == 48 and enc.seed == 9

    def test_config_validation(self):
        with pytest.raises(ValueError):
            BridgeConfig("hash:16", batch_size=0)
