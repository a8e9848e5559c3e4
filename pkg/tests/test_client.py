import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from nalbench.client import (
    CredentialError,
    EndpointConfig,
    PromptItem,
    ResponseCache,
    TransportError,
    batch_ask,
    complete,
    prompt_digest,
    read_response_file,
)

MESSAGES = ({"role": "user", "content": "hello"},)


class _StubHandler(BaseHTTPRequestHandler):
    """Scriptable chat-completions endpoint."""

    script = []       # list of (status, body-dict or text)
    requests_seen = []

    def do_POST(self):
        length = int(self.headers.get("Content-Length", 0))
        payload = json.loads(self.rfile.read(length)) if length else {}
        type(self).requests_seen.append(
            {"path": self.path, "payload": payload, "auth": self.headers.get("Authorization")}
        )
        status, body = (
            type(self).script.pop(0) if type(self).script else (200, _ok_body("default"))
        )
        data = json.dumps(body).encode() if isinstance(body, dict) else str(body).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, *args):
        pass


def _ok_body(text):
    return {"choices": [{"message": {"role": "assistant", "content": text}}]}


@pytest.fixture()
def stub_server():
    server = ThreadingHTTPServer(("127.0.0.1", 0), _StubHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    _StubHandler.script = []
    _StubHandler.requests_seen = []
    yield f"http://127.0.0.1:{server.server_address[1]}/v1", _StubHandler
    server.shutdown()


def _cfg(base_url, **kw):
    kw.setdefault("max_retries", 2)
    kw.setdefault("timeout", 5.0)
    return EndpointConfig(base_url=base_url, model="stub-model", api_key_env="NALBENCH_TEST_KEY", **kw)


class TestComplete:
    def test_reads_first_choice(self, stub_server):
        url, handler = stub_server
        handler.script = [(200, _ok_body("the answer"))]
        result = complete(MESSAGES, _cfg(url))
        assert result.text == "the answer"
        assert result.retries == 0
        assert handler.requests_seen[0]["path"] == "/v1/chat/completions"
        assert handler.requests_seen[0]["payload"]["model"] == "stub-model"

    def test_transient_failure_then_success(self, stub_server):
        url, handler = stub_server
        handler.script = [(503, "overloaded"), (200, _ok_body("recovered"))]
        result = complete(MESSAGES, _cfg(url), _sleep=lambda s: None)
        assert result.text == "recovered"
        assert result.retries == 1

    def test_exhausted_retries(self, stub_server):
        url, handler = stub_server
        handler.script = [(500, "boom")] * 5
        with pytest.raises(TransportError):
            complete(MESSAGES, _cfg(url, max_retries=2), _sleep=lambda s: None)
        assert len(handler.requests_seen) == 3

    def test_credential_failure_no_retry(self, stub_server):
        url, handler = stub_server
        handler.script = [(401, "who are you")]
        with pytest.raises(CredentialError):
            complete(MESSAGES, _cfg(url), _sleep=lambda s: None)
        assert len(handler.requests_seen) == 1

    def test_credential_env_used_but_never_in_manifest(self, stub_server, monkeypatch):
        url, handler = stub_server
        monkeypatch.setenv("NALBENCH_TEST_KEY", "sk-secret-value")
        handler.script = [(200, _ok_body("ok"))]
        cfg = _cfg(url)
        complete(MESSAGES, cfg)
        assert handler.requests_seen[0]["auth"] == "Bearer sk-secret-value"
        assert "sk-secret-value" not in json.dumps(cfg.public_dict())

    def test_cache_prevents_second_call(self, stub_server, tmp_path):
        url, handler = stub_server
        handler.script = [(200, _ok_body("cache me"))]
        cache = ResponseCache(tmp_path / "cache")
        cfg = _cfg(url)
        first = complete(MESSAGES, cfg, cache=cache)
        second = complete(MESSAGES, cfg, cache=cache)
        assert first.text == second.text == "cache me"
        assert second.cached and not first.cached
        assert len(handler.requests_seen) == 1

    def test_digest_is_order_stable(self):
        a = ({"role": "user", "content": "x"},)
        b = ({"content": "x", "role": "user"},)
        assert prompt_digest(a) == prompt_digest(b)


class TestBatchAsk:
    def test_batch_writes_manifest_and_rows(self, stub_server, tmp_path):
        url, handler = stub_server
        prompts = [PromptItem(f"i-{n}", MESSAGES + ({"role": "user", "content": str(n)},)) for n in range(5)]
        out = batch_ask(prompts, _cfg(url, parallelism=2), tmp_path / "resp.jsonl", dataset_digest="abc123")
        manifest, rows = read_response_file(out)
        assert manifest["dataset_sha256"] == "abc123"
        assert manifest["endpoint"]["model"] == "stub-model"
        assert len(rows) == 5
        assert all(r["error"] is None for r in rows.values())

    def test_failed_records_do_not_abort(self, stub_server, tmp_path):
        url, handler = stub_server
        handler.script = [(500, "x")] * 3 + [(200, _ok_body("fine"))]
        prompts = [
            PromptItem("bad", MESSAGES),
            PromptItem("good", MESSAGES + ({"role": "user", "content": "2"},)),
        ]
        out = batch_ask(
            prompts, _cfg(url, max_retries=2, parallelism=1), tmp_path / "resp.jsonl", _sleep=lambda s: None
        )
        _, rows = read_response_file(out)
        assert rows["bad"]["error"] is not None and rows["bad"]["text"] is None
        assert rows["good"]["error"] is None and rows["good"]["text"] == "fine"

    def test_in_flight_requests_bounded_by_parallelism(self, stub_server, tmp_path):
        url, handler = stub_server
        lock = threading.Lock()
        state = {"now": 0, "peak": 0}

        class _SlowHandler(_StubHandler):
            def do_POST(self):
                with lock:
                    state["now"] += 1
                    state["peak"] = max(state["peak"], state["now"])
                try:
                    import time

                    time.sleep(0.05)
                    super().do_POST()
                finally:
                    with lock:
                        state["now"] -= 1

        slow = ThreadingHTTPServer(("127.0.0.1", 0), _SlowHandler)
        threading.Thread(target=slow.serve_forever, daemon=True).start()
        try:
            cfg = _cfg(f"http://127.0.0.1:{slow.server_address[1]}/v1", parallelism=2)
            prompts = [
                PromptItem(f"i-{n}", MESSAGES + ({"role": "user", "content": str(n)},)) for n in range(8)
            ]
            batch_ask(prompts, cfg, tmp_path / "resp.jsonl")
            assert state["peak"] <= 2
        finally:
            slow.shutdown()

    def test_resume_uses_cache(self, stub_server, tmp_path):
        url, handler = stub_server
        cache = ResponseCache(tmp_path / "cache")
        prompts = [PromptItem(f"i-{n}", MESSAGES + ({"role": "user", "content": str(n)},)) for n in range(4)]
        cfg = _cfg(url, parallelism=2)
        batch_ask(prompts, cfg, tmp_path / "a.jsonl", cache=cache)
        first_calls = len(handler.requests_seen)
        batch_ask(prompts, cfg, tmp_path / "b.jsonl", cache=cache)
        assert len(handler.requests_seen) == first_calls
        _, rows_a = read_response_file(tmp_path / "a.jsonl")
        _, rows_b = read_response_file(tmp_path / "b.jsonl")
        assert {k: v["text"] for k, v in rows_a.items()} == {k: v["text"] for k, v in rows_b.items()}
