"""Shared fixtures: sample data paths and scriptable HTTP stub servers."""

from __future__ import annotations

import json
import threading
from collections import deque
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import pytest

from storygraph.corpus import Backlog, load_backlog

TESTS_DIR = Path(__file__).parent
PKG_ROOT = TESTS_DIR.parent
SAMPLE_CORPUS = PKG_ROOT / "sample_corpus"
SAMPLE_BACKLOG = SAMPLE_CORPUS / "sample.json"
REPLAY_FIXTURE = TESTS_DIR / "fixtures" / "replay.json"

SYNC_TEXT = (
    "As a user, I want to sync my data so that I can access my information from anywhere."
)


@pytest.fixture(scope="session")
def sample_backlog() -> Backlog:
    return load_backlog(SAMPLE_BACKLOG)


@pytest.fixture()
def replay_fixture_path() -> Path:
    return REPLAY_FIXTURE


class StubHttpServer:
    """Scriptable HTTP server.

    Push (status, payload) pairs or callables onto ``behaviors``; each
    request consumes one, falling back to ``default``.  Request bodies and
    selected headers are recorded for assertions.
    """

    def __init__(self) -> None:
        self.behaviors: deque = deque()
        self.default = (200, {"choices": [{"message": {"content": "[]"}}]})
        self.requests: list[dict] = []
        self.paths: list[str] = []
        self.auth_headers: list[str | None] = []
        self._lock = threading.Lock()
        self.in_flight = 0
        self.max_in_flight = 0
        self.delay = 0.0

        server = self

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self):
                import time

                with server._lock:
                    server.in_flight += 1
                    server.max_in_flight = max(server.max_in_flight, server.in_flight)
                try:
                    if server.delay:
                        time.sleep(server.delay)
                    length = int(self.headers.get("Content-Length", "0"))
                    raw = self.rfile.read(length)
                    try:
                        body = json.loads(raw) if raw else {}
                    except ValueError:
                        body = {"_raw": raw.decode("utf-8", "replace")}
                    with server._lock:
                        server.requests.append(body)
                        server.paths.append(self.path)
                        server.auth_headers.append(self.headers.get("Authorization"))
                        behavior = (
                            server.behaviors.popleft()
                            if server.behaviors
                            else server.default
                        )
                    if callable(behavior):
                        status, payload = behavior(body)
                    else:
                        status, payload = behavior
                    data = json.dumps(payload).encode("utf-8")
                    self.send_response(status)
                    self.send_header("Content-Type", "application/json")
                    self.send_header("Content-Length", str(len(data)))
                    self.end_headers()
                    self.wfile.write(data)
                finally:
                    with server._lock:
                        server.in_flight -= 1

            def log_message(self, *args):
                pass

        self.httpd = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)
        self.thread.start()

    @property
    def url(self) -> str:
        host, port = self.httpd.server_address[:2]
        return f"http://{host}:{port}"

    def close(self) -> None:
        self.httpd.shutdown()
        self.httpd.server_close()


@pytest.fixture()
def stub_server():
    server = StubHttpServer()
    yield server
    server.close()


def chat_content_reply(content: str) -> tuple[int, dict]:
    return (200, {"choices": [{"message": {"content": content}}]})


def chat_tool_reply(arguments: dict) -> tuple[int, dict]:
    return (
        200,
        {
            "choices": [
                {
                    "message": {
                        "tool_calls": [
                            {
                                "function": {
                                    "name": "extract_graph_components",
                                    "arguments": json.dumps(arguments),
                                }
                            }
                        ]
                    }
                }
            ]
        },
    )


def neo4j_commit_reply(statement_count: int, nodes_created: int, rels_created: int) -> tuple[int, dict]:
    """Transactional-endpoint shape: per-statement results plus stats.

    Creation counts are attributed to the first statement; only totals
    matter to the client.
    """
    results = []
    for i in range(statement_count):
        stats = {
            "nodes_created": nodes_created if i == 0 else 0,
            "relationships_created": rels_created if i == 0 else 0,
        }
        results.append({"columns": [], "data": [], "stats": stats})
    return (200, {"results": results, "errors": []})
