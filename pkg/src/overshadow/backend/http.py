"""HTTP transport: wire client and the toy-model server.

The server writes canonical JSON bytes so that identical requests against the
in-process model and the served model produce byte-identical payloads.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np
import requests

from ..errors import InputError, TransportError
from ..ioutil import canonical_json_bytes
from .protocol import (
    Backend,
    BackendConfig,
    BackendInfo,
    EmbeddingMatrix,
    StepDistributions,
    TokenizedText,
)
from .toy import ToyBackend, dispatch


class HttpBackend(Backend):
    """Wire-protocol client. Stateless per request; safe for concurrent use."""

    def __init__(self, config: BackendConfig):
        self.config = config
        self.base_url = config.endpoint.rstrip("/")

    def _post(self, path: str, payload: dict) -> dict:
        return self._request("POST", path, payload)

    def _request(self, method: str, path: str, payload: dict | None) -> dict:
        url = self.base_url + path
        try:
            if method == "GET":
                resp = requests.get(url, timeout=self.config.request_timeout)
            else:
                resp = requests.post(url, json=payload, timeout=self.config.request_timeout)
        except requests.RequestException as exc:
            raise TransportError(f"backend unreachable at {url}: {exc}") from exc
        if resp.status_code == 400:
            raise InputError(_error_message(resp))
        if resp.status_code != 200:
            raise TransportError(f"backend returned {resp.status_code} for {path}: {_error_message(resp)}")
        try:
            return resp.json()
        except ValueError as exc:
            raise TransportError(f"backend returned invalid JSON for {path}") from exc

    def info(self) -> BackendInfo:
        data = self._request("GET", "/v1/info", None)
        return BackendInfo(
            vocab_size=int(data["vocab_size"]),
            embed_dim=int(data["embed_dim"]),
            model_name=str(data["model_name"]),
        )

    def tokenize(self, text: str) -> TokenizedText:
        return TokenizedText.from_payload(text, self._post("/v1/tokenize", {"text": text}))

    def embed(self, token_ids) -> EmbeddingMatrix:
        payload = self._post("/v1/embed", {"token_ids": [int(i) for i in token_ids]})
        return EmbeddingMatrix.from_payload(payload)

    def forward_distributions(self, embeddings: EmbeddingMatrix, max_steps: int) -> StepDistributions:
        request = embeddings.to_payload()
        request["max_steps"] = int(max_steps)
        return StepDistributions.from_payload(self._post("/v1/forward", request))

    def next_token_distribution(self, prompt: str) -> np.ndarray:
        payload = self._post("/v1/next_token", {"prompt": prompt})
        return np.asarray(payload["probs"], dtype=np.float64)

    def generate(self, prompt: str, max_steps: int) -> str:
        return str(self._post("/v1/generate", {"prompt": prompt, "max_steps": int(max_steps)})["text"])


def _error_message(resp) -> str:
    try:
        return str(resp.json().get("error", resp.text))
    except ValueError:
        return resp.text


class BackendServer:
    """Threaded HTTP server hosting one toy model.

    Model parameters are immutable after startup, so concurrent request
    handling needs no locking.
    """

    def __init__(self, backend: ToyBackend, host: str = "127.0.0.1", port: int = 0):
        handler = _make_handler(backend)
        self._httpd = ThreadingHTTPServer((host, port), handler)
        self._thread: threading.Thread | None = None

    @property
    def address(self) -> str:
        host, port = self._httpd.server_address[:2]
        return f"http://{host}:{port}"

    def start(self) -> "BackendServer":
        self._thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        self._httpd.shutdown()
        self._httpd.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)

    def serve_forever(self) -> None:
        self._httpd.serve_forever()


def _make_handler(backend: ToyBackend):
    class Handler(BaseHTTPRequestHandler):
        def log_message(self, *args):  # quiet by default
            pass

        def do_GET(self):
            self._handle("GET")

        def do_POST(self):
            self._handle("POST")

        def _handle(self, method: str):
            payload = None
            if method == "POST":
                length = int(self.headers.get("Content-Length", "0"))
                try:
                    payload = json.loads(self.rfile.read(length) or b"{}")
                except json.JSONDecodeError:
                    self._reply(400, {"error": "request body is not valid JSON"})
                    return
            try:
                response = dispatch(backend, method, self.path, payload)
            except (InputError, KeyError, TypeError, ValueError) as exc:
                self._reply(400, {"error": str(exc)})
                return
            except Exception as exc:  # pragma: no cover - defensive
                self._reply(500, {"error": str(exc)})
                return
            self._reply(200, response)

        def _reply(self, status: int, obj: dict):
            body = canonical_json_bytes(obj)
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

    return Handler
