"""HTTP prediction service.

Routes:
    POST /predict        form field `url` or JSON {"url": ...}
    POST /predict-batch  JSON {"urls": [...]}, at most 1000 items
    GET  /health         {"status": "ok", "model_loaded": bool}
    GET  /...            static files from the configured directory

Model parameters are loaded once and shared read-only across request
threads; responses depend only on the request body and the loaded model.
Built on the stdlib http server so serving adds no dependencies.
"""

from __future__ import annotations

import json
import posixpath
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlsplit

from .classifier import Hyperparams, ModelParams, predict
from .corpus import UrlClass, Vocabulary

MAX_BATCH = 1000

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".json": "application/json",
    ".map": "application/json",
    ".svg": "image/svg+xml",
    ".png": "image/png",
    ".ico": "image/x-icon",
}


class PredictionService:
    """The loaded model plus the response shape used by every endpoint."""

    def __init__(
        self,
        params: ModelParams | None = None,
        hp: Hyperparams | None = None,
        vocab: Vocabulary | None = None,
    ):
        self.params = params
        self.hp = hp
        self.vocab = vocab

    @property
    def model_loaded(self) -> bool:
        return self.params is not None

    def predict_one(self, url) -> dict:
        if not isinstance(url, str) or not url.strip():
            raise ValueError("url must be a non-empty string")
        pred = predict(self.params, self.hp, self.vocab, url.strip())
        return {
            "prediction": pred.label.label,
            "confidence": pred.confidence,
            "probabilities": {
                UrlClass(i).label: p for i, p in enumerate(pred.probabilities)
            },
        }


class _Handler(BaseHTTPRequestHandler):
    service: PredictionService
    static_dir: Path | None

    def log_message(self, fmt, *args):  # keep request noise out of stderr
        pass

    def _send_json(self, status: int, payload: dict) -> None:
        body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _read_body(self) -> bytes:
        length = int(self.headers.get("Content-Length") or 0)
        return self.rfile.read(length) if length > 0 else b""

    def _parse_url_field(self) -> str:
        """Extract `url` from a JSON or form-encoded POST body."""
        body = self._read_body()
        ctype = (self.headers.get("Content-Type") or "").lower()
        if "application/json" in ctype:
            doc = json.loads(body.decode("utf-8"))
            if not isinstance(doc, dict) or "url" not in doc:
                raise ValueError("JSON body must be an object with a 'url' field")
            return doc["url"]
        fields = parse_qs(body.decode("utf-8"), keep_blank_values=True)
        if "url" not in fields:
            raise ValueError("missing form field 'url'")
        return fields["url"][0]

    def do_GET(self):
        path = urlsplit(self.path).path
        if path == "/health":
            self._send_json(200, {"status": "ok", "model_loaded": self.service.model_loaded})
            return
        self._serve_static(path)

    def do_POST(self):
        path = urlsplit(self.path).path
        if path == "/predict":
            self._handle_predict()
        elif path == "/predict-batch":
            self._handle_predict_batch()
        else:
            self._send_json(404, {"error": f"no such route: {path}"})

    def _handle_predict(self):
        if not self.service.model_loaded:
            self._send_json(503, {"error": "model not loaded"})
            return
        try:
            url = self._parse_url_field()
            result = self.service.predict_one(url)
        except (ValueError, UnicodeDecodeError, json.JSONDecodeError) as exc:
            self._send_json(400, {"error": str(exc)})
            return
        self._send_json(200, result)

    def _handle_predict_batch(self):
        if not self.service.model_loaded:
            self._send_json(503, {"error": "model not loaded"})
            return
        try:
            doc = json.loads(self._read_body().decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            self._send_json(400, {"error": f"invalid JSON body: {exc}"})
            return
        urls = doc.get("urls") if isinstance(doc, dict) else None
        if not isinstance(urls, list) or not urls:
            self._send_json(400, {"error": "JSON body must carry a non-empty 'urls' list"})
            return
        if len(urls) > MAX_BATCH:
            self._send_json(400, {"error": f"at most {MAX_BATCH} urls per batch"})
            return
        results = []
        for url in urls:
            try:
                results.append(self.service.predict_one(url))
            except ValueError as exc:
                results.append({"error": str(exc)})
        self._send_json(200, {"results": results})

    def _serve_static(self, path: str):
        if self.static_dir is None:
            self._send_json(404, {"error": f"no such route: {path}"})
            return
        clean = posixpath.normpath(path.lstrip("/"))
        if clean in (".", ""):
            clean = "index.html"
        target = (self.static_dir / clean).resolve()
        if not target.is_relative_to(self.static_dir.resolve()) or not target.is_file():
            self._send_json(404, {"error": f"not found: {path}"})
            return
        body = target.read_bytes()
        self.send_response(200)
        ctype = _CONTENT_TYPES.get(target.suffix.lower(), "application/octet-stream")
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)


def make_server(
    service: PredictionService,
    host: str = "127.0.0.1",
    port: int = 8080,
    static_dir: str | None = None,
) -> ThreadingHTTPServer:
    """Build (but don't start) the threaded HTTP server."""

    class Handler(_Handler):
        pass

    Handler.service = service
    Handler.static_dir = Path(static_dir) if static_dir else None
    return ThreadingHTTPServer((host, port), Handler)
