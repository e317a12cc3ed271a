"""Operator-side HTTP endpoint backing the browser HMI.

The browser never constructs program text itself: it POSTs its choices plus
the AnswerCapture payload to /generate and uploads the returned text over the
bus, so the grammar has a single source of truth (build_job_program). The
server also hands out the cell's WebSocket address (/config) and serves the
static HMI bundle.
"""

import json
import os
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .errors import WeldCellError
from .handler import CapturePayload
from .operator_cli import JobChoices, build_job_program
from .weldprog import render_program

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".map": "application/json",
    ".json": "application/json",
}


def generate_from_request(obj):
    """{choices, capture} -> {program_name, program_text}; raises WeldCellError."""
    c = obj["choices"]
    choices = JobChoices(
        structure=c.get("structure", "U"),
        length_h=float(c["length_h"]),
        length_v=float(c["length_v"]),
        weld_scheme=int(c.get("weld_scheme", 1)),
        weave_scheme=int(c.get("weave_scheme", 1)),
        simulate=bool(c.get("simulate", True)),
    )
    payload = CapturePayload.from_json_payload(obj["capture"])
    prog = build_job_program(choices, payload)
    return {"program_name": prog.name, "program_text": render_program(prog)}


class UiService:
    """Small threaded HTTP server: POST /generate, GET /config, GET statics."""

    def __init__(self, host="127.0.0.1", port=0, ws_port=None,
                 topic=None, static_dir=None):
        self.host = host
        self.ws_port = ws_port
        self.topic = topic
        self.static_dir = static_dir
        self._httpd = None
        self._thread = None
        self._want_port = port

    @property
    def port(self):
        return self._httpd.server_address[1]

    def start(self):
        service = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args):  # quiet tests/CLI
                pass

            def _reply(self, status, obj):
                body = json.dumps(obj).encode("utf-8")
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)

            def do_POST(self):
                if self.path != "/generate":
                    self._reply(404, {"error": "unknown endpoint"})
                    return
                length = int(self.headers.get("Content-Length", 0))
                try:
                    obj = json.loads(self.rfile.read(length).decode("utf-8"))
                    self._reply(200, generate_from_request(obj))
                except WeldCellError as exc:
                    self._reply(409, {"error": str(exc),
                                      "code": type(exc).__name__})
                except (KeyError, ValueError, json.JSONDecodeError) as exc:
                    self._reply(400, {"error": f"bad request: {exc}"})

            def do_GET(self):
                if self.path == "/config":
                    self._reply(200, {"ws_port": service.ws_port,
                                      "topic": service.topic})
                    return
                self._serve_static()

            def _serve_static(self):
                if service.static_dir is None:
                    self._reply(404, {"error": "no static bundle configured"})
                    return
                rel = self.path.lstrip("/") or "index.html"
                full = os.path.realpath(os.path.join(service.static_dir, rel))
                root = os.path.realpath(service.static_dir)
                if not full.startswith(root) or not os.path.isfile(full):
                    self._reply(404, {"error": f"no such file {rel!r}"})
                    return
                ext = os.path.splitext(full)[1]
                with open(full, "rb") as fh:
                    body = fh.read()
                self.send_response(200)
                self.send_header("Content-Type",
                                 _CONTENT_TYPES.get(ext, "application/octet-stream"))
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)

        self._httpd = ThreadingHTTPServer((self.host, self._want_port), Handler)
        self._thread = threading.Thread(target=self._httpd.serve_forever,
                                        daemon=True)
        self._thread.start()
        return self

    def stop(self):
        if self._httpd is not None:
            self._httpd.shutdown()
            self._httpd.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5.0)

    def __enter__(self):
        return self.start()

    def __exit__(self, *exc):
        self.stop()
