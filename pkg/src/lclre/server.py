"""Local JSON service exposing the workbench to the browser UI.

One request is one pure computation; a small hash-keyed cache short-circuits
repeats.  Binds loopback only and has no authentication: this is a research
cockpit, not a deployment target.  Payloads mirror the CLI ``--json``
outputs; responses embed the exact canonical payload string so clients can
compare verdicts byte-for-byte with CLI runs.
"""

from __future__ import annotations

import hashlib
import json
import os
import sys
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .cli import (payload_fixedpoint, payload_parse, payload_step,
                  payload_trivial, payload_validate, payload_verify_psi)
from .diagrams import Diagram, default_diagram, parse_diagram
from .problems import (ParseError, Problem, SearchBudgetExceeded,
                       canonical_json, parse_problem)
from .re_engine import (IterationCapExceeded, PruneFlags, full_step, re_step,
                        rere_step)

DEFAULT_PORT = 8321


def _problem_from(doc: dict) -> Problem:
    if "problem_json" in doc:
        return Problem.from_json(doc["problem_json"])
    return parse_problem(doc["problem"])


def _diagram_from(doc: dict) -> Diagram:
    if "diagram_json" in doc:
        return Diagram.from_json(doc["diagram_json"])
    return parse_diagram(doc["diagram"])


def _prune_from(doc: dict) -> PruneFlags:
    return PruneFlags.all() if doc.get("prune", True) else PruneFlags.none()


def handle_parse(doc: dict) -> dict:
    p = _problem_from(doc)
    payload = payload_parse(p)
    payload["text"] = p.to_text()
    return payload


def _handle_step(doc: dict, step) -> dict:
    p = _problem_from(doc)
    out = step(p, prune=_prune_from(doc))
    payload = payload_step(p, out)
    payload["text"] = out.to_text()
    return payload


def handle_fixedpoint(doc: dict) -> dict:
    p = _problem_from(doc)
    d = _diagram_from(doc)
    payload, prov = payload_fixedpoint(p, d, _prune_from(doc))
    return {
        "payload": payload,
        "payload_canonical": canonical_json(payload),
        "provenance": prov,
        "text": Problem.from_json(payload["problem"]).to_text(),
    }


def handle_check_trivial(doc: dict) -> dict:
    return payload_trivial(_problem_from(doc))


def handle_default_diagram(doc: dict) -> dict:
    d = default_diagram(_problem_from(doc))
    return {"diagram": d.to_text(), "diagram_json": d.to_json()}


def handle_validate_diagram(doc: dict) -> dict:
    return payload_validate(_diagram_from(doc))


def handle_trace(doc: dict) -> dict:
    prov = doc["provenance"]
    line = doc["line"]
    entry = next((ln for ln in prov["lines"] if ln["line"] == line), None)
    if entry is None:
        raise ParseError(f"line {line!r} not present in the provenance")
    return entry


def handle_verify_psi(doc: dict) -> dict:
    return payload_verify_psi(doc["ledger"], doc.get("entry"))


ROUTES = {
    "/parse": handle_parse,
    "/re": lambda doc: _handle_step(doc, re_step),
    "/rere": lambda doc: _handle_step(doc, rere_step),
    "/step": lambda doc: _handle_step(doc, full_step),
    "/fixedpoint": handle_fixedpoint,
    "/check-trivial": handle_check_trivial,
    "/default-diagram": handle_default_diagram,
    "/validate-diagram": handle_validate_diagram,
    "/trace": handle_trace,
    "/verify-psi": handle_verify_psi,
}

_cache: dict[tuple[str, str], bytes] = {}
_cache_lock = threading.Lock()
_CACHE_MAX = 128


class Handler(BaseHTTPRequestHandler):
    server_version = "lclre"

    def log_message(self, fmt, *args):  # quiet by default
        if os.environ.get("LCLRE_HTTP_LOG"):
            super().log_message(fmt, *args)

    def _send(self, code: int, body: bytes,
              content_type: str = "application/json; charset=utf-8"):
        self.send_response(code)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.send_header("Access-Control-Allow-Methods", "POST, GET, OPTIONS")
        self.end_headers()
        self.wfile.write(body)

    def do_OPTIONS(self):
        self._send(204, b"")

    def do_GET(self):
        ui_dir = os.environ.get("LCLRE_UI")
        if ui_dir:
            base = os.path.abspath(ui_dir)
            rel = "index.html" if self.path in ("", "/") else self.path.lstrip("/")
            path = os.path.normpath(os.path.join(base, rel))
            if path.startswith(base + os.sep) and os.path.isfile(path):
                ctype = {"html": "text/html", "js": "text/javascript",
                         "css": "text/css", "json": "application/json",
                         "map": "application/json"}.get(
                    path.rsplit(".", 1)[-1], "application/octet-stream")
                with open(path, "rb") as f:
                    self._send(200, f.read(), ctype)
                return
        body = canonical_json({
            "service": "lclre",
            "endpoints": sorted(ROUTES),
        }).encode()
        self._send(200, body)

    def do_POST(self):
        handler = ROUTES.get(self.path)
        if handler is None:
            self._send(404, canonical_json({"error": "unknown endpoint"}).encode())
            return
        length = int(self.headers.get("Content-Length", "0"))
        raw = self.rfile.read(length)
        key = (self.path, hashlib.sha256(raw).hexdigest())
        with _cache_lock:
            hit = _cache.get(key)
        if hit is not None:
            self._send(200, hit)
            return
        try:
            doc = json.loads(raw.decode("utf-8")) if raw else {}
            body = canonical_json(handler(doc)).encode()
        except (ParseError, KeyError, ValueError, json.JSONDecodeError) as e:
            self._send(400, canonical_json({"error": str(e)}).encode())
            return
        except (SearchBudgetExceeded, IterationCapExceeded) as e:
            self._send(422, canonical_json({"error": str(e),
                                            "undecided": True}).encode())
            return
        with _cache_lock:
            if len(_cache) >= _CACHE_MAX:
                _cache.clear()
            _cache[key] = body
        self._send(200, body)


def make_server(port: int | None = None) -> ThreadingHTTPServer:
    if port is None:
        port = int(os.environ.get("LCLRE_PORT", DEFAULT_PORT))
    return ThreadingHTTPServer(("127.0.0.1", port), Handler)


def serve(port: int | None = None) -> None:
    httpd = make_server(port)
    host, actual_port = httpd.server_address[:2]
    print(f"listening on http://{host}:{actual_port}", file=sys.stderr)
    try:
        httpd.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        httpd.server_close()
