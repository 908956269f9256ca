"""Local HTTP bridge between the engine and a browser speech client.

The browser keeps a page open that runs continuous recognition and asks
the server once per second (long-poll style) for the next control
action; recognized transcripts come back as POSTs.  That turns a
cloud recognizer living in a browser tab into an ordinary transcript
source for the engine.

Serving from a loopback address matters: browsers persist the
microphone permission for local origins without TLS, so the user is
asked exactly once.

Endpoints (JSON, UTF-8):
  GET  /client?lang=<tag>&autostart=<0|1>   the parameterized client page
  GET  /control?last=<seq>                  next queued action or none
  POST /transcript                          {"text","final","confidence","client_time"?}
  GET  /state                               read-only engine display snapshot
"""

from __future__ import annotations

import json
import re
import threading
from collections import deque
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from importlib import resources
from urllib.parse import parse_qs, urlsplit

from .events import RecognitionEvent, Source

DEFAULT_PORT = 8080
POLL_INTERVAL_MS = 1000  # client-side timer; the server is interval-agnostic

ACTIONS = ("none", "start", "stop", "set-language")

_LANG_RE = re.compile(r"^[A-Za-z]{2,3}(-[A-Za-z0-9]{2,8})*$")


class BridgeProtocolError(ValueError):
    pass


@dataclass(frozen=True)
class ControlAction:
    seq: int
    action: str
    lang: str | None = None

    def __post_init__(self) -> None:
        if self.action not in ACTIONS:
            raise BridgeProtocolError(f"unknown action {self.action!r}")
        if (self.action == "set-language") != (self.lang is not None):
            raise BridgeProtocolError("lang present iff action is set-language")

    def to_payload(self) -> dict:
        payload = {"seq": self.seq, "action": self.action}
        if self.lang is not None:
            payload["lang"] = self.lang
        return payload


@dataclass(frozen=True)
class TranscriptMessage:
    text: str
    final: bool
    confidence: float
    client_time: int = 0

    def to_event(self) -> RecognitionEvent:
        return RecognitionEvent(
            self.client_time, self.text, self.confidence, Source.BRIDGE, self.final
        )


def parse_transcript(payload) -> TranscriptMessage:
    """Validate a transcript POST body."""
    if not isinstance(payload, dict):
        raise BridgeProtocolError("body must be a JSON object")
    text = payload.get("text")
    if not isinstance(text, str) or not text:
        raise BridgeProtocolError("missing or empty text")
    final = payload.get("final")
    if not isinstance(final, bool):
        raise BridgeProtocolError("final must be a boolean")
    confidence = payload.get("confidence")
    if not isinstance(confidence, (int, float)) or isinstance(confidence, bool):
        raise BridgeProtocolError("confidence must be a number")
    if not 0.0 <= confidence <= 1.0:
        raise BridgeProtocolError("confidence outside [0,1]")
    client_time = payload.get("client_time", 0)
    if not isinstance(client_time, int) or isinstance(client_time, bool) or client_time < 0:
        raise BridgeProtocolError("client_time must be a non-negative integer")
    return TranscriptMessage(text, final, float(confidence), client_time)


class BridgeSession:
    """Control queue with at-least-once delivery and seq-based dedupe.

    Sequence numbers are gapless from 1.  Delivered actions stay queued
    until a later poll acknowledges them with a higher `last` value, so
    a lost poll response costs nothing; the client deduplicates by seq.
    """

    def __init__(self, port: int = DEFAULT_PORT, language: str = "pt-BR", autostart: bool = False):
        self.port = port
        self.language = language
        self.autostart = autostart
        self._lock = threading.Lock()
        self._pending: deque[ControlAction] = deque()
        self._seq = 0

    def enqueue_control(self, action: str, lang: str | None = None) -> int:
        with self._lock:
            self._seq += 1
            self._pending.append(ControlAction(self._seq, action, lang))
            return self._seq

    def poll_control(self, last_seq: int) -> ControlAction:
        with self._lock:
            while self._pending and self._pending[0].seq <= last_seq:
                self._pending.popleft()  # acknowledged
            if self._pending:
                return self._pending[0]
            return ControlAction(last_seq, "none")

    def pending_count(self) -> int:
        with self._lock:
            return len(self._pending)


def default_client_page() -> str:
    return resources.files("xulia").joinpath("data/client.html").read_text("utf-8")


def render_client_page(template: str, lang: str, autostart: bool) -> str:
    """Inject lang/autostart at the marked placeholders; deterministic."""
    if not _LANG_RE.match(lang):
        raise BridgeProtocolError(f"unsupported language tag {lang!r}")
    return template.replace("__LANG__", lang).replace(
        "__AUTOSTART__", "true" if autostart else "false"
    )


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server: "BridgeServer"

    def log_message(self, format, *args):  # quiet; the engine log is the record
        pass

    def _send(self, code: int, body: bytes, content_type: str) -> None:
        self.send_response(code)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_json(self, code: int, payload: dict) -> None:
        self._send(code, json.dumps(payload).encode("utf-8"), "application/json; charset=utf-8")

    def do_GET(self):
        url = urlsplit(self.path)
        query = parse_qs(url.query)
        session = self.server.session
        if url.path == "/client":
            lang = query.get("lang", [session.language])[0]
            raw_auto = query.get("autostart", ["1" if session.autostart else "0"])[0]
            if raw_auto not in ("0", "1", "true", "false"):
                self._send_json(400, {"error": f"bad autostart value {raw_auto!r}"})
                return
            try:
                page = render_client_page(
                    self.server.client_template, lang, raw_auto in ("1", "true")
                )
            except BridgeProtocolError as e:
                self._send_json(400, {"error": str(e)})
                return
            self._send(200, page.encode("utf-8"), "text/html; charset=utf-8")
        elif url.path == "/control":
            raw_last = query.get("last", ["0"])[0]
            try:
                last = int(raw_last)
            except ValueError:
                self._send_json(400, {"error": f"bad last value {raw_last!r}"})
                return
            self._send_json(200, session.poll_control(last).to_payload())
        elif url.path == "/state":
            provider = self.server.state_provider
            self._send_json(200, provider() if provider is not None else {})
        else:
            self._send_json(404, {"error": "not found"})

    def do_POST(self):
        url = urlsplit(self.path)
        if url.path != "/transcript":
            self._send_json(404, {"error": "not found"})
            return
        length = int(self.headers.get("Content-Length", "0"))
        try:
            payload = json.loads(self.rfile.read(length).decode("utf-8"))
            message = parse_transcript(payload)
        except (json.JSONDecodeError, UnicodeDecodeError):
            self._send_json(400, {"accepted": False, "error": "body is not valid JSON"})
            return
        except BridgeProtocolError as e:
            self._send_json(400, {"accepted": False, "error": str(e)})
            return
        self.server.intake(message.to_event())
        self._send_json(200, {"accepted": True})


class BridgeServer(ThreadingHTTPServer):
    """Loopback-only HTTP front; engine effects funnel through `intake`.

    Transcripts are handed to `intake` in HTTP arrival order; the intake
    must serialize them onto the engine loop (a Queue does).
    """

    daemon_threads = True

    def __init__(
        self,
        session: BridgeSession,
        intake,
        *,
        state_provider=None,
        client_template: str | None = None,
        host: str = "127.0.0.1",
        port: int | None = None,
    ):
        self.session = session
        self.intake = intake
        self.state_provider = state_provider
        self.client_template = client_template if client_template is not None else default_client_page()
        super().__init__((host, port if port is not None else session.port), _Handler)

    @property
    def port(self) -> int:
        return self.server_address[1]

    def start_background(self) -> threading.Thread:
        thread = threading.Thread(target=self.serve_forever, daemon=True)
        thread.start()
        return thread
