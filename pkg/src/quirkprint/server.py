"""HTTP test driver: serves quirk test pages and collects outcome signatures.

Protocol (paths are the contract):

  - ``POST /session``                       create a session, returns JSON
  - ``GET  /t/{token}/{index}``             test page; marks the test SENT
  - ``GET  /v/{token}/{index}/{mechanism}`` validation callback; marks PASS
  - ``GET  /n/{token}``                     302 to the next test or /done
  - ``GET  /done/{token}``                  completion page; auto-finalizes
  - ``GET  /sig/{token}``                   finalized signature (CSV)
  - ``GET  /log/{token}``                   session event log (JSON)
  - ``GET  /js/{token}/{index}``            payload script (external_js_url)
  - ``GET  /runner``                        browser-side runner page, if configured

Session identity travels in the URL path rather than a cookie, so the
protocol survives sandboxed iframes that block cookie access.  A test's
state only ever moves UNSERVED -> SENT -> PASS; PASS is absorbing, which
makes racing callbacks (img beacon vs xhr) benign.
"""

from __future__ import annotations

import base64
import enum
import json
import threading
import time
import uuid
from dataclasses import dataclass, field
from http.cookies import SimpleCookie
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .corpus import (
    Corpus,
    Encoding,
    PayloadFormat,
    TestCase,
    WebContext,
    expand_test_cases,
    load_corpus,
    render_test_page,
)
from .signatures import BrowserSignature, Outcome, SignatureDataset
from .store import export_signatures_text

# 1x1 green GIF returned by the img_beacon validation URL.
PASS_IMAGE = (
    b"GIF87a\x01\x00\x01\x00\x81\x00\x00\x00\xff\x00\x00\x00\x00"
    b"\x00\x00\x00\x00\x00\x00,\x00\x00\x00\x00\x01\x00\x01\x00\x00"
    b"\x08\x04\x00\x01\x04\x04\x00;"
)


class TestState(enum.Enum):
    UNSERVED = "unserved"
    SENT = "sent"
    PASS = "pass"


class CallbackMechanism(enum.Enum):
    LOCATION_REDIRECT = "location_redirect"
    COOKIE = "cookie"
    XHR = "xhr"
    IMG_BEACON = "img_beacon"


_FINAL_OUTCOME = {
    TestState.UNSERVED: Outcome.NA,
    TestState.SENT: Outcome.SENT,
    TestState.PASS: Outcome.PASS,
}


@dataclass
class Event:
    ts: float
    kind: str  # created | served | callback | anomaly | advanced | finalized
    index: int | None = None
    mechanism: str | None = None
    accepted: bool | None = None
    referer: str | None = None
    detail: str | None = None

    def to_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if v is not None or k == "ts"}


class Session:
    def __init__(self, token: str, ua_string: str, test_count: int):
        self.token = token
        self.ua_string = ua_string
        self.states = [TestState.UNSERVED] * test_count
        self.cursor = 0
        self.created_at = time.time()
        self.finalized_at: float | None = None
        self.events: list[Event] = []
        self.signature: BrowserSignature | None = None
        self.lock = threading.Lock()

    @property
    def finalized(self) -> bool:
        return self.finalized_at is not None


def cookie_name(token: str, index: int) -> str:
    return f"qp_{token}_{index}"


def validation_payload(token: str, index: int) -> str:
    """JavaScript validation routine with all four callback mechanisms.

    Mechanism order: location redirect, cookie set, background XHR, image
    insertion.  Each is wrapped in its own try block so sandboxes that
    block one mechanism never silence the rest.
    """
    v = f"/v/{token}/{index}"
    return (
        "(function(){"
        f'try{{window.location="{v}/{CallbackMechanism.LOCATION_REDIRECT.value}";}}catch(e){{}}'
        f'try{{document.cookie="{cookie_name(token, index)}=1; path=/";}}catch(e){{}}'
        f'try{{var x=new XMLHttpRequest();x.open("GET","{v}/{CallbackMechanism.XHR.value}",true);x.send();}}catch(e){{}}'
        f'try{{var i=new Image();i.src="{v}/{CallbackMechanism.IMG_BEACON.value}";'
        "if(document.body){document.body.appendChild(i);}}catch(e){}"
        "})();"
    )


@dataclass
class ServerConfig:
    listen_host: str = "127.0.0.1"
    listen_port: int = 8341
    corpus_path: str | None = None
    contexts: list[WebContext] | None = None
    encodings: list[Encoding] | None = None
    runner_html: str | None = None
    event_log_dir: str | None = None

    @classmethod
    def from_json_file(cls, path: str | Path) -> "ServerConfig":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        listen = raw.get("listen", "127.0.0.1:8341")
        host, _, port_text = listen.rpartition(":")
        contexts = None
        if "contexts" in raw:
            contexts = [
                WebContext(
                    id=c["id"],
                    doctype_preamble=c.get("doctype_preamble", ""),
                    mime_type=c.get("mime_type", "text/html"),
                )
                for c in raw["contexts"]
            ]
        encodings = None
        if "encodings" in raw:
            encodings = [
                Encoding(id=e["id"], charset_name=e["charset_name"])
                for e in raw["encodings"]
            ]
        return cls(
            listen_host=host or "127.0.0.1",
            listen_port=int(port_text),
            corpus_path=raw.get("corpus"),
            contexts=contexts,
            encodings=encodings,
            runner_html=raw.get("runner_html"),
            event_log_dir=raw.get("event_log_dir"),
        )


class TestDriver:
    """Session registry and test state machine behind the HTTP surface."""

    def __init__(
        self,
        corpus: Corpus,
        event_log_dir: str | Path | None = None,
        runner_html: str | Path | None = None,
    ):
        self.corpus = corpus
        self.test_cases: list[TestCase] = expand_test_cases(corpus)
        self.attributes = [tc.attribute_name for tc in self.test_cases]
        self.event_log_dir = Path(event_log_dir) if event_log_dir else None
        self.runner_html = Path(runner_html) if runner_html else None
        self._sessions: dict[str, Session] = {}
        self._registry_lock = threading.Lock()
        if self.event_log_dir:
            self.event_log_dir.mkdir(parents=True, exist_ok=True)

    # -- session registry ---------------------------------------------------

    def create_session(self, ua_string: str) -> Session:
        token = uuid.uuid4().hex
        session = Session(token, ua_string, len(self.test_cases))
        with self._registry_lock:
            self._sessions[token] = session
        self._log(session, Event(ts=time.time(), kind="created", detail=ua_string))
        return session

    def get_session(self, token: str) -> Session | None:
        with self._registry_lock:
            return self._sessions.get(token)

    def _log(self, session: Session, event: Event) -> None:
        session.events.append(event)
        if self.event_log_dir:
            path = self.event_log_dir / f"{session.token}.jsonl"
            with path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(event.to_dict()) + "\n")
                fh.flush()

    # -- test protocol ------------------------------------------------------

    def serve_test(self, token: str, index: int) -> tuple[str, str, str] | None:
        """Render the test page and mark the test SENT.  None = not found."""
        session = self.get_session(token)
        if session is None or not (0 <= index < len(self.test_cases)):
            return None
        tc = self.test_cases[index]
        vector = self.corpus.vector(tc.vector_id)
        payload = self._encode_payload(vector.payload_format, token, index)
        page = render_test_page(tc, self.corpus, payload)
        with session.lock:
            if session.finalized:
                self._log(
                    session,
                    Event(
                        ts=time.time(),
                        kind="anomaly",
                        index=index,
                        detail="serve after finalize",
                    ),
                )
                return page
            if session.states[index] is TestState.UNSERVED:
                session.states[index] = TestState.SENT
            self._log(session, Event(ts=time.time(), kind="served", index=index))
        return page

    def _encode_payload(
        self, payload_format: PayloadFormat, token: str, index: int
    ) -> str:
        script = validation_payload(token, index)
        if payload_format is PayloadFormat.IDENTITY:
            return script
        if payload_format is PayloadFormat.BASE64:
            return base64.b64encode(script.encode("utf-8")).decode("ascii")
        return f"/js/{token}/{index}"

    def payload_script(self, token: str, index: int) -> str | None:
        session = self.get_session(token)
        if session is None or not (0 <= index < len(self.test_cases)):
            return None
        return validation_payload(token, index)

    def record_pass(
        self,
        token: str,
        index: int,
        mechanism: CallbackMechanism,
        referer: str | None = None,
    ) -> bool | None:
        """Mark a SENT test PASS.  Returns None for unknown token/index,
        False when the callback was an anomaly (test never served), True
        otherwise (including idempotent repeats on an already-PASS test).
        """
        session = self.get_session(token)
        if session is None or not (0 <= index < len(self.test_cases)):
            return None
        with session.lock:
            if session.finalized:
                self._log(
                    session,
                    Event(
                        ts=time.time(),
                        kind="anomaly",
                        index=index,
                        mechanism=mechanism.value,
                        detail="callback after finalize",
                    ),
                )
                return True
            state = session.states[index]
            if state is TestState.UNSERVED:
                self._log(
                    session,
                    Event(
                        ts=time.time(),
                        kind="anomaly",
                        index=index,
                        mechanism=mechanism.value,
                        referer=referer,
                        detail="callback for unserved test",
                    ),
                )
                return False
            if state is TestState.SENT:
                session.states[index] = TestState.PASS
            self._log(
                session,
                Event(
                    ts=time.time(),
                    kind="callback",
                    index=index,
                    mechanism=mechanism.value,
                    accepted=True,
                    referer=referer,
                ),
            )
        return True

    def record_cookie_passes(self, token: str, cookie_header: str) -> None:
        """Scan a Cookie header for validation cookies of this session."""
        session = self.get_session(token)
        if session is None or not cookie_header:
            return
        cookies = SimpleCookie()
        try:
            cookies.load(cookie_header)
        except Exception:
            return
        prefix = f"qp_{token}_"
        for name in cookies.keys():
            if not name.startswith(prefix):
                continue
            try:
                index = int(name[len(prefix):])
            except ValueError:
                continue
            self.record_pass(token, index, CallbackMechanism.COOKIE)

    def advance(self, token: str) -> str | None:
        """Advance the cursor; returns the redirect target path."""
        session = self.get_session(token)
        if session is None:
            return None
        with session.lock:
            if session.cursor < len(self.test_cases):
                session.cursor += 1
            self._log(
                session,
                Event(ts=time.time(), kind="advanced", detail=str(session.cursor)),
            )
            if session.cursor < len(self.test_cases):
                return f"/t/{token}/{session.cursor}"
            return f"/done/{token}"

    def finalize(self, token: str) -> BrowserSignature | None:
        """Freeze outcomes: PASS stays, SENT stays, UNSERVED becomes NA."""
        session = self.get_session(token)
        if session is None:
            return None
        with session.lock:
            if session.signature is not None:
                return session.signature
            outcomes = {
                attr: _FINAL_OUTCOME[state]
                for attr, state in zip(self.attributes, session.states)
            }
            session.signature = BrowserSignature(
                outcomes=outcomes, browser_label=session.ua_string
            )
            session.finalized_at = time.time()
            self._log(session, Event(ts=time.time(), kind="finalized"))
            return session.signature

    def signature_csv(self, token: str) -> str | None:
        sig = self.finalize(token)
        if sig is None:
            return None
        ds = SignatureDataset(signatures=[sig], attributes=self.attributes)
        return export_signatures_text(ds)

    def session_info(self, session: Session) -> dict:
        return {
            "token": session.token,
            "test_count": len(self.test_cases),
            "attributes": self.attributes,
            "first_test_url": f"/t/{session.token}/0",
            "next_url": f"/n/{session.token}",
            "done_url": f"/done/{session.token}",
            "signature_url": f"/sig/{session.token}",
            "runner_url": f"/runner?token={session.token}&start=/t/{session.token}/0",
        }


def verify_pass_after_sent(events: list[Event]) -> list[str]:
    """Replay an event log; report every PASS recorded before its serve."""
    served: set[int] = set()
    violations: list[str] = []
    for event in events:
        if event.kind == "served" and event.index is not None:
            served.add(event.index)
        elif event.kind == "callback" and event.accepted:
            if event.index not in served:
                violations.append(
                    f"callback accepted for test {event.index} before it was served"
                )
    return violations


_DONE_PAGE = """<!DOCTYPE html>
<html><head><meta charset="utf-8"><title>suite complete</title></head>
<body><p id="qp-done">Test suite complete. Signature: <a href="/sig/{token}">/sig/{token}</a></p>
<script>
if (window.parent && window.parent !== window) {{
  try {{ window.parent.postMessage("qp:done:{token}", "*"); }} catch (e) {{}}
}}
</script>
</body></html>
"""

_INDEX_PAGE = """quirkprint test driver
tests: {count}
POST /session to begin; GET /runner?token=... for the browser runner.
"""


class DriverRequestHandler(BaseHTTPRequestHandler):
    driver: TestDriver  # set on the subclass created by make_server
    verbose = False

    protocol_version = "HTTP/1.1"

    # -- helpers -------------------------------------------------------------

    def _send(
        self,
        status: int,
        body: bytes,
        content_type: str = "text/plain; charset=utf-8",
        extra_headers: dict[str, str] | None = None,
    ) -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Cache-Control", "no-store")
        for key, value in (extra_headers or {}).items():
            self.send_header(key, value)
        self.end_headers()
        self.wfile.write(body)

    def _not_found(self, detail: str = "not found") -> None:
        self._send(404, detail.encode("utf-8"))

    def log_message(self, format: str, *args) -> None:  # noqa: A002
        if self.verbose:
            super().log_message(format, *args)

    # -- routing -------------------------------------------------------------

    def do_POST(self) -> None:
        parts = [p for p in self.path.split("?")[0].split("/") if p]
        if parts == ["session"]:
            ua = self.headers.get("User-Agent", "")
            session = self.driver.create_session(ua)
            body = json.dumps(self.driver.session_info(session)).encode("utf-8")
            self._send(200, body, "application/json")
            return
        self._not_found()

    def do_GET(self) -> None:
        path, _, query = self.path.partition("?")
        parts = [p for p in path.split("/") if p]
        if not parts:
            body = _INDEX_PAGE.format(count=len(self.driver.test_cases))
            self._send(200, body.encode("utf-8"))
            return
        head = parts[0]
        if head == "t" and len(parts) == 3:
            self._handle_test(parts[1], parts[2])
        elif head == "v" and len(parts) == 4:
            self._handle_validation(parts[1], parts[2], parts[3])
        elif head == "n" and len(parts) == 2:
            self._handle_next(parts[1])
        elif head == "done" and len(parts) == 2:
            self._handle_done(parts[1])
        elif head == "sig" and len(parts) == 2:
            self._handle_signature(parts[1])
        elif head == "log" and len(parts) == 2:
            self._handle_log(parts[1])
        elif head == "js" and len(parts) == 3:
            self._handle_payload_js(parts[1], parts[2])
        elif head == "runner" and len(parts) == 1:
            self._handle_runner()
        else:
            self._not_found()

    # -- endpoint bodies -----------------------------------------------------

    def _parse_index(self, text: str) -> int | None:
        try:
            return int(text)
        except ValueError:
            return None

    def _handle_test(self, token: str, index_text: str) -> None:
        index = self._parse_index(index_text)
        if index is None:
            self._not_found("bad test index")
            return
        self.driver.record_cookie_passes(token, self.headers.get("Cookie", ""))
        page = self.driver.serve_test(token, index)
        if page is None:
            self._not_found("unknown session or test index")
            return
        html, mime_type, charset = page
        self._send(
            200, html.encode(charset), f"{mime_type}; charset={charset}"
        )

    def _handle_validation(self, token: str, index_text: str, mechanism_text: str) -> None:
        index = self._parse_index(index_text)
        try:
            mechanism = CallbackMechanism(mechanism_text)
        except ValueError:
            self._not_found(f"unknown callback mechanism {mechanism_text!r}")
            return
        if index is None:
            self._not_found("bad test index")
            return
        result = self.driver.record_pass(
            token, index, mechanism, referer=self.headers.get("Referer")
        )
        if result is None:
            self._not_found("unknown session or test index")
            return
        if mechanism is CallbackMechanism.IMG_BEACON:
            self._send(200, PASS_IMAGE, "image/gif")
        else:
            self._send(200, b"PASS recorded\n")

    def _handle_next(self, token: str) -> None:
        self.driver.record_cookie_passes(token, self.headers.get("Cookie", ""))
        target = self.driver.advance(token)
        if target is None:
            self._not_found("unknown session")
            return
        self._send(302, b"", extra_headers={"Location": target})

    def _handle_done(self, token: str) -> None:
        sig = self.driver.finalize(token)
        if sig is None:
            self._not_found("unknown session")
            return
        body = _DONE_PAGE.format(token=token).encode("utf-8")
        self._send(200, body, "text/html; charset=utf-8")

    def _handle_signature(self, token: str) -> None:
        csv_text = self.driver.signature_csv(token)
        if csv_text is None:
            self._not_found("unknown session")
            return
        self._send(200, csv_text.encode("utf-8"), "text/csv; charset=utf-8")

    def _handle_log(self, token: str) -> None:
        session = self.driver.get_session(token)
        if session is None:
            self._not_found("unknown session")
            return
        with session.lock:
            body = json.dumps([e.to_dict() for e in session.events]).encode("utf-8")
        self._send(200, body, "application/json")

    def _handle_payload_js(self, token: str, index_text: str) -> None:
        index = self._parse_index(index_text)
        if index is None:
            self._not_found("bad test index")
            return
        script = self.driver.payload_script(token, index)
        if script is None:
            self._not_found("unknown session or test index")
            return
        self._send(
            200, script.encode("utf-8"), "application/javascript; charset=utf-8"
        )

    def _handle_runner(self) -> None:
        if self.driver.runner_html is None or not self.driver.runner_html.exists():
            self._not_found("runner page not configured")
            return
        body = self.driver.runner_html.read_bytes()
        self._send(200, body, "text/html; charset=utf-8")


def make_server(
    driver: TestDriver, host: str = "127.0.0.1", port: int = 0, verbose: bool = False
) -> ThreadingHTTPServer:
    """Build (but do not start) the threading HTTP server for a driver."""
    handler = type(
        "BoundDriverRequestHandler",
        (DriverRequestHandler,),
        {"driver": driver, "verbose": verbose},
    )
    return ThreadingHTTPServer((host, port), handler)


def driver_from_config(config: ServerConfig) -> TestDriver:
    if not config.corpus_path:
        raise ValueError("server config needs a corpus path")
    corpus = load_corpus(
        config.corpus_path, contexts=config.contexts, encodings=config.encodings
    )
    return TestDriver(
        corpus,
        event_log_dir=config.event_log_dir,
        runner_html=config.runner_html,
    )


def run_server(config: ServerConfig, verbose: bool = True) -> None:
    """Blocking entry point used by the CLI ``serve`` command."""
    driver = driver_from_config(config)
    server = make_server(driver, config.listen_host, config.listen_port, verbose)
    host, port = server.server_address[:2]
    counts = driver.corpus.source_counts()
    print(
        f"quirkprint test driver on http://{host}:{port}/ "
        f"({len(driver.test_cases)} test cases from {counts['total']} vectors)",
        flush=True,
    )
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
