"""Simulated browser clients replaying quirk profiles against a test driver.

An agent never executes page content.  It walks the redirect chain exactly
as the runner protocol prescribes and, per test, does what its profile
says a browser with those quirks would have done: fetch the page and fire
a callback (executes), fetch the page only (parses_only), or skip the
fetch entirely (skips).  That makes the profile-to-signature mapping an
independent oracle for the driver's state machine.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from urllib.parse import urljoin

import requests

from .errors import ProtocolError
from .signatures import BrowserSignature, Outcome, SignatureDataset
from .store import import_signatures_text


class Behavior(enum.Enum):
    EXECUTES = "executes"
    PARSES_ONLY = "parses_only"
    SKIPS = "skips"


_BEHAVIOR_BY_TOKEN = {
    Outcome.PASS: Behavior.EXECUTES,
    Outcome.SENT: Behavior.PARSES_ONLY,
    Outcome.NA: Behavior.SKIPS,
}
_EXPECTED_OUTCOME = {
    Behavior.EXECUTES: Outcome.PASS,
    Behavior.PARSES_ONLY: Outcome.SENT,
    Behavior.SKIPS: Outcome.NA,
}


@dataclass
class QuirkProfile:
    label: str
    behavior: dict[str, Behavior]
    ua_string: str = ""

    @classmethod
    def from_signature(cls, sig: BrowserSignature) -> "QuirkProfile":
        """Interpret stored P/S/N values as target behavior."""
        return cls(
            label=sig.browser_label,
            behavior={
                attr: _BEHAVIOR_BY_TOKEN[o] for attr, o in sig.outcomes.items()
            },
            ua_string=sig.browser_label,
        )

    def expected_signature(self) -> BrowserSignature:
        """The signature a faithful replay must produce (no HTTP involved)."""
        return BrowserSignature(
            outcomes={
                attr: _EXPECTED_OUTCOME[b] for attr, b in self.behavior.items()
            },
            browser_label=self.ua_string,
        )


def load_profiles(path) -> list[QuirkProfile]:
    """Profiles use the signature file format with P/S/N as behavior."""
    from pathlib import Path

    result = import_signatures_text(
        Path(path).read_text(encoding="utf-8"), min_confidence=0.0
    )
    return [QuirkProfile.from_signature(sig) for sig in result.dataset.signatures]


def replay(
    profile: QuirkProfile,
    server: str,
    mechanism: str = "img_beacon",
    timeout: float = 10.0,
) -> BrowserSignature:
    """Run one profile against a live test driver and return the signature.

    ``mechanism`` picks the callback fired for ``executes`` tests; the
    ``cookie`` variant emulates a browser by attaching the validation
    cookie to subsequent requests instead of hitting a validation URL.
    """
    http = requests.Session()
    http.headers["User-Agent"] = profile.ua_string

    resp = http.post(urljoin(server, "/session"), timeout=timeout)
    if resp.status_code != 200:
        raise ProtocolError(f"session creation failed: HTTP {resp.status_code}")
    info = resp.json()
    token = info["token"]
    attributes = info["attributes"]

    missing = [a for a in attributes if a not in profile.behavior]
    if missing:
        raise ProtocolError(
            f"profile {profile.label!r} does not cover test cases: {missing[:5]}"
        )

    pending_cookies: dict[str, str] = {}
    index = 0
    while True:
        attr = attributes[index]
        behavior = profile.behavior[attr]
        if behavior is not Behavior.SKIPS:
            page = http.get(
                urljoin(server, f"/t/{token}/{index}"),
                timeout=timeout,
                cookies=pending_cookies or None,
            )
            if page.status_code != 200:
                raise ProtocolError(
                    f"test {index} fetch failed: HTTP {page.status_code}"
                )
            if behavior is Behavior.EXECUTES:
                if mechanism == "cookie":
                    # The cookie travels on the next request we make.
                    pending_cookies[f"qp_{token}_{index}"] = "1"
                else:
                    cb = http.get(
                        urljoin(server, f"/v/{token}/{index}/{mechanism}"),
                        timeout=timeout,
                    )
                    if cb.status_code != 200:
                        raise ProtocolError(
                            f"callback for test {index} failed: HTTP {cb.status_code}"
                        )
        nxt = http.get(
            urljoin(server, f"/n/{token}"),
            allow_redirects=False,
            timeout=timeout,
            cookies=pending_cookies or None,
        )
        pending_cookies = {}
        if nxt.status_code != 302:
            raise ProtocolError(
                f"next returned HTTP {nxt.status_code}, expected 302"
            )
        location = nxt.headers.get("Location", "")
        if location.startswith("/done/"):
            done = http.get(urljoin(server, location), timeout=timeout)
            if done.status_code != 200:
                raise ProtocolError(f"done page failed: HTTP {done.status_code}")
            break
        if not location.startswith("/t/"):
            raise ProtocolError(f"unexpected redirect target {location!r}")
        index = int(location.rsplit("/", 1)[1])

    sig_resp = http.get(urljoin(server, f"/sig/{token}"), timeout=timeout)
    if sig_resp.status_code != 200:
        raise ProtocolError(f"signature fetch failed: HTTP {sig_resp.status_code}")
    result = import_signatures_text(sig_resp.text, min_confidence=0.0)
    if len(result.dataset) != 1:
        raise ProtocolError("signature endpoint returned multiple rows")
    return result.dataset.signatures[0]


def replay_all(
    profiles: list[QuirkProfile],
    server: str,
    mechanism: str = "img_beacon",
    max_workers: int = 8,
) -> SignatureDataset:
    """Replay several profiles concurrently against one server."""
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        signatures = list(
            pool.map(lambda p: replay(p, server, mechanism), profiles)
        )
    if not signatures:
        return SignatureDataset(signatures=[], attributes=[])
    return SignatureDataset(
        signatures=signatures, attributes=signatures[0].attributes
    )
