from __future__ import annotations

import contextlib
import threading

from quirkprint.corpus import Corpus
from quirkprint.server import TestDriver, make_server


@contextlib.contextmanager
def run_driver(corpus: Corpus, **driver_kwargs):
    """Start an in-process test driver; yields (base_url, driver)."""
    driver = TestDriver(corpus, **driver_kwargs)
    httpd = make_server(driver)
    thread = threading.Thread(
        target=lambda: httpd.serve_forever(poll_interval=0.05), daemon=True
    )
    thread.start()
    host, port = httpd.server_address[:2]
    try:
        yield f"http://{host}:{port}", driver
    finally:
        httpd.shutdown()
        httpd.server_close()
