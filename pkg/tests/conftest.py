import http.server
import threading
import warnings

import pytest
from hypothesis import settings

from thzgs.hitran import load_bundled_catalogs
from thzgs.inversion import ZeroColumnWarning

settings.register_profile("thzgs", deadline=None, max_examples=60)
settings.load_profile("thzgs")


@pytest.fixture(scope="session")
def catalogs():
    return load_bundled_catalogs()


@pytest.fixture(autouse=True)
def _quiet_zero_columns():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ZeroColumnWarning)
        yield


class _Handler(http.server.BaseHTTPRequestHandler):
    payload = b""
    route = None  # optional callable: request path -> body
    status = 200
    hits = []

    def do_GET(self):
        type(self).hits.append(self.path)
        if self.status != 200:
            self.send_error(self.status)
            return
        body = type(self).route(self.path) if type(self).route else self.payload
        self.send_response(200)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, *args):
        pass


@pytest.fixture
def server():
    handler = type("H", (_Handler,), {"payload": b"", "route": None, "status": 200, "hits": []})
    httpd = http.server.ThreadingHTTPServer(("127.0.0.1", 0), handler)
    thread = threading.Thread(target=httpd.serve_forever, daemon=True)
    thread.start()
    yield handler, f"http://127.0.0.1:{httpd.server_address[1]}/lbl/api"
    httpd.shutdown()


ACCEPTANCE_LINES = []


@pytest.fixture
def verdict(capsys):
    """Record and print one PASS/FAIL line for an acceptance criterion."""
    def record(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        with capsys.disabled():
            print(f"\n{line}")
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
