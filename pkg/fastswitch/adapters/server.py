# MIT License
#
# Copyright (c) 2024 The fastswitch developers
#
# Permission is hereby granted, free of charge, to any person obtaining a copy
# of this software and associated documentation files (the "Software"), to deal
# in the Software without restriction, including without limitation the rights
# to use, copy, modify, merge, publish, distribute, sublicense, and/or sell
# copies of the Software, and to permit persons to whom the Software is
# furnished to do so, subject to the following conditions:
#
# The above copyright notice and this permission notice shall be included in all
# copies or substantial portions of the Software.
#
# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR
# IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY,
# FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE
# AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER
# LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM,
# OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN THE
# SOFTWARE.

"""
Mock adapter service: serves any in-process backend over the JSON wire
protocol, one request per HTTP POST to ``/v1/adapter``.
"""

import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from ..core.serialization import canonical_dumps, canonical_loads
from ..utils import InputError, AdapterError, ProtocolError, UnsupportedQuestionError
from ..utils import get_logger
from .protocol import ADAPTER_PATH, AdapterRequest

logger = get_logger(__name__)


def _error_kind(error):
    if isinstance(error, UnsupportedQuestionError):
        return "unsupported_question", 422
    if isinstance(error, (ProtocolError, InputError)):
        return "protocol", 400
    return "backend", 500


class MockAdapterServer(object):
    """
    Threaded HTTP server exposing ``backend`` at ``/v1/adapter``.

    :param backend: Backend answering the requests
    :type backend: Backend
    :param host: Interface to bind
    :type host: string
    :param port: Port to bind, 0 picks a free one
    :type port: integer
    """

    def __init__(self, backend, host="127.0.0.1", port=0):
        self.backend = backend
        self._httpd = ThreadingHTTPServer((host, port), self._handler_factory())
        self._httpd.daemon_threads = True
        self._thread = None

    @property
    def port(self):
        return self._httpd.server_address[1]

    @property
    def endpoint(self):
        host = self._httpd.server_address[0]
        return "http://%s:%d" % (host, self.port)

    def _handler_factory(self):
        backend = self.backend

        class Handler(BaseHTTPRequestHandler):

            def _reply(self, status, payload):
                body = canonical_dumps(payload)
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)

            def do_POST(self):
                if self.path != ADAPTER_PATH:
                    self._reply(404, {"error": "Unknown path %s" % self.path, "kind": "protocol"})
                    return

                length = int(self.headers.get("Content-Length") or 0)
                try:
                    request = AdapterRequest.from_dict(canonical_loads(self.rfile.read(length), "request"))
                    response = backend.call(request)
                except (InputError, AdapterError) as e:
                    kind, status = _error_kind(e)
                    message = e.message if isinstance(e, AdapterError) else str(e)
                    self._reply(status, {"error": message, "kind": kind})
                    return

                self._reply(200, response.to_dict())

            def do_GET(self):
                self._reply(405, {"error": "Use POST %s" % ADAPTER_PATH, "kind": "protocol"})

            def log_message(self, format, *args):
                logger.info("%s %s", self.address_string(), format % args)

        return Handler

    def serve_forever(self):
        logger.info("Serving %s backend on %s%s", self.backend.name, self.endpoint, ADAPTER_PATH)
        try:
            self._httpd.serve_forever()
        finally:
            self._httpd.server_close()

    def start(self):
        """
        Serves from a background thread and returns immediately.
        """
        self._thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)
        self._thread.start()
        return self

    def stop(self):
        self._httpd.shutdown()
        self._httpd.server_close()
        if self._thread is not None:
            self._thread.join()
            self._thread = None

    def __enter__(self):
        return self.start()

    def __exit__(self, *exc):
        self.stop()
