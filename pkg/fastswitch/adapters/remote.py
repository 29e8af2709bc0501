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

import threading

import requests
from requests.adapters import HTTPAdapter
from urllib3.util.retry import Retry

from ..core.serialization import canonical_dumps, canonical_loads
from ..utils import ParseError, TransportError, ProtocolError, BackendError, UnsupportedQuestionError
from ..utils import get_logger, is_positive, is_positive_integer_or_zero, is_positive_or_zero
from ..utils import ConfigError
from .backends import Backend
from .protocol import ADAPTER_PATH, AdapterResponse

logger = get_logger(__name__)

DEFAULT_TIMEOUT = 30.0
DEFAULT_RETRIES = 2
DEFAULT_BACKOFF = 0.5

_ERROR_KINDS = {
    "protocol": ProtocolError,
    "unsupported_question": UnsupportedQuestionError,
    "backend": BackendError,
}


class RemoteBackend(Backend):
    """
    Client for an adapter service speaking the JSON protocol at ``/v1/adapter``.

    Connection failures and timeouts are retried ``retries`` times with
    exponential backoff; HTTP error statuses and schema violations are
    never retried.

    :param endpoint: Base URL of the service, e.g. ``http://127.0.0.1:8080``
    :type endpoint: string
    :param timeout: Per-request timeout in seconds
    :type timeout: float
    :param retries: Number of retries on transport failures
    :type retries: integer
    :param backoff_factor: Backoff factor passed to urllib3
    :type backoff_factor: float
    """

    name = "remote"

    def __init__(self, endpoint, timeout=DEFAULT_TIMEOUT, retries=DEFAULT_RETRIES, backoff_factor=DEFAULT_BACKOFF):
        if not endpoint or not str(endpoint).startswith(("http://", "https://")):
            raise ConfigError("Expected an http(s) endpoint. Got %s" % repr(endpoint))
        if not is_positive(timeout):
            raise ConfigError("Expected positive timeout. Got %s" % str(timeout))
        if not is_positive_integer_or_zero(retries):
            raise ConfigError("Expected non-negative integer retries. Got %s" % str(retries))
        if not is_positive_or_zero(backoff_factor):
            raise ConfigError("Expected non-negative backoff factor. Got %s" % str(backoff_factor))

        self.endpoint = str(endpoint).rstrip("/")
        self.url = self.endpoint + ADAPTER_PATH
        self.timeout = timeout
        self.retries = retries
        self.backoff_factor = backoff_factor

        # requests sessions are not thread safe, so each worker thread gets one
        self._local = threading.local()
        self._sessions = []
        self._lock = threading.Lock()

    def _session(self):
        session = getattr(self._local, "session", None)
        if session is not None:
            return session

        session = requests.Session()
        retry = Retry(
            total=self.retries, connect=self.retries, read=self.retries,
            status=0, other=0, backoff_factor=self.backoff_factor,
            allowed_methods=frozenset(["POST"]), raise_on_status=False,
        )
        adapter = HTTPAdapter(max_retries=retry)
        session.mount("http://", adapter)
        session.mount("https://", adapter)
        session.headers.update({"Content-Type": "application/json"})

        self._local.session = session
        with self._lock:
            self._sessions.append(session)
        return session

    def _call(self, request):
        step = request.role.value

        try:
            http_response = self._session().post(self.url, data=canonical_dumps(request.to_dict()),
                                                 timeout=self.timeout)
        except (requests.exceptions.ConnectionError, requests.exceptions.Timeout) as e:
            logger.warning("Transport failure calling %s (%s): %s", self.url, step, e)
            raise TransportError("Could not reach adapter service at %s: %s" % (self.url, e), step)
        except requests.exceptions.RequestException as e:
            raise TransportError("Request to %s failed: %s" % (self.url, e), step)

        try:
            body = canonical_loads(http_response.content, "response")
        except ParseError as e:
            raise ProtocolError("HTTP %d with unreadable body: %s" % (http_response.status_code, e), step)

        if http_response.status_code != 200:
            message = body.get("error", "HTTP %d" % http_response.status_code) if isinstance(body, dict) else str(body)
            kind = body.get("kind", "backend") if isinstance(body, dict) else "backend"
            raise _ERROR_KINDS.get(kind, BackendError)(message, step)

        try:
            return AdapterResponse.from_dict(body)
        except ParseError as e:
            raise ProtocolError("Malformed adapter response: %s" % e, step)

    def close(self):
        with self._lock:
            for session in self._sessions:
                session.close()
            self._sessions = []
