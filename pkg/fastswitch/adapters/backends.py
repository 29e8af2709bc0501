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
import time
from collections import Counter, defaultdict

from ..core.serialization import read_json
from ..utils import InputError, AdapterError, ProtocolError, BackendError, ParseError
from ..utils import get_logger, is_dict
from .protocol import AdapterRequest, AdapterResponse, AdapterRole

logger = get_logger(__name__)

FIXTURE_KEY_SEPARATOR = "\u0000"


class Backend(object):
    """
    Base class for adapter backends. Subclasses implement ``_call`` and
    must be safe to share between threads.
    """

    name = "backend"

    def call(self, request):
        return call_adapter(self, request)

    def close(self):
        pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def _call(self, request):
        raise NotImplementedError


def call_adapter(backend, request):
    """ Sends one request to a backend and checks the response.

        The returned response has the same role as the request and its
        ``latency_ms`` set to the measured wall time of the call.

        :param backend: Adapter backend
        :type backend: Backend
        :param request: Adapter request
        :type request: AdapterRequest
        :rtype: AdapterResponse
        :raises TransportError: retryable transport failure (after the backend's own retries)
        :raises ProtocolError: schema violation in the request or response
        :raises BackendError: failure reported by the backend
    """

    if not isinstance(request, AdapterRequest):
        raise ProtocolError("Expected an AdapterRequest. Got %s" % type(request).__name__)

    step = request.role.value
    start = time.perf_counter()

    try:
        response = backend._call(request)
    except AdapterError as e:
        if e.step is None:
            e.step = step
        raise
    except InputError as e:
        raise ProtocolError(str(e), step)

    elapsed_ms = (time.perf_counter() - start) * 1000.0

    if not isinstance(response, AdapterResponse):
        raise ProtocolError("Backend returned %s instead of an AdapterResponse" % type(response).__name__, step)
    if response.role != request.role:
        raise ProtocolError("Response role '%s' does not match request role '%s'"
                            % (response.role.value, step), step)

    logger.debug("%s %s %s %.2fms", backend.name, request.query.query_id, step, elapsed_ms)

    return response.with_latency(elapsed_ms)


def fixture_key(image_ref, question):
    return "%s%s%s" % (image_ref, FIXTURE_KEY_SEPARATOR, question)


class FixtureBackend(Backend):
    """
    Replays canned responses keyed by (image_ref, question).

    :param fixtures: Mapping of ``"image_ref\\u0000question"`` to one response
        document (used for the switch role) or a list of response documents,
        one per role.
    :type fixtures: dict
    """

    name = "fixture"

    def __init__(self, fixtures):
        if not is_dict(fixtures):
            raise InputError("Expected fixtures as a JSON object. Got %s" % type(fixtures).__name__)

        self._responses = {}
        for key in sorted(fixtures):
            value = fixtures[key]
            docs = value if isinstance(value, list) else [value]
            for i, d in enumerate(docs):
                response = AdapterResponse.from_dict(d, "fixtures[%s][%d]" % (key.replace(FIXTURE_KEY_SEPARATOR, "|"), i))
                if (key, response.role) in self._responses:
                    raise ParseError("Duplicate fixture for role %s" % response.role.value, key)
                self._responses[(key, response.role)] = response

    @classmethod
    def from_file(cls, path):
        return cls(read_json(path))

    def __len__(self):
        return len(self._responses)

    def _call(self, request):
        key = fixture_key(request.query.image_ref, request.query.question)
        try:
            return self._responses[(key, request.role)]
        except KeyError:
            raise BackendError("No %s fixture for image %s, question %s"
                               % (request.role.value, repr(request.query.image_ref), repr(request.query.question)))


class InstrumentedBackend(Backend):
    """
    Wraps another backend and records every call, per query and role.
    """

    name = "instrumented"

    def __init__(self, backend):
        self.backend = backend
        self._lock = threading.Lock()
        self._calls = defaultdict(list)
        self._roles = Counter()

    def _call(self, request):
        with self._lock:
            self._calls[request.query.query_id].append(request.role)
            self._roles[request.role] += 1
        return self.backend._call(request)

    def calls(self, query_id):
        """
        Roles called for ``query_id``, in call order.
        """
        with self._lock:
            return list(self._calls.get(query_id, []))

    def count(self, role=None):
        with self._lock:
            if role is None:
                return sum(self._roles.values())
            return self._roles[AdapterRole(role)]

    def reset(self):
        with self._lock:
            self._calls.clear()
            self._roles.clear()

    def close(self):
        self.backend.close()
