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
Per-query traces of adapter calls.

A trace file ``<query_id>.trace.json`` holds the query, every adapter
call in causal order and the final answer with its evidence chain, all
in the canonical JSON encodings.
"""

import os
import threading
from dataclasses import dataclass
from urllib.parse import quote

from ..core.serialization import write_json
from ..utils import InputError, is_positive_or_zero


def _strip_timing(d):
    d = dict(d)
    if "latency_ms" in d:
        d["latency_ms"] = 0.0
    return d


@dataclass(frozen=True)
class TraceEvent:
    """
    One adapter call. ``request`` and ``response`` are summaries in
    canonical JSON form; a failed call has ``error`` instead of a response.
    """

    step: str
    request: dict
    response: object
    t_start: float
    t_end: float
    error: object = None

    def __post_init__(self):
        if not is_positive_or_zero(self.t_start) or not is_positive_or_zero(self.t_end):
            raise InputError("Expected non-negative timestamps. Got %s and %s" % (self.t_start, self.t_end))
        if self.t_end < self.t_start:
            raise InputError("Trace event ends before it starts: %s < %s" % (self.t_end, self.t_start))

    def to_dict(self, no_timestamps=False):
        d = {"step": self.step, "request": self.request}
        if self.response is not None:
            d["response"] = _strip_timing(self.response) if no_timestamps else self.response
        if self.error is not None:
            d["error"] = self.error
        d["t_start"] = 0.0 if no_timestamps else self.t_start
        d["t_end"] = 0.0 if no_timestamps else self.t_end
        return d


def summarize_request(request):
    # the query is recorded once at the top of the trace
    d = request.to_dict()
    del d["query"]
    return d


class QueryTrace(object):
    """
    Collects the events of a single query. Confined to the task running
    that query.
    """

    def __init__(self, query):
        self.query = query
        self.events = []
        self.answer = None
        self.error = None

    def add(self, request, response, t_start, t_end):
        self.events.append(TraceEvent(request.role.value, summarize_request(request), response.to_dict(),
                                      t_start, max(t_start, t_end)))

    def fail(self, request, error, t_start, t_end):
        self.error = str(error)
        self.events.append(TraceEvent(request.role.value, summarize_request(request), None,
                                      t_start, max(t_start, t_end), error=str(error)))

    @property
    def steps(self):
        return [e.step for e in self.events]

    def to_dict(self, no_timestamps=False):
        d = {
            "query": self.query.to_dict(),
            "events": [e.to_dict(no_timestamps) for e in self.events],
        }
        if self.answer is not None:
            answer = self.answer.to_dict()
            if no_timestamps:
                answer["latency_ms"] = 0.0
            d["answer"] = answer
        if self.error is not None:
            d["error"] = self.error
        return d

    def write(self, trace_dir, no_timestamps=False):
        """
        Writes ``<query_id>.trace.json`` into ``trace_dir`` and returns the path.
        """
        path = trace_path(trace_dir, self.query.query_id)
        write_json(path, self.to_dict(no_timestamps))
        return path


_mkdir_lock = threading.Lock()


def trace_path(trace_dir, query_id):
    with _mkdir_lock:
        os.makedirs(trace_dir, exist_ok=True)
    # percent-encoded, so distinct query ids never share a file
    safe = quote(query_id, safe="")
    return os.path.join(trace_dir, "%s.trace.json" % safe)
