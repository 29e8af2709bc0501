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

from dataclasses import dataclass

from ..core import Query, Mode
from ..core.types import _construct, _list, _number, _text
from ..core.serialization import read_jsonl, write_jsonl
from ..utils import InputError, ParseError
from ..utils import is_string, is_positive_or_zero, is_bool, is_dict


@dataclass(frozen=True)
class EvalRecord:
    """
    Result row of one query: what was predicted, the acceptable answers
    and how the pipeline got there. Failed queries have mode ``failed``
    and name the failing step.
    """

    query_id: str
    predicted: str
    gold: tuple = ()
    mode: Mode = Mode.FAST
    subtask: object = None
    image_ref: str = ""
    latency_ms: float = 0.0
    correct: object = None
    failed_step: object = None
    error: object = None
    flags: tuple = ()
    trace_ref: object = None

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode.parse(self.mode))
        object.__setattr__(self, "gold", tuple(self.gold))
        object.__setattr__(self, "flags", tuple(self.flags))

        if not is_string(self.query_id) or not self.query_id:
            raise InputError("Expected non-empty string for 'query_id'. Got %s" % repr(self.query_id))
        if not is_string(self.predicted):
            raise InputError("Expected string prediction for %s. Got %s" % (self.query_id, repr(self.predicted)))
        if not all(is_string(g) for g in self.gold):
            raise InputError("Expected string gold answers for %s" % self.query_id)
        if not is_positive_or_zero(self.latency_ms):
            raise InputError("Expected non-negative latency for %s. Got %s" % (self.query_id, repr(self.latency_ms)))
        if self.correct is not None and not is_bool(self.correct):
            raise InputError("Expected boolean 'correct' for %s. Got %s" % (self.query_id, repr(self.correct)))

    @property
    def is_scored(self):
        return len(self.gold) > 0

    @property
    def failed(self):
        return self.mode == Mode.FAILED

    def to_dict(self):
        d = {
            "query_id": self.query_id,
            "predicted": self.predicted,
            "gold": list(self.gold),
            "mode": self.mode.value,
            "image_ref": self.image_ref,
            "latency_ms": self.latency_ms,
        }
        for name in ("subtask", "correct", "failed_step", "error", "trace_ref"):
            value = getattr(self, name)
            if value is not None:
                d[name] = value
        if self.flags:
            d["flags"] = list(self.flags)
        return d

    @classmethod
    def from_dict(cls, d, parent=""):
        optional = {}
        for name in ("subtask", "correct", "failed_step", "error", "trace_ref"):
            if is_dict(d) and name in d:
                optional[name] = d[name]
        return _construct(cls, parent,
                          query_id=_text(d, "query_id", parent),
                          predicted=_text(d, "predicted", parent),
                          gold=_list(d, "gold", parent, required=False),
                          mode=Mode.parse(d.get("mode", "fast") if is_dict(d) else "fast", parent + ".mode"),
                          image_ref=d.get("image_ref", ""),
                          latency_ms=_number(d, "latency_ms", parent) if "latency_ms" in d else 0.0,
                          flags=_list(d, "flags", parent, required=False),
                          **optional)


def read_records(path):
    """
    Reads EvalRecords from a JSON Lines file.
    """
    return [EvalRecord.from_dict(d, "%s:%d" % (path, i + 1)) for i, d in enumerate(read_jsonl(path))]


def write_records(path_or_file, records):
    write_jsonl(path_or_file, [r.to_dict() for r in records])


@dataclass(frozen=True)
class QueryLabel:
    """
    Scoring information attached to a query in a batch input file.
    """

    gold: tuple = ()
    subtask: object = None


def load_queries(path):
    """ Reads a batch input file: JSON Lines with ``query_id``,
        ``image_ref`` and ``question``, plus optional ``gold`` (a string or
        a list of strings) and ``subtask``.

        :return: (queries, labels keyed by query_id)
        :rtype: tuple
    """

    queries = []
    labels = {}

    for i, d in enumerate(read_jsonl(path)):
        parent = "%s:%d" % (path, i + 1)
        query = Query.from_dict(d, parent)
        gold = d.get("gold", [])
        if is_string(gold):
            gold = [gold]
        if not isinstance(gold, list) or not all(is_string(g) for g in gold):
            raise ParseError("Expected a string or list of strings", parent + ".gold")
        queries.append(query)
        labels[query.query_id] = QueryLabel(tuple(gold), d.get("subtask"))

    return queries, labels


def write_queries(path, queries, labels=None):
    labels = labels or {}
    rows = []
    for q in queries:
        d = q.to_dict()
        label = labels.get(q.query_id)
        if label is not None:
            d["gold"] = list(label.gold)
            if label.subtask is not None:
                d["subtask"] = label.subtask
        rows.append(d)
    write_jsonl(path, rows)
