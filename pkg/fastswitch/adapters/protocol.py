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
Adapter roles and the request/response messages exchanged with adapter
backends over ``/v1/adapter``.
"""

import enum
import re
from dataclasses import dataclass, replace

from ..core import Query, Region, BBox, Mask, ContextClue, MissingObject, EvidenceChain
from ..core.types import _list, _number, _path, _require, _text
from ..utils import ParseError, GeometryError, ProtocolError
from ..utils import is_string, is_positive_or_zero

ADAPTER_PATH = "/v1/adapter"
TRIGGER_PHRASE = "sorry, i can not answer"

REQUEST_FIELDS = ("role", "query", "clues", "region", "boxes", "missing", "chain")
RESPONSE_FIELDS = ("role", "raw_text", "region", "boxes", "mask", "latency_ms")


class AdapterRole(str, enum.Enum):
    SWITCH = "switch"
    PROPOSE_REGION = "propose_region"
    PROPOSE_BOXES = "propose_boxes"
    SEGMENT = "segment"
    SUMMARIZE = "summarize"

    @classmethod
    def parse(cls, value, path="role"):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ParseError("Unknown adapter role. Got %s" % repr(value), path)


def _check_keys(d, allowed, what):
    extra = sorted(set(d) - set(allowed))
    if extra:
        raise ParseError("Unexpected field in %s" % what, extra[0])


@dataclass(frozen=True)
class AdapterRequest:
    """
    One call to an adapter. Which fields must be present depends on the role:

    - ``propose_boxes`` needs a region
    - ``segment`` needs boxes and missing objects
    - ``summarize`` needs the evidence chain
    """

    role: AdapterRole
    query: Query
    clues: tuple = ()
    region: object = None
    boxes: tuple = ()
    missing: tuple = ()
    chain: object = None

    def __post_init__(self):
        object.__setattr__(self, "role", AdapterRole(self.role))
        object.__setattr__(self, "clues", tuple(self.clues))
        object.__setattr__(self, "boxes", tuple(self.boxes))
        object.__setattr__(self, "missing", tuple(self.missing))

        step = self.role.value
        if not isinstance(self.query, Query):
            raise ProtocolError("Expected a Query. Got %s" % repr(self.query), step)
        if self.role == AdapterRole.PROPOSE_BOXES and self.region is None:
            raise ProtocolError("propose_boxes requests need a region", step)
        if self.role == AdapterRole.SEGMENT and not self.boxes:
            raise ProtocolError("segment requests need at least one box", step)
        if self.role == AdapterRole.SEGMENT and not self.missing:
            raise ProtocolError("segment requests need at least one missing object", step)
        if self.role == AdapterRole.SUMMARIZE and self.chain is None:
            raise ProtocolError("summarize requests need an evidence chain", step)

    def to_dict(self):
        d = {
            "role": self.role.value,
            "query": self.query.to_dict(),
            "clues": [c.to_dict() for c in self.clues],
            "boxes": [b.to_dict() for b in self.boxes],
            "missing": [m.to_dict() for m in self.missing],
        }
        if self.region is not None:
            d["region"] = self.region.to_dict()
        if self.chain is not None:
            d["chain"] = self.chain.to_dict()
        return d

    @classmethod
    def from_dict(cls, d, parent="request"):
        if not isinstance(d, dict):
            raise ParseError("Expected a JSON object", parent)
        _check_keys(d, REQUEST_FIELDS, parent)

        role = AdapterRole.parse(_require(d, "role", parent), _path(parent, "role"))
        query = Query.from_dict(_require(d, "query", parent), _path(parent, "query"))
        clues = [ContextClue.from_dict(c, _path(parent, "clues[%d]" % i))
                 for i, c in enumerate(_list(d, "clues", parent))]
        boxes = [BBox.from_dict(b, _path(parent, "boxes[%d]" % i))
                 for i, b in enumerate(_list(d, "boxes", parent))]
        missing = [MissingObject.from_dict(m, _path(parent, "missing[%d]" % i))
                   for i, m in enumerate(_list(d, "missing", parent))]
        region = Region.from_dict(d["region"], _path(parent, "region")) if "region" in d else None
        chain = EvidenceChain.from_dict(d["chain"], _path(parent, "chain")) if "chain" in d else None

        return cls(role=role, query=query, clues=clues, region=region, boxes=boxes,
                   missing=missing, chain=chain)


@dataclass(frozen=True)
class AdapterResponse:
    """
    Result of one adapter call. ``propose_region`` responses carry a
    region, ``segment`` responses a mask, ``switch`` and ``summarize``
    responses their text. ``propose_region`` may also return the boxes it
    found alongside the region.
    """

    role: AdapterRole
    raw_text: str = ""
    region: object = None
    boxes: tuple = ()
    mask: object = None
    latency_ms: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "role", AdapterRole(self.role))
        object.__setattr__(self, "boxes", tuple(self.boxes))

        step = self.role.value
        if not is_string(self.raw_text):
            raise ProtocolError("Expected string raw_text. Got %s" % repr(self.raw_text), step)
        if not is_positive_or_zero(self.latency_ms):
            raise ProtocolError("Expected non-negative latency_ms. Got %s" % repr(self.latency_ms), step)
        if self.role in (AdapterRole.SWITCH, AdapterRole.SUMMARIZE) and not self.raw_text.strip():
            raise ProtocolError("%s responses must set raw_text" % step, step)
        if self.role == AdapterRole.PROPOSE_REGION and self.region is None:
            raise ProtocolError("propose_region responses must set region", step)
        if self.role == AdapterRole.SEGMENT and self.mask is None:
            raise ProtocolError("segment responses must set mask", step)

    def with_latency(self, latency_ms):
        return replace(self, latency_ms=float(latency_ms))

    def to_dict(self):
        d = {
            "role": self.role.value,
            "raw_text": self.raw_text,
            "boxes": [b.to_dict() for b in self.boxes],
            "latency_ms": self.latency_ms,
        }
        if self.region is not None:
            d["region"] = self.region.to_dict()
        if self.mask is not None:
            d["mask"] = self.mask.to_dict()
        return d

    @classmethod
    def from_dict(cls, d, parent="response"):
        if not isinstance(d, dict):
            raise ParseError("Expected a JSON object", parent)
        _check_keys(d, RESPONSE_FIELDS, parent)

        role = AdapterRole.parse(_require(d, "role", parent), _path(parent, "role"))
        boxes = [BBox.from_dict(b, _path(parent, "boxes[%d]" % i))
                 for i, b in enumerate(_list(d, "boxes", parent, required=False))]
        region = Region.from_dict(d["region"], _path(parent, "region")) if "region" in d else None
        mask = Mask.from_dict(d["mask"], _path(parent, "mask")) if "mask" in d else None
        raw_text = _text(d, "raw_text", parent) if "raw_text" in d else ""
        latency_ms = _number(d, "latency_ms", parent) if "latency_ms" in d else 0.0

        try:
            return cls(role=role, raw_text=raw_text, region=region, boxes=boxes, mask=mask,
                       latency_ms=latency_ms)
        except ProtocolError as e:
            raise ParseError(e.message, parent)


# ------------ ** Region answer text ** ----------------

_BRACKETS = re.compile(r"\[([^\[\]]*)\]")


def format_region(region, decimals=4):
    """ Prints a region in the proposal answer format ``[w0, w1, h0, h1]``,
        i.e. left, right, top and bottom boundaries.

        >>> format_region(Region(0.25, 0.5, 0.1667, 0.5))
        '[0.2500, 0.5000, 0.1667, 0.5000]'
    """
    fmt = "%%.%df" % decimals
    return "[" + ", ".join(fmt % v for v in region.as_tuple()) + "]"


def parse_region_text(raw):
    """ Parses the first bracketed 4-tuple in an adapter answer as
        (left, right, top, bottom) normalized bounds.

        :param raw: Adapter answer, e.g. ``"[0.2, 0.8, 0.1, 0.5]"``
        :type raw: string
        :return: The region
        :rtype: Region
        :raises ParseError: if no bracketed list of four numbers is found
        :raises GeometryError: if right <= left, bottom <= top or a bound leaves [0, 1]
    """

    if not is_string(raw):
        raise ParseError("Expected region text. Got %s" % repr(raw), "raw_text")

    match = _BRACKETS.search(raw)
    if match is None:
        raise ParseError("No bracketed region in %s" % repr(raw), "raw_text")

    tokens = [t.strip() for t in match.group(1).split(",")]
    if len(tokens) != 4:
        raise ParseError("Expected 4 region bounds. Got %d in %s" % (len(tokens), repr(raw)), "raw_text")

    try:
        values = [float(t) for t in tokens]
    except ValueError:
        raise ParseError("Non-numeric region bound in %s" % repr(raw), "raw_text")

    left, right, top, bottom = values
    if right <= left or bottom <= top:
        raise GeometryError("Degenerate region %s: expected left < right and top < bottom" % repr(raw))

    return Region(left, right, top, bottom)


# ------------ ** Switch trigger text ** ----------------

_MISSING_PATTERN = re.compile(r"missing objects:\s*\[([^\]]*)\]", re.IGNORECASE)
_CONTEXT_PATTERN = re.compile(r"context:\s*(.*)$", re.IGNORECASE | re.DOTALL)


def format_trigger_text(missing, clues=()):
    """ Builds the switch refusal text that activates slow mode, e.g.

        ``Sorry, I can not answer. Missing objects: [glove]. Context: near home plate``

        The context sentence is left out when there are no clues. Several
        clues are joined with "; ".
    """

    labels = [m.label if isinstance(m, MissingObject) else str(m) for m in missing]
    texts = [c.text if isinstance(c, ContextClue) else str(c) for c in clues]

    text = "Sorry, I can not answer. Missing objects: [%s]." % ", ".join(labels)
    if texts:
        text += " Context: %s" % "; ".join(texts)
    return text


def parse_trigger_tail(text):
    """ Extracts missing objects and context clues from a switch refusal.

        :return: (missing, clues), or None when the text has no
            "Missing objects: [...]" tail
        :rtype: tuple of lists, or None
    """

    match = _MISSING_PATTERN.search(text)
    if match is None:
        return None

    missing = [MissingObject(label.strip()) for label in match.group(1).split(",") if label.strip()]

    clues = []
    tail = text[match.end():]
    context = _CONTEXT_PATTERN.search(tail)
    if context is not None:
        for part in context.group(1).split(";"):
            part = part.strip().rstrip(".").strip()
            if part:
                clues.append(ContextClue(part))

    return missing, clues
