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
Domain types shared by every fastswitch module.

All types are frozen dataclasses and validate themselves on construction,
so a constructed value always satisfies its invariants. Each type has a
canonical JSON form (``to_dict`` / ``from_dict``) reused verbatim by the
adapter wire protocol and the trace files. Optional fields that are
absent are omitted from the JSON form, never written as null.
"""

import enum
from dataclasses import dataclass, field

import numpy as np

from ..utils import InputError, GeometryError, ParseError
from ..utils import is_numeric, is_non_empty_string, is_string, is_dict, is_array_like
from ..utils import is_positive_integer, is_positive_integer_or_zero, is_positive_or_zero
from .rle import rle_encode, rle_decode, rle_count, canonical_rle


class Mode(str, enum.Enum):
    FAST = "fast"
    SLOW = "slow"
    FAILED = "failed"

    @classmethod
    def parse(cls, value, path="mode"):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ParseError("Unknown mode. Got %s" % str(value), path)


# ------------ ** JSON field helpers ** ----------------

def _path(parent, name):
    if not parent:
        return name
    return "%s.%s" % (parent, name)


def _require(d, name, parent=""):
    if not is_dict(d):
        raise ParseError("Expected a JSON object. Got %s" % type(d).__name__, parent or None)
    if name not in d:
        raise ParseError("Missing required field", _path(parent, name))
    return d[name]


def _number(d, name, parent=""):
    value = _require(d, name, parent)
    if not is_numeric(value):
        raise ParseError("Expected a number. Got %s" % repr(value), _path(parent, name))
    return value


def _integer(d, name, parent=""):
    value = _require(d, name, parent)
    if not is_positive_integer_or_zero(value):
        raise ParseError("Expected a non-negative integer. Got %s" % repr(value), _path(parent, name))
    return int(value)


def _text(d, name, parent=""):
    value = _require(d, name, parent)
    if not is_string(value):
        raise ParseError("Expected a string. Got %s" % repr(value), _path(parent, name))
    return value


def _list(d, name, parent="", required=True):
    if not required and (not is_dict(d) or name not in d):
        return []
    value = _require(d, name, parent)
    if not isinstance(value, list):
        raise ParseError("Expected a list. Got %s" % repr(value), _path(parent, name))
    return value


def _construct(cls, parent, **kwargs):
    # Re-raise invariant violations as parse errors so callers see the field
    try:
        return cls(**kwargs)
    except ParseError:
        raise
    except InputError as e:
        raise ParseError(str(e), parent or cls.__name__)


# ------------ ** Types ** ----------------

@dataclass(frozen=True)
class Query:
    """
    An image reference plus a question about it.

    :param image_ref: Opaque identifier of the image resource
    :type image_ref: string
    :param question: Question text
    :type question: string
    :param query_id: Identifier, unique within a batch
    :type query_id: string
    """

    image_ref: str
    question: str
    query_id: str

    def __post_init__(self):
        if not is_string(self.image_ref):
            raise InputError("Expected string for variable 'image_ref'. Got %s" % str(self.image_ref))
        if not is_non_empty_string(self.question):
            raise InputError("Expected non-empty string for variable 'question'. Got %s" % repr(self.question))
        if not is_non_empty_string(self.query_id):
            raise InputError("Expected non-empty string for variable 'query_id'. Got %s" % repr(self.query_id))

    def to_dict(self):
        return {"image_ref": self.image_ref, "question": self.question, "query_id": self.query_id}

    @classmethod
    def from_dict(cls, d, parent=""):
        return _construct(cls, parent,
                          image_ref=_text(d, "image_ref", parent),
                          question=_text(d, "question", parent),
                          query_id=_text(d, "query_id", parent))


@dataclass(frozen=True)
class Region:
    """
    Normalized search region. ``left``/``right`` bound the x axis and
    ``top``/``bottom`` the y axis, all in [0, 1].
    """

    left: float
    right: float
    top: float
    bottom: float

    def __post_init__(self):
        for name in ("left", "right", "top", "bottom"):
            value = getattr(self, name)
            if not is_numeric(value):
                raise GeometryError("Expected number for region '%s'. Got %s" % (name, repr(value)))
            object.__setattr__(self, name, float(value))

        if not (0.0 <= self.left < self.right <= 1.0):
            raise GeometryError("Expected 0 <= left < right <= 1. Got left=%s, right=%s" % (self.left, self.right))
        if not (0.0 <= self.top < self.bottom <= 1.0):
            raise GeometryError("Expected 0 <= top < bottom <= 1. Got top=%s, bottom=%s" % (self.top, self.bottom))

    @property
    def width(self):
        return self.right - self.left

    @property
    def height(self):
        return self.bottom - self.top

    def as_tuple(self):
        return (self.left, self.right, self.top, self.bottom)

    def contains_box(self, box, tol=1e-9):
        """
        True if ``box`` lies inside this region once normalized by its image size.
        """
        other = box.normalized()
        return (other.left >= self.left - tol and other.right <= self.right + tol
                and other.top >= self.top - tol and other.bottom <= self.bottom + tol)

    @classmethod
    def full_frame(cls):
        return cls(0.0, 1.0, 0.0, 1.0)

    def to_dict(self):
        return {"left": self.left, "right": self.right, "top": self.top, "bottom": self.bottom}

    @classmethod
    def from_dict(cls, d, parent=""):
        return _construct(cls, parent,
                          left=_number(d, "left", parent),
                          right=_number(d, "right", parent),
                          top=_number(d, "top", parent),
                          bottom=_number(d, "bottom", parent))


@dataclass(frozen=True)
class BBox:
    """
    Pixel-space bounding box with exclusive upper corner, carrying the size
    of the image it lives in.
    """

    x0: int
    y0: int
    x1: int
    y1: int
    image_w: int
    image_h: int

    def __post_init__(self):
        for name in ("image_w", "image_h"):
            if not is_positive_integer(getattr(self, name)):
                raise GeometryError("Expected positive integer for '%s'. Got %s" % (name, repr(getattr(self, name))))
            object.__setattr__(self, name, int(getattr(self, name)))
        for name in ("x0", "y0", "x1", "y1"):
            if not is_positive_integer_or_zero(getattr(self, name)):
                raise GeometryError("Expected non-negative integer for '%s'. Got %s" % (name, repr(getattr(self, name))))
            object.__setattr__(self, name, int(getattr(self, name)))

        # Degenerate boxes are rejected, never clamped
        if not (0 <= self.x0 < self.x1 <= self.image_w):
            raise GeometryError("Expected 0 <= x0 < x1 <= image_w. Got x0=%d, x1=%d, image_w=%d"
                                % (self.x0, self.x1, self.image_w))
        if not (0 <= self.y0 < self.y1 <= self.image_h):
            raise GeometryError("Expected 0 <= y0 < y1 <= image_h. Got y0=%d, y1=%d, image_h=%d"
                                % (self.y0, self.y1, self.image_h))

    @property
    def width(self):
        return self.x1 - self.x0

    @property
    def height(self):
        return self.y1 - self.y0

    @property
    def area(self):
        return self.width * self.height

    @property
    def center(self):
        return (0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))

    def normalized(self):
        return Region(self.x0 / self.image_w, self.x1 / self.image_w,
                      self.y0 / self.image_h, self.y1 / self.image_h)

    def union(self, other):
        return BBox(min(self.x0, other.x0), min(self.y0, other.y0),
                    max(self.x1, other.x1), max(self.y1, other.y1),
                    self.image_w, self.image_h)

    def to_dict(self):
        return {"x0": self.x0, "y0": self.y0, "x1": self.x1, "y1": self.y1,
                "image_w": self.image_w, "image_h": self.image_h}

    @classmethod
    def from_dict(cls, d, parent=""):
        return _construct(cls, parent,
                          x0=_integer(d, "x0", parent),
                          y0=_integer(d, "y0", parent),
                          x1=_integer(d, "x1", parent),
                          y1=_integer(d, "y1", parent),
                          image_w=_integer(d, "image_w", parent),
                          image_h=_integer(d, "image_h", parent))


@dataclass(frozen=True)
class Mask:
    """
    Binary raster stored as uncompressed row-major run counts. The first
    run counts zeros.
    """

    width: int
    height: int
    rle: tuple

    def __post_init__(self):
        if not is_positive_integer(self.width) or not is_positive_integer(self.height):
            raise GeometryError("Expected positive integer mask size. Got %s x %s" % (repr(self.width), repr(self.height)))
        if not is_array_like(self.rle) or len(self.rle) == 0:
            raise GeometryError("Expected a non-empty list of run counts. Got %s" % repr(self.rle))

        runs = list(self.rle)
        for r in runs:
            if not is_positive_integer_or_zero(r):
                raise GeometryError("Expected non-negative integer run counts. Got %s" % repr(r))
        for i in range(1, len(runs)):
            if runs[i] == 0 and runs[i - 1] == 0:
                raise GeometryError("Two consecutive zero-length runs at position %d" % i)
        if sum(runs) != self.width * self.height:
            raise GeometryError("Run counts sum to %d, expected %d x %d = %d"
                                % (sum(runs), self.width, self.height, self.width * self.height))

        object.__setattr__(self, "width", int(self.width))
        object.__setattr__(self, "height", int(self.height))
        object.__setattr__(self, "rle", tuple(canonical_rle(runs)))

    @property
    def count(self):
        """
        Number of set pixels.
        """
        return rle_count(self.rle)

    def to_array(self):
        return rle_decode(self.rle, self.width, self.height)

    @classmethod
    def from_array(cls, array):
        array = np.asarray(array, dtype=bool)
        if array.ndim != 2:
            raise GeometryError("Expected a 2d raster. Got %d dimensions" % array.ndim)
        height, width = array.shape
        return cls(width, height, tuple(rle_encode(array)))

    @classmethod
    def empty(cls, width, height):
        return cls(width, height, (width * height,))

    def to_dict(self):
        return {"width": self.width, "height": self.height, "rle": list(self.rle)}

    @classmethod
    def from_dict(cls, d, parent=""):
        runs = _list(d, "rle", parent)
        for i, r in enumerate(runs):
            if not is_positive_integer_or_zero(r):
                raise ParseError("Expected a non-negative integer. Got %s" % repr(r), _path(parent, "rle[%d]" % i))
        return _construct(cls, parent,
                          width=_integer(d, "width", parent),
                          height=_integer(d, "height", parent),
                          rle=tuple(runs))


@dataclass(frozen=True)
class ContextClue:
    text: str

    def __post_init__(self):
        if not is_non_empty_string(self.text):
            raise InputError("Expected non-empty clue text. Got %s" % repr(self.text))

    def to_dict(self):
        return {"text": self.text}

    @classmethod
    def from_dict(cls, d, parent=""):
        return _construct(cls, parent, text=_text(d, "text", parent))


@dataclass(frozen=True)
class MissingObject:
    label: str

    def __post_init__(self):
        if not is_non_empty_string(self.label):
            raise InputError("Expected non-empty object label. Got %s" % repr(self.label))

    def to_dict(self):
        return {"label": self.label}

    @classmethod
    def from_dict(cls, d, parent=""):
        return _construct(cls, parent, label=_text(d, "label", parent))


@dataclass(frozen=True)
class EvidenceChain:
    """
    Artifacts accumulated along the slow path: context clues, then a
    region, then boxes, then a mask. A mask needs boxes and boxes need a
    region.
    """

    clues: tuple = ()
    region: object = None
    boxes: tuple = ()
    missing: tuple = ()
    mask: object = None

    def __post_init__(self):
        object.__setattr__(self, "clues", tuple(self.clues))
        object.__setattr__(self, "boxes", tuple(self.boxes))
        object.__setattr__(self, "missing", tuple(self.missing))

        if not all(isinstance(c, ContextClue) for c in self.clues):
            raise InputError("Expected ContextClue items in 'clues'. Got %s" % repr(self.clues))
        if not all(isinstance(b, BBox) for b in self.boxes):
            raise InputError("Expected BBox items in 'boxes'. Got %s" % repr(self.boxes))
        if not all(isinstance(m, MissingObject) for m in self.missing):
            raise InputError("Expected MissingObject items in 'missing'. Got %s" % repr(self.missing))
        if self.region is not None and not isinstance(self.region, Region):
            raise InputError("Expected Region for 'region'. Got %s" % repr(self.region))
        if self.mask is not None and not isinstance(self.mask, Mask):
            raise InputError("Expected Mask for 'mask'. Got %s" % repr(self.mask))

        if self.mask is not None and not self.boxes:
            raise InputError("An evidence chain with a mask must also hold boxes")
        if self.boxes and self.region is None:
            raise InputError("An evidence chain with boxes must also hold a region")

    @property
    def is_empty(self):
        return not (self.clues or self.boxes or self.missing) and self.region is None and self.mask is None

    def to_dict(self):
        d = {
            "clues": [c.to_dict() for c in self.clues],
            "boxes": [b.to_dict() for b in self.boxes],
            "missing": [m.to_dict() for m in self.missing],
        }
        if self.region is not None:
            d["region"] = self.region.to_dict()
        if self.mask is not None:
            d["mask"] = self.mask.to_dict()
        return d

    @classmethod
    def from_dict(cls, d, parent=""):
        clues = [ContextClue.from_dict(c, _path(parent, "clues[%d]" % i))
                 for i, c in enumerate(_list(d, "clues", parent))]
        boxes = [BBox.from_dict(b, _path(parent, "boxes[%d]" % i))
                 for i, b in enumerate(_list(d, "boxes", parent))]
        missing = [MissingObject.from_dict(m, _path(parent, "missing[%d]" % i))
                   for i, m in enumerate(_list(d, "missing", parent))]

        region = None
        if "region" in d:
            region = Region.from_dict(d["region"], _path(parent, "region"))
        mask = None
        if "mask" in d:
            mask = Mask.from_dict(d["mask"], _path(parent, "mask"))

        return _construct(cls, parent, clues=clues, region=region, boxes=boxes, missing=missing, mask=mask)


@dataclass(frozen=True)
class FinalAnswer:
    """
    Result of one query. ``chain`` is present exactly when ``mode`` is slow.
    ``flags`` lists notable events such as ``degraded_slow`` or
    ``empty_proposal``.
    """

    text: str
    mode: Mode
    chain: object = None
    latency_ms: float = 0.0
    flags: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode.parse(self.mode))
        object.__setattr__(self, "flags", tuple(self.flags))

        if not is_string(self.text):
            raise InputError("Expected string answer text. Got %s" % repr(self.text))
        if self.mode == Mode.FAILED:
            raise InputError("A final answer is either fast or slow")
        if (self.mode == Mode.SLOW) != (self.chain is not None):
            raise InputError("Expected an evidence chain exactly when mode is slow. Got mode=%s, chain=%s"
                             % (self.mode.value, self.chain is not None))
        if not is_positive_or_zero(self.latency_ms):
            raise InputError("Expected non-negative latency. Got %s" % repr(self.latency_ms))

    def to_dict(self):
        d = {"text": self.text, "mode": self.mode.value, "latency_ms": self.latency_ms}
        if self.chain is not None:
            d["chain"] = self.chain.to_dict()
        if self.flags:
            d["flags"] = list(self.flags)
        return d

    @classmethod
    def from_dict(cls, d, parent=""):
        chain = None
        if "chain" in d:
            chain = EvidenceChain.from_dict(d["chain"], _path(parent, "chain"))
        return _construct(cls, parent,
                          text=_text(d, "text", parent),
                          mode=Mode.parse(_require(d, "mode", parent), _path(parent, "mode")),
                          chain=chain,
                          latency_ms=_number(d, "latency_ms", parent),
                          flags=[str(f) for f in _list(d, "flags", parent, required=False)])
