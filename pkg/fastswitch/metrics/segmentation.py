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
Segmentation metrics over predicted/gold mask pairs.

``ciou`` divides the cumulative intersection by the cumulative union over
the whole dataset, which favours large objects. ``giou`` is the mean of
the per-image IoU. Both are reported together.
"""

import os
from dataclasses import dataclass

import numpy as np

from ..core import Mask
from ..core.serialization import read_json
from ..utils import StructureError, UndefinedMetricError, ParseError
from ..utils import is_dict, is_string


@dataclass(frozen=True)
class MaskPair:
    predicted: Mask
    gold: Mask
    image_ref: str = ""

    def __post_init__(self):
        if (self.predicted.width, self.predicted.height) != (self.gold.width, self.gold.height):
            raise StructureError("Mask size mismatch for image %s: predicted %dx%d, gold %dx%d"
                                 % (repr(self.image_ref), self.predicted.width, self.predicted.height,
                                    self.gold.width, self.gold.height))


def iou_counts(pair):
    """ Pixel counts of the intersection and union of a mask pair.

        :rtype: tuple of integers
    """

    predicted = pair.predicted.to_array()
    gold = pair.gold.to_array()

    if predicted.shape != gold.shape:
        raise StructureError("Mask size mismatch for image %s" % repr(pair.image_ref))

    return int(np.count_nonzero(predicted & gold)), int(np.count_nonzero(predicted | gold))


def _counts(pairs):
    pairs = list(pairs)
    if not pairs:
        raise UndefinedMetricError("IoU is undefined for an empty set of mask pairs")
    return np.array([iou_counts(p) for p in pairs], dtype=np.int64).reshape(-1, 2)


def _iou(intersection, union):
    if union == 0:
        return 1.0
    return intersection / union


def ciou(pairs):
    """ Cumulative intersection over cumulative union. 1 when every mask
        is empty.

        :param pairs: Predicted/gold mask pairs
        :type pairs: list of MaskPair
        :rtype: float
        :raises StructureError: if a pair's masks differ in size
        :raises UndefinedMetricError: for an empty list
    """
    counts = _counts(pairs)
    return _iou(int(counts[:, 0].sum()), int(counts[:, 1].sum()))


def per_image_iou(pairs):
    return [_iou(int(i), int(u)) for i, u in _counts(pairs)]


def giou(pairs):
    """ Mean of the per-image IoU, where an image whose masks are both
        empty has IoU 1.

        :rtype: float
    """
    values = per_image_iou(pairs)
    return sum(values) / len(values)


def segmentation_report(pairs):
    pairs = list(pairs)
    counts = _counts(pairs)
    per_image = [{"image_ref": p.image_ref, "intersection": int(i), "union": int(u), "iou": _iou(int(i), int(u))}
                 for p, (i, u) in zip(pairs, counts)]
    return {"ciou": _iou(int(counts[:, 0].sum()), int(counts[:, 1].sum())),
            "giou": sum(row["iou"] for row in per_image) / len(per_image),
            "intersection": int(counts[:, 0].sum()),
            "union": int(counts[:, 1].sum()),
            "per_image": per_image}


def _read_mask(path, base, field):
    if not is_string(path):
        raise ParseError("Expected a mask file path", field)
    if not os.path.isabs(path):
        path = os.path.join(base, path)
    return Mask.from_dict(read_json(path), path)


def load_mask_pairs(path):
    """ Reads a mask-pair manifest: a JSON list (or an object with a
        ``pairs`` list) of ``{image_ref, predicted, gold}`` entries whose
        mask paths hold Mask documents, relative to the manifest.

        :rtype: list of MaskPair
    """

    doc = read_json(path)
    if is_dict(doc):
        doc = doc.get("pairs")
    if not isinstance(doc, list):
        raise ParseError("Expected a list of mask pairs", "pairs")

    base = os.path.dirname(os.path.abspath(path))
    pairs = []
    for i, entry in enumerate(doc):
        field = "pairs[%d]" % i
        if not is_dict(entry):
            raise ParseError("Expected an object", field)
        pairs.append(MaskPair(_read_mask(entry.get("predicted"), base, field + ".predicted"),
                              _read_mask(entry.get("gold"), base, field + ".gold"),
                              str(entry.get("image_ref", ""))))
    return pairs
