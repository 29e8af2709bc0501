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
Rule-based implementation of every adapter role, driven by scene graphs.

The oracle answers from ground truth, so a pipeline run against it must
be exactly right. It understands three question forms:

- ``What <attribute> is the <label>?``
- ``Where is the <label>?``
- ``Is there a <label> in the image?``
"""

import re
import time
from collections import namedtuple

import numpy as np

from ..core import Mask, Region, mask_support_box
from ..data.scenes import DEFAULT_THRESHOLD, Visibility, check_threshold, classify_visibility
from ..utils import BackendError, UnsupportedQuestionError
from ..utils import get_logger, is_fraction
from .backends import Backend
from .protocol import AdapterResponse, AdapterRole, format_region, format_trigger_text

logger = get_logger(__name__)

REGION_PADDING = 0.1

OracleQuestion = namedtuple("OracleQuestion", ["kind", "label", "attribute"])

_QUESTION_PATTERNS = (
    ("attribute", re.compile(r"^\s*what\s+(?P<attribute>\w+)\s+is\s+the\s+(?P<label>.+?)\s*\??\s*$", re.IGNORECASE)),
    ("where", re.compile(r"^\s*where\s+is\s+the\s+(?P<label>.+?)\s*\??\s*$", re.IGNORECASE)),
    ("exists", re.compile(r"^\s*is\s+there\s+an?\s+(?P<label>.+?)(?:\s+in\s+the\s+image)?\s*\??\s*$", re.IGNORECASE)),
)


def parse_question(question):
    """ Splits a question into its kind, target label and attribute.

        :rtype: OracleQuestion
        :raises UnsupportedQuestionError: if the question is not in the oracle grammar
    """

    for kind, pattern in _QUESTION_PATTERNS:
        match = pattern.match(question)
        if match is not None:
            attribute = match.groupdict().get("attribute")
            return OracleQuestion(kind, match.group("label").strip().lower(),
                                  attribute.lower() if attribute else None)

    raise UnsupportedQuestionError("Question not in oracle grammar: %s" % repr(question))


def absent_answer(label):
    return "There is no %s in the image." % label


def answer_question(question, obj):
    """ Ground-truth answer to a parsed question, given the target object
        or None when it is absent.
    """

    if question.kind == "exists":
        return "yes" if obj is not None else "no"
    if obj is None:
        return absent_answer(question.label)
    if question.kind == "where":
        return obj.clue or "in the image"
    return obj.attributes.get(question.attribute, "unknown")


def oracle_switch(scene, query, threshold=DEFAULT_THRESHOLD):
    """ Switch adapter decision from ground truth.

        The direct answer is given when the target object is present and
        visible under ``threshold``. Otherwise the response is the trigger
        text listing the target as missing, with the object's clue as
        context when it has one.

        :param scene: Ground truth for the query image
        :type scene: SceneGraph
        :param query: The query
        :type query: Query
        :param threshold: Visibility threshold, one size or (width, height) in pixels
        :rtype: AdapterResponse
        :raises UnsupportedQuestionError: if the question is not in the oracle grammar
    """

    tw, th = check_threshold(threshold)
    question = parse_question(query.question)
    obj = scene.find(question.label)

    if obj is not None and classify_visibility(obj.bbox, tw, th) == Visibility.VISIBLE:
        return AdapterResponse(AdapterRole.SWITCH, raw_text=answer_question(question, obj))

    label = obj.label if obj is not None else question.label
    clues = [obj.clue] if obj is not None and obj.clue else []

    return AdapterResponse(AdapterRole.SWITCH, raw_text=format_trigger_text([label], clues))


def padded_region(boxes, padding=REGION_PADDING):
    """ Smallest normalized region holding the union of ``boxes`` grown by
        ``padding`` of the union's width and height on each side, clipped
        to the image.
    """

    union = boxes[0]
    for b in boxes[1:]:
        union = union.union(b)

    pad_x = padding * union.width
    pad_y = padding * union.height
    w, h = union.image_w, union.image_h

    return Region(max(0.0, union.x0 - pad_x) / w, min(float(w), union.x1 + pad_x) / w,
                  max(0.0, union.y0 - pad_y) / h, min(float(h), union.y1 + pad_y) / h)


class OracleBackend(Backend):
    """
    Answers every adapter role from scene graphs.

    :param scenes: Ground truth keyed by image_ref
    :type scenes: dict
    :param threshold: Visibility threshold, one size or (width, height) in pixels
    :param padding: Fraction of the evidence size added on each side of proposed regions
    :type padding: float
    :param delays: Optional simulated latency per role, in milliseconds
    :type delays: dict
    """

    name = "oracle"

    def __init__(self, scenes, threshold=DEFAULT_THRESHOLD, padding=REGION_PADDING, delays=None):
        self.scenes = dict(scenes)
        self.threshold = check_threshold(threshold)
        if not is_fraction(padding):
            raise BackendError("Expected region padding in [0, 1]. Got %s" % str(padding))
        self.padding = padding
        self.delays = {AdapterRole(k): float(v) for k, v in (delays or {}).items()}

    def _scene(self, query):
        try:
            return self.scenes[query.image_ref]
        except KeyError:
            raise BackendError("Unknown image %s" % repr(query.image_ref))

    def _targets(self, scene, request):
        """
        Scene objects named by the request's missing objects, falling back
        to the question's own target.
        """

        labels = [m.label for m in request.missing]
        if not labels:
            labels = [parse_question(request.query.question).label]

        targets = []
        for label in labels:
            obj = scene.find(label)
            if obj is not None and obj not in targets:
                targets.append(obj)
        return targets

    def _anchors(self, scene, clues, exclude):
        anchors = []
        for clue in clues:
            text = clue.text.lower()
            for obj in sorted(scene.objects, key=lambda o: (-len(o.label), o.label)):
                if obj in exclude or obj in anchors:
                    continue
                if re.search(r"\b%s\b" % re.escape(obj.label.lower()), text):
                    anchors.append(obj)
        return anchors

    def _call(self, request):
        delay = self.delays.get(request.role)
        if delay:
            time.sleep(delay / 1000.0)

        scene = self._scene(request.query)

        if request.role == AdapterRole.SWITCH:
            return oracle_switch(scene, request.query, self.threshold)
        if request.role == AdapterRole.PROPOSE_REGION:
            return self._propose_region(scene, request)
        if request.role == AdapterRole.PROPOSE_BOXES:
            return self._propose_boxes(scene, request)
        if request.role == AdapterRole.SEGMENT:
            return self._segment(scene, request)
        return self._summarize(scene, request)

    def _propose_region(self, scene, request):
        targets = self._targets(scene, request)
        anchors = self._anchors(scene, request.clues, targets)
        evidence = [o.bbox for o in anchors + targets]

        if not evidence:
            region = Region.full_frame()
        else:
            region = padded_region(evidence, self.padding)

        boxes = [o.bbox for o in targets if region.contains_box(o.bbox)]
        return AdapterResponse(AdapterRole.PROPOSE_REGION, raw_text=format_region(region),
                               region=region, boxes=boxes)

    def _propose_boxes(self, scene, request):
        boxes = [o.bbox for o in self._targets(scene, request) if request.region.contains_box(o.bbox)]
        return AdapterResponse(AdapterRole.PROPOSE_BOXES, boxes=boxes)

    def _segment(self, scene, request):
        raster = np.zeros((scene.image_h, scene.image_w), dtype=bool)
        allowed = np.zeros_like(raster)
        for b in request.boxes:
            allowed[b.y0:b.y1, b.x0:b.x1] = True

        for obj in self._targets(scene, request):
            b = obj.bbox
            raster[b.y0:b.y1, b.x0:b.x1] = True

        return AdapterResponse(AdapterRole.SEGMENT, mask=Mask.from_array(raster & allowed))

    def _summarize(self, scene, request):
        question = parse_question(request.query.question)
        chain = request.chain

        if request.boxes:
            evidence = list(request.boxes)
        elif chain.mask is not None:
            support = mask_support_box(chain.mask)
            evidence = [support] if support is not None else []
        else:
            evidence = []

        target = scene.find(question.label)
        if target is not None and target.bbox not in evidence:
            target = None

        return AdapterResponse(AdapterRole.SUMMARIZE, raw_text=answer_question(question, target))
