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
Switching dataset construction.

Negative triples teach the switch adapter to refuse: questions about
objects that are absent from the image or too small to be perceived,
answered with the trigger phrase, the missing objects and a context
clue. Proposal records teach region proposal in the ``[w0, w1, h0, h1]``
answer format.
"""

import enum
import os
from dataclasses import dataclass

import numpy as np

from ..adapters.protocol import TRIGGER_PHRASE, format_region, format_trigger_text
from ..core import ContextClue, MissingObject
from ..core.types import _construct, _list, _path, _text
from ..core.serialization import read_json, write_jsonl, read_jsonl
from ..utils import InputError, ConfigError, ParseError
from ..utils import get_logger, is_dict, is_non_empty_string, is_positive_integer_or_zero
from .scenes import DEFAULT_THRESHOLD, Visibility, check_threshold, classify_visibility

logger = get_logger(__name__)

DEFAULT_TEMPLATES = os.path.join(os.path.dirname(os.path.abspath(__file__)), "templates", "default.json")

OBJECT_SLOT = "[OBJ]"
ATTRIBUTE_SLOT = "[ATTR]"
QUESTION_SLOT = "[Q]"
CLUE_SLOT = "[C]"


class Negativity(str, enum.Enum):
    ABSENT = "absent"
    INVISIBLE = "invisible"
    POSITIVE = "positive"


def load_templates(path=None):
    """ Reads question templates. The file is a JSON object with template
        lists ``absent``, ``invisible``, ``positive`` and
        ``proposal_questions`` using the ``[OBJ]`` (and ``[ATTR]``) slots,
        and a ``proposal_prompt`` string with ``[Q]`` and ``[C]`` slots.

        :param path: Template file. Defaults to the packaged templates.
        :rtype: dict
        :raises ConfigError: if the negative templates or the prompt are missing
    """

    templates = read_json(path or DEFAULT_TEMPLATES)

    if not is_dict(templates):
        raise ConfigError("Expected a JSON object of templates in %s" % (path or DEFAULT_TEMPLATES))

    for key in ("absent", "invisible"):
        values = templates.get(key)
        if not isinstance(values, list) or not values or not all(is_non_empty_string(v) for v in values):
            raise ConfigError("Expected a non-empty list of '%s' question templates" % key)
        if not all(OBJECT_SLOT in v for v in values):
            raise ConfigError("Every '%s' template needs the %s slot" % (key, OBJECT_SLOT))

    prompt = templates.get("proposal_prompt", "")
    if prompt and (QUESTION_SLOT not in prompt or CLUE_SLOT not in prompt):
        raise ConfigError("The proposal prompt needs both %s and %s slots" % (QUESTION_SLOT, CLUE_SLOT))

    return templates


@dataclass(frozen=True)
class TripleRecord:
    """
    One (image, question, answer) training triple. Negative triples carry
    the objects that could not be found and answer with the trigger text.
    """

    image_ref: str
    question: str
    answer: str
    negativity: Negativity
    missing: tuple = ()
    clue: object = None

    def __post_init__(self):
        object.__setattr__(self, "negativity", Negativity(self.negativity))
        object.__setattr__(self, "missing", tuple(self.missing))

        if not is_non_empty_string(self.question) or not is_non_empty_string(self.answer):
            raise InputError("Expected non-empty question and answer for image %s" % repr(self.image_ref))
        if self.clue is not None and not isinstance(self.clue, ContextClue):
            raise InputError("Expected ContextClue or None. Got %s" % repr(self.clue))

        if self.negativity != Negativity.POSITIVE:
            if not self.missing:
                raise InputError("Negative triple for image %s lists no missing objects" % self.image_ref)
            if TRIGGER_PHRASE not in self.answer.lower():
                raise InputError("Negative triple answer lacks the trigger phrase: %s" % repr(self.answer))

    @property
    def label(self):
        return self.missing[0].label if self.missing else ""

    def to_dict(self):
        d = {"image_ref": self.image_ref, "question": self.question, "answer": self.answer,
             "negativity": self.negativity.value, "missing": [m.to_dict() for m in self.missing]}
        if self.clue is not None:
            d["clue"] = self.clue.to_dict()
        return d

    @classmethod
    def from_dict(cls, d, parent=""):
        clue = d.get("clue") if is_dict(d) else None
        try:
            negativity = Negativity(d.get("negativity") if is_dict(d) else None)
        except ValueError:
            raise ParseError("Expected absent, invisible or positive", _path(parent, "negativity"))
        return _construct(cls, parent,
                          image_ref=_text(d, "image_ref", parent),
                          question=_text(d, "question", parent),
                          answer=_text(d, "answer", parent),
                          negativity=negativity,
                          missing=[MissingObject.from_dict(m, _path(parent, "missing[%d]" % i))
                                   for i, m in enumerate(_list(d, "missing", parent, required=False))],
                          clue=ContextClue.from_dict(clue, _path(parent, "clue")) if clue is not None else None)


def _fill(template, label, attribute=None):
    text = template.replace(OBJECT_SLOT, label)
    if attribute is not None:
        text = text.replace(ATTRIBUTE_SLOT, attribute)
    return text


def nearest_visible_clue(scene, obj, threshold=DEFAULT_THRESHOLD):
    """
    "near the <label>" for the visible object closest to ``obj``, or None.
    """
    anchor = scene.nearest_object(obj, scene.visible_objects(threshold))
    if anchor is None:
        return None
    return ContextClue("near the %s" % anchor.label)


def _negative(image_ref, question, label, negativity, clue):
    missing = [MissingObject(label)]
    answer = format_trigger_text(missing, [clue] if clue is not None else [])
    return TripleRecord(image_ref, question, answer, negativity, missing, clue)


def build_negative_triples(ann, vocab, templates, threshold=DEFAULT_THRESHOLD, seed=0, n_absent=1,
                           include_positive=False):
    """ Builds the switching-friendly negative dataset.

        For every image, ``n_absent`` labels are sampled from the
        vocabulary labels not present in the image and each yields an
        Absent triple without a clue. Every object classified invisible
        under ``threshold`` yields an Invisible triple whose clue names the
        nearest visible object ("near the <label>").

        :param ann: Annotated images
        :type ann: AnnotationSet
        :param vocab: Object labels to draw absent objects from
        :type vocab: list of strings
        :param templates: Templates as returned by :func:`load_templates`
        :type templates: dict
        :param threshold: Visibility threshold, one size or (width, height) in pixels
        :param seed: Seed for label and template sampling
        :type seed: integer
        :param n_absent: Absent labels per image, None for all of them
        :type n_absent: integer
        :param include_positive: Also emit Positive triples for visible
            objects with attributes
        :type include_positive: boolean
        :return: Triples sorted by image_ref, then label
        :rtype: list of TripleRecord
    """

    vocab = sorted(set(v.strip() for v in vocab if is_non_empty_string(v)))
    if not vocab:
        raise InputError("Expected a non-empty vocabulary")
    if n_absent is not None and not is_positive_integer_or_zero(n_absent):
        raise ConfigError("Expected non-negative integer for 'n_absent'. Got %s" % str(n_absent))

    tw, th = check_threshold(threshold)
    random_state = np.random.RandomState(seed)
    triples = []

    def pick(kind):
        options = templates[kind]
        return options[random_state.randint(len(options))]

    for scene in ann:
        present = set(label.lower() for label in scene.labels)
        absent = [v for v in vocab if v.lower() not in present]

        if n_absent is not None and len(absent) > n_absent:
            chosen = random_state.choice(len(absent), n_absent, replace=False)
            absent = [absent[i] for i in sorted(chosen)]

        for label in absent:
            triples.append(_negative(scene.image_ref, _fill(pick("absent"), label), label, Negativity.ABSENT, None))

        for obj in scene.objects:
            visibility = classify_visibility(obj.bbox, tw, th)

            if visibility == Visibility.INVISIBLE:
                clue = nearest_visible_clue(scene, obj, (tw, th))
                if clue is None:
                    logger.warning("Image %s has no visible object to anchor a clue for '%s'",
                                   scene.image_ref, obj.label)
                triples.append(_negative(scene.image_ref, _fill(pick("invisible"), obj.label), obj.label,
                                         Negativity.INVISIBLE, clue))

            elif include_positive and obj.attributes and templates.get("positive"):
                attribute = sorted(obj.attributes)[0]
                question = _fill(pick("positive"), obj.label, attribute)
                triples.append(TripleRecord(scene.image_ref, question, obj.attributes[attribute],
                                            Negativity.POSITIVE))

    triples.sort(key=lambda t: (t.image_ref, t.label.lower(), t.negativity.value))

    logger.info("Built %d triples from %d images", len(triples), len(ann))
    return triples


@dataclass(frozen=True)
class ProposalRecord:
    prompt: str
    answer: str
    image_ref: str

    def to_dict(self):
        return {"prompt": self.prompt, "answer": self.answer, "image_ref": self.image_ref}

    @classmethod
    def from_dict(cls, d, parent=""):
        return _construct(cls, parent, prompt=_text(d, "prompt", parent), answer=_text(d, "answer", parent),
                          image_ref=_text(d, "image_ref", parent))


def build_proposal_records(ann, templates, threshold=DEFAULT_THRESHOLD):
    """ One region proposal record per annotated object.

        The prompt is the proposal template with the question slot filled
        from the first proposal question and the clue slot filled with the
        object's own clue or, failing that, its nearest visible object.
        The answer is the object's normalized box printed with 4 decimals.

        :rtype: list of ProposalRecord
    """

    prompt = templates.get("proposal_prompt")
    questions = templates.get("proposal_questions")
    if not prompt or not questions:
        raise ConfigError("Templates need 'proposal_prompt' and 'proposal_questions' to build proposals")

    records = []
    for scene in ann:
        for obj in sorted(scene.objects, key=lambda o: o.label):
            if obj.clue:
                clue = obj.clue
            else:
                nearest = nearest_visible_clue(scene, obj, threshold)
                clue = nearest.text if nearest is not None else ""

            question = _fill(questions[0], obj.label)
            text = prompt.replace(QUESTION_SLOT, question).replace(CLUE_SLOT, clue)
            records.append(ProposalRecord(text, format_region(obj.bbox.normalized()), scene.image_ref))

    return records


def write_triples(path_or_file, triples):
    write_jsonl(path_or_file, [t.to_dict() for t in triples])


def read_triples(path):
    return [TripleRecord.from_dict(d, "%s:%d" % (path, i + 1)) for i, d in enumerate(read_jsonl(path))]


def write_proposals(path_or_file, records):
    write_jsonl(path_or_file, [r.to_dict() for r in records])
