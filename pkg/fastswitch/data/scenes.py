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
Object-annotated images: scene graphs for the oracle backend and
annotation sets for the dataset builder, plus the visibility rule they
share.
"""

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from ..core import BBox
from ..core.types import _construct, _integer, _list, _path, _require, _text
from ..core.serialization import read_json
from ..utils import InputError, ConfigError, ParseError, GeometryError
from ..utils import is_positive, is_dict, is_string, is_non_empty_string

DEFAULT_THRESHOLD = (20, 20)


class Visibility(str, enum.Enum):
    VISIBLE = "visible"
    INVISIBLE = "invisible"


def check_threshold(threshold):
    """ Normalizes a visibility threshold to a ``(width, height)`` pair.

        :param threshold: A single pixel size or a (width, height) pair
        :raises ConfigError: for non-positive values
    """

    if isinstance(threshold, (tuple, list)):
        if len(threshold) != 2:
            raise ConfigError("Expected threshold as (width, height). Got %s" % str(threshold))
        tw, th = threshold
    else:
        tw = th = threshold

    if not is_positive(tw) or not is_positive(th):
        raise ConfigError("Expected positive visibility thresholds. Got %s x %s" % (str(tw), str(th)))

    return tw, th


def classify_visibility(box, threshold_w=DEFAULT_THRESHOLD[0], threshold_h=DEFAULT_THRESHOLD[1]):
    """ An object is too small to perceive when both of its box dimensions
        fall strictly below the threshold.

        :param box: Object bounding box
        :type box: BBox
        :param threshold_w: Width threshold in pixels
        :param threshold_h: Height threshold in pixels
        :rtype: Visibility
        :raises ConfigError: for non-positive thresholds
    """

    tw, th = check_threshold((threshold_w, threshold_h))

    if box.width < tw and box.height < th:
        return Visibility.INVISIBLE
    return Visibility.VISIBLE


@dataclass(frozen=True)
class SceneObject:
    """
    An annotated object. ``clue`` is free text describing where the
    object can be found, used by the oracle switch and region proposals.
    """

    label: str
    bbox: BBox
    attributes: dict = field(default_factory=dict)
    clue: str = ""

    def __post_init__(self):
        if not is_non_empty_string(self.label):
            raise InputError("Expected non-empty object label. Got %s" % repr(self.label))
        if not isinstance(self.bbox, BBox):
            raise InputError("Expected BBox for object '%s'. Got %s" % (self.label, repr(self.bbox)))
        if not is_dict(self.attributes) or not all(is_string(k) and is_string(v) for k, v in self.attributes.items()):
            raise InputError("Expected text to text attributes for object '%s'" % self.label)
        if not is_string(self.clue):
            raise InputError("Expected string clue for object '%s'" % self.label)

    def to_dict(self):
        d = {"label": self.label, "bbox": self.bbox.to_dict(), "attributes": dict(self.attributes)}
        if self.clue:
            d["clue"] = self.clue
        return d

    @classmethod
    def from_dict(cls, d, image_w, image_h, parent=""):
        bbox_d = _require(d, "bbox", parent)
        if is_dict(bbox_d):
            # image size may be left to the enclosing document
            bbox_d = dict(bbox_d)
            bbox_d.setdefault("image_w", image_w)
            bbox_d.setdefault("image_h", image_h)
        bbox = BBox.from_dict(bbox_d, _path(parent, "bbox"))

        attributes = d.get("attributes", {})
        if not is_dict(attributes):
            raise ParseError("Expected an object", _path(parent, "attributes"))

        clue = d.get("clue", "")
        return _construct(cls, parent, label=_text(d, "label", parent), bbox=bbox,
                          attributes={str(k): str(v) for k, v in attributes.items()}, clue=clue)


@dataclass(frozen=True)
class SceneGraph:
    """
    Ground truth for one image: its size and the objects in it. Labels are
    unique within a scene and every box lies within the image.
    """

    image_w: int
    image_h: int
    objects: tuple = ()
    image_ref: str = ""

    def __post_init__(self):
        object.__setattr__(self, "objects", tuple(self.objects))

        labels = set()
        for obj in self.objects:
            if (obj.bbox.image_w, obj.bbox.image_h) != (self.image_w, self.image_h):
                raise GeometryError("Object '%s' belongs to a %dx%d image, scene is %dx%d"
                                    % (obj.label, obj.bbox.image_w, obj.bbox.image_h, self.image_w, self.image_h))
            if obj.label in labels:
                raise InputError("Duplicate label '%s' in scene %s" % (obj.label, self.image_ref))
            labels.add(obj.label)

    @property
    def labels(self):
        return [obj.label for obj in self.objects]

    def find(self, label):
        """
        Object with the given label (case-insensitive), or None.
        """
        label = label.strip().lower()
        for obj in self.objects:
            if obj.label.lower() == label:
                return obj
        return None

    def visible_objects(self, threshold=DEFAULT_THRESHOLD):
        tw, th = check_threshold(threshold)
        return [o for o in self.objects if classify_visibility(o.bbox, tw, th) == Visibility.VISIBLE]

    def nearest_object(self, target, candidates):
        """ Candidate whose box centre is closest to the centre of ``target``,
            ties broken by label. ``target`` itself is never returned.
        """

        candidates = [c for c in candidates if c.label != target.label]
        if not candidates:
            return None

        centers = np.array([c.bbox.center for c in candidates], dtype=float)
        distances = cdist(np.array([target.bbox.center], dtype=float), centers)[0]

        order = sorted(range(len(candidates)), key=lambda i: (distances[i], candidates[i].label))
        return candidates[order[0]]

    def to_dict(self):
        d = {"image_w": self.image_w, "image_h": self.image_h,
             "objects": [o.to_dict() for o in self.objects]}
        if self.image_ref:
            d["image_ref"] = self.image_ref
        return d

    @classmethod
    def from_dict(cls, d, parent=""):
        image_w = _integer(d, "image_w", parent)
        image_h = _integer(d, "image_h", parent)
        objects = [SceneObject.from_dict(o, image_w, image_h, _path(parent, "objects[%d]" % i))
                   for i, o in enumerate(_list(d, "objects", parent))]
        image_ref = d.get("image_ref", "")
        return _construct(cls, parent, image_w=image_w, image_h=image_h, objects=objects, image_ref=image_ref)


def load_scenes(path):
    """ Reads a scene file: either one SceneGraph document, a list of
        documents each carrying ``image_ref``, or an object mapping
        image_ref to SceneGraph documents.

        :return: Scenes keyed by image_ref
        :rtype: dict
    """

    doc = read_json(path)
    return scenes_from_json(doc)


def scenes_from_json(doc):
    scenes = {}

    if is_dict(doc) and "objects" in doc:
        scene = SceneGraph.from_dict(doc, "scene")
        scenes[scene.image_ref] = scene
    elif is_dict(doc):
        for ref in sorted(doc):
            scene = SceneGraph.from_dict(doc[ref], "scenes.%s" % ref)
            scenes[ref] = SceneGraph(scene.image_w, scene.image_h, scene.objects, ref)
    elif isinstance(doc, list):
        for i, d in enumerate(doc):
            scene = SceneGraph.from_dict(d, "scenes[%d]" % i)
            if not scene.image_ref:
                raise ParseError("Missing required field", "scenes[%d].image_ref" % i)
            if scene.image_ref in scenes:
                raise ParseError("Duplicate scene", "scenes[%d].image_ref" % i)
            scenes[scene.image_ref] = scene
    else:
        raise ParseError("Expected a scene document, list or mapping", "scenes")

    return scenes


def scenes_to_json(scenes):
    return [scenes[ref].to_dict() for ref in sorted(scenes)]


# ------------ ** Annotation sets ** ----------------

class AnnotationSet(object):
    """
    Object annotations for a collection of images, the input of the
    dataset builder. Each image is held as a :class:`SceneGraph`.

    :param images: Annotated images
    :type images: list of SceneGraph
    """

    def __init__(self, images=()):
        self.images = sorted(images, key=lambda s: s.image_ref)

        refs = [s.image_ref for s in self.images]
        if len(set(refs)) != len(refs):
            raise InputError("Duplicate image_ref in annotation set")
        if any(not r for r in refs):
            raise InputError("Every annotated image needs an image_ref")

    def __len__(self):
        return len(self.images)

    def __iter__(self):
        return iter(self.images)

    @property
    def labels(self):
        return sorted(set(label for s in self.images for label in s.labels))

    def to_dict(self):
        return {"images": [{"image_ref": s.image_ref, "width": s.image_w, "height": s.image_h,
                            "objects": [o.to_dict() for o in s.objects]} for s in self.images]}

    @classmethod
    def from_dict(cls, d):
        images = []
        for i, img in enumerate(_list(d, "images")):
            parent = "images[%d]" % i
            width = _integer(img, "width", parent)
            height = _integer(img, "height", parent)
            objects = [SceneObject.from_dict(o, width, height, _path(parent, "objects[%d]" % j))
                       for j, o in enumerate(_list(img, "objects", parent))]
            images.append(_construct(SceneGraph, parent, image_w=width, image_h=height, objects=objects,
                                     image_ref=_text(img, "image_ref", parent)))
        return cls(images)


def load_annotations(path):
    return AnnotationSet.from_dict(read_json(path))
