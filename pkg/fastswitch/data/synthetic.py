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
Seeded synthetic scene corpora with known answers, for exercising the
pipeline end to end against the oracle backend.
"""

from collections import namedtuple

import numpy as np

from ..adapters.oracle import answer_question, parse_question
from ..core import BBox, Mode, Query
from ..metrics.records import QueryLabel
from ..utils import InputError
from ..utils import is_positive_integer, is_positive_integer_or_zero
from .builder import nearest_visible_clue
from .scenes import DEFAULT_THRESHOLD, SceneGraph, SceneObject, Visibility, classify_visibility

LABELS = ("keyboard", "mouse", "cup", "lamp", "book", "phone", "chair", "plant", "clock", "bottle",
          "glove", "ball", "bat", "helmet", "shoe", "bag", "pen", "vase", "remote", "laptop")

COLORS = ("red", "green", "blue", "yellow", "black", "white", "orange", "purple")
MATERIALS = ("wood", "metal", "plastic", "glass", "leather")

TARGET_KINDS = ("visible", "invisible", "absent")

QUESTION_FORMS = ("What color is the %s?", "What material is the %s?", "Where is the %s?",
                  "Is there a %s in the image?")

SyntheticCorpus = namedtuple("SyntheticCorpus", ["scenes", "queries", "labels", "expected_modes"])


def _place(random_state, w, h, image_w, image_h):
    x0 = random_state.randint(0, image_w - w + 1)
    y0 = random_state.randint(0, image_h - h + 1)
    return BBox(x0, y0, x0 + w, y0 + h, image_w, image_h)


def _attributes(random_state):
    return {"color": COLORS[random_state.randint(len(COLORS))],
            "material": MATERIALS[random_state.randint(len(MATERIALS))]}


def generate_scene(random_state, image_ref, image_size=(320, 240), n_visible=3, n_invisible=1,
                   threshold=DEFAULT_THRESHOLD):
    """ One random scene with ``n_visible`` objects of at least threshold
        size in one dimension and ``n_invisible`` objects below it in both.
        Invisible objects carry a "near the <label>" clue.

        :rtype: SceneGraph
    """

    image_w, image_h = image_size
    tw, th = threshold
    labels = random_state.choice(len(LABELS), n_visible + n_invisible, replace=False)

    visible = []
    for i in labels[:n_visible]:
        if random_state.rand() < 0.2:
            # only one side reaches the threshold, which still counts as visible
            w = random_state.randint(tw, tw + 20)
            h = random_state.randint(4, th)
        else:
            w = random_state.randint(tw + 10, 4 * tw + 10)
            h = random_state.randint(th + 10, 4 * th + 10)
        visible.append(SceneObject(LABELS[i], _place(random_state, w, h, image_w, image_h),
                                   _attributes(random_state)))

    scene = SceneGraph(image_w, image_h, visible, image_ref)

    objects = list(visible)
    for i in labels[n_visible:]:
        w = random_state.randint(4, tw)
        h = random_state.randint(4, th)
        obj = SceneObject(LABELS[i], _place(random_state, w, h, image_w, image_h), _attributes(random_state))
        clue = nearest_visible_clue(scene, obj, threshold)
        objects.append(SceneObject(obj.label, obj.bbox, obj.attributes, clue.text if clue is not None else ""))

    return SceneGraph(image_w, image_h, objects, image_ref)


def generate_corpus(n_scenes, seed=0, image_size=(320, 240), threshold=DEFAULT_THRESHOLD, n_visible=3,
                    n_invisible=1):
    """ Generates scenes and one query per scene. Query targets cycle
        through visible, invisible and absent objects so that every kind
        appears in equal measure.

        :param n_scenes: Number of scenes
        :type n_scenes: integer
        :param seed: Random seed
        :type seed: integer
        :return: scenes keyed by image_ref, queries, labels with gold
            answers keyed by query_id, and the mode each query must take
        :rtype: SyntheticCorpus
    """

    if not is_positive_integer(n_scenes):
        raise InputError("Expected positive integer for variable 'n_scenes'. Got %s" % str(n_scenes))
    if not is_positive_integer(n_visible) or not is_positive_integer_or_zero(n_invisible):
        raise InputError("Expected at least one visible object per scene")
    if n_visible + n_invisible >= len(LABELS):
        raise InputError("At most %d objects fit a synthetic scene" % (len(LABELS) - 1))

    random_state = np.random.RandomState(seed)
    width = len(str(n_scenes - 1))

    scenes = {}
    queries = []
    labels = {}
    expected = {}

    for i in range(n_scenes):
        image_ref = "img%0*d" % (width, i)
        scene = generate_scene(random_state, image_ref, image_size, n_visible, n_invisible, threshold)
        scenes[image_ref] = scene

        kind = TARGET_KINDS[i % len(TARGET_KINDS)]
        if kind == "invisible" and n_invisible == 0:
            kind = "absent"

        if kind == "absent":
            candidates = [label for label in LABELS if scene.find(label) is None]
            label = candidates[random_state.randint(len(candidates))]
        else:
            candidates = [o for o in scene.objects
                          if (classify_visibility(o.bbox, *threshold) == Visibility.VISIBLE) == (kind == "visible")]
            label = candidates[random_state.randint(len(candidates))].label

        question = QUESTION_FORMS[random_state.randint(len(QUESTION_FORMS))] % label
        query = Query(image_ref, question, "q%0*d" % (width, i))

        gold = answer_question(parse_question(question), scene.find(label))
        queries.append(query)
        labels[query.query_id] = QueryLabel((gold,), kind)
        expected[query.query_id] = Mode.FAST if kind == "visible" else Mode.SLOW

    return SyntheticCorpus(scenes, queries, labels, expected)
