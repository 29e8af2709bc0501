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
Shared scenes and helpers. Plain functions so the test modules can also
be run as scripts.
"""

import functools

from fastswitch.adapters import FixtureBackend, OracleBackend, fixture_key
from fastswitch.adapters.backends import Backend
from fastswitch.core import BBox, Query
from fastswitch.data import SceneGraph, SceneObject
from fastswitch.data.synthetic import generate_corpus


def box(x0, y0, x1, y1, w=100, h=100):
    return BBox(x0, y0, x1, y1, w, h)


def desk_scene():
    """
    400x300 desk with a visible keyboard and cup and an 8x6 mouse next
    to the keyboard.
    """

    keyboard = SceneObject("keyboard", BBox(100, 200, 220, 240, 400, 300), {"color": "black", "material": "plastic"})
    cup = SceneObject("cup", BBox(300, 50, 340, 100, 400, 300), {"color": "red", "material": "glass"})
    mouse = SceneObject("mouse", BBox(230, 220, 238, 226, 400, 300), {"color": "white", "material": "plastic"},
                        clue="near the keyboard")
    return SceneGraph(400, 300, [keyboard, cup, mouse], "desk")


def desk_backend(**kwargs):
    return OracleBackend({"desk": desk_scene()}, **kwargs)


def desk_query(question, query_id="q0"):
    return Query("desk", question, query_id)


@functools.lru_cache(maxsize=None)
def corpus(n_scenes=200, seed=0):
    return generate_corpus(n_scenes, seed=seed)


class RecordingBackend(Backend):
    """
    Passes calls through and keeps every response, keyed like fixtures.
    """

    name = "recording"

    def __init__(self, backend):
        self.backend = backend
        self.responses = {}

    def _call(self, request):
        response = self.backend._call(request)
        key = fixture_key(request.query.image_ref, request.query.question)
        self.responses.setdefault(key, []).append(response.to_dict())
        return response


def record_fixtures(backend, queries, cfg=None):
    """
    Runs ``queries`` through ``backend`` and returns the fixture document
    that replays them.
    """

    from fastswitch.pipeline import run_query

    recorder = RecordingBackend(backend)
    for q in queries:
        run_query(q, recorder, cfg)
    return recorder.responses


def fixture_backend_for(queries, scenes, cfg=None):
    return FixtureBackend(record_fixtures(OracleBackend(scenes), queries, cfg))
