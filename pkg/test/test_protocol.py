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


import numpy as np
import pytest

from fastswitch.adapters import *
from fastswitch.adapters.backends import Backend
from fastswitch.core import BBox, ContextClue, EvidenceChain, MissingObject, Query, Region
from fastswitch.utils import BackendError, GeometryError, ParseError, ProtocolError, UnsupportedQuestionError

from conftest import desk_backend, desk_query


def test_format_region():

    region = BBox(100, 50, 200, 150, 400, 300).normalized()
    assert format_region(region) == "[0.2500, 0.5000, 0.1667, 0.5000]"

    assert format_region(Region.full_frame()) == "[0.0000, 1.0000, 0.0000, 1.0000]"


def test_parse_region_text():

    region = parse_region_text("The region is [0.2, 0.8, 0.1, 0.5] in the image.")
    np.testing.assert_allclose(region.as_tuple(), (0.2, 0.8, 0.1, 0.5))

    for text in ["no region here", "[0.1, 0.2, 0.3]", "[a, b, c, d]", "[0.1, 0.2, 0.3, 0.4, 0.5]"]:
        with pytest.raises(ParseError):
            parse_region_text(text)

    for text in ["[0.5, 0.4, 0.0, 1.0]", "[0.0, 1.0, 0.6, 0.6]", "[0.0, 1.2, 0.0, 1.0]"]:
        with pytest.raises(GeometryError):
            parse_region_text(text)


def test_region_text_roundtrip():

    random_state = np.random.RandomState(7)

    for _ in range(1000):
        left, top = random_state.uniform(0.0, 0.5, size=2)
        right = random_state.uniform(left + 0.01, 1.0)
        bottom = random_state.uniform(top + 0.01, 1.0)
        region = Region(left, right, top, bottom)

        parsed = parse_region_text(format_region(region))

        assert np.allclose(parsed.as_tuple(), region.as_tuple(), atol=5e-5), "Error in region round trip"


def test_trigger_text():

    text = format_trigger_text([MissingObject("glove"), "bat"], [ContextClue("near home plate"), "on the bench"])

    assert TRIGGER_PHRASE in text.lower()

    missing, clues = parse_trigger_tail(text)
    assert [m.label for m in missing] == ["glove", "bat"]
    assert [c.text for c in clues] == ["near home plate", "on the bench"]

    missing, clues = parse_trigger_tail(format_trigger_text(["mouse"]))
    assert [m.label for m in missing] == ["mouse"]
    assert clues == []

    assert parse_trigger_tail("Sorry, I can not answer.") is None


def test_request_validation():

    query = Query("img1", "What color is the mouse?", "q1")

    with pytest.raises(ProtocolError) as e:
        AdapterRequest(AdapterRole.PROPOSE_BOXES, query)
    assert e.value.step == "propose_boxes"

    with pytest.raises(ProtocolError):
        AdapterRequest(AdapterRole.SEGMENT, query, region=Region.full_frame(), missing=[MissingObject("mouse")])
    with pytest.raises(ProtocolError):
        AdapterRequest(AdapterRole.SUMMARIZE, query)

    request = AdapterRequest(AdapterRole.SUMMARIZE, query, clues=[ContextClue("near the keyboard")],
                             chain=EvidenceChain(region=Region.full_frame()))
    assert AdapterRequest.from_dict(request.to_dict()) == request

    d = request.to_dict()
    d["extra"] = 1
    with pytest.raises(ParseError):
        AdapterRequest.from_dict(d)

    d = request.to_dict()
    d["role"] = "decode"
    with pytest.raises(ParseError):
        AdapterRequest.from_dict(d)


def test_response_validation():

    with pytest.raises(ProtocolError):
        AdapterResponse(AdapterRole.SWITCH, raw_text="  ")
    with pytest.raises(ProtocolError):
        AdapterResponse(AdapterRole.PROPOSE_REGION, raw_text="[0, 1, 0, 1]")
    with pytest.raises(ProtocolError):
        AdapterResponse(AdapterRole.SEGMENT)

    with pytest.raises(ParseError):
        AdapterResponse.from_dict({"role": "segment"})

    response = AdapterResponse(AdapterRole.PROPOSE_REGION, region=Region(0.1, 0.9, 0.2, 0.8),
                               boxes=[BBox(10, 20, 30, 40, 100, 100)], latency_ms=3.0)
    assert AdapterResponse.from_dict(response.to_dict()) == response


def test_fixture_backend():

    query = Query("img1", "What color is the cup?", "q1")
    fixtures = {
        fixture_key("img1", "What color is the cup?"): {"role": "switch", "raw_text": "red"},
        fixture_key("img2", "Where is the glove?"): [
            {"role": "switch", "raw_text": "Sorry, I can not answer. Missing objects: [glove]."},
            {"role": "summarize", "raw_text": "near home plate"},
        ],
    }

    backend = FixtureBackend(fixtures)
    assert len(backend) == 3

    response = call_adapter(backend, AdapterRequest(AdapterRole.SWITCH, query))
    assert response.raw_text == "red"
    assert response.latency_ms >= 0.0

    with pytest.raises(BackendError) as e:
        backend.call(AdapterRequest(AdapterRole.SWITCH, Query("img3", "What color is the cup?", "q3")))
    assert e.value.step == "switch"

    with pytest.raises(ParseError):
        FixtureBackend({"k": [{"role": "switch", "raw_text": "a"}, {"role": "switch", "raw_text": "b"}]})


class _WrongRole(Backend):

    def _call(self, request):
        return AdapterResponse(AdapterRole.SUMMARIZE, raw_text="yes")


def test_call_adapter_checks_role():

    with pytest.raises(ProtocolError) as e:
        call_adapter(_WrongRole(), AdapterRequest(AdapterRole.SWITCH, Query("img1", "x", "q1")))
    assert e.value.step == "switch"


def test_instrumented_backend():

    backend = InstrumentedBackend(desk_backend())
    backend.call(AdapterRequest(AdapterRole.SWITCH, desk_query("What color is the cup?", "a")))
    backend.call(AdapterRequest(AdapterRole.SWITCH, desk_query("What color is the mouse?", "b")))

    assert backend.calls("a") == [AdapterRole.SWITCH]
    assert backend.count("switch") == 2
    assert backend.count() == 2

    backend.reset()
    assert backend.count() == 0


def test_parse_question():

    assert parse_question("What color is the mouse?") == ("attribute", "mouse", "color")
    assert parse_question("where is the red cup") == ("where", "red cup", None)
    assert parse_question("Is there an apple in the image?") == ("exists", "apple", None)

    with pytest.raises(UnsupportedQuestionError):
        parse_question("How many cups are there?")


def test_oracle_switch():

    backend = desk_backend()

    def switch(question):
        return call_adapter(backend, AdapterRequest(AdapterRole.SWITCH, desk_query(question))).raw_text

    assert switch("What color is the cup?") == "red"
    assert switch("Where is the cup?") == "in the image"
    assert switch("Is there a keyboard in the image?") == "yes"

    assert switch("What color is the mouse?") == \
        "Sorry, I can not answer. Missing objects: [mouse]. Context: near the keyboard"
    assert switch("Is there a zebra in the image?") == "Sorry, I can not answer. Missing objects: [zebra]."

    with pytest.raises(UnsupportedQuestionError) as e:
        switch("How many cups are there?")
    assert e.value.step == "switch"

    # the 8x6 mouse is visible under a 5 pixel threshold
    small = desk_backend(threshold=5)
    response = call_adapter(small, AdapterRequest(AdapterRole.SWITCH, desk_query("What color is the mouse?")))
    assert response.raw_text == "white"


def test_oracle_proposals():

    backend = desk_backend()
    query = desk_query("What color is the mouse?")
    mouse = BBox(230, 220, 238, 226, 400, 300)
    keyboard = BBox(100, 200, 220, 240, 400, 300)
    missing = [MissingObject("mouse")]

    region = call_adapter(backend, AdapterRequest(AdapterRole.PROPOSE_REGION, query, missing=missing,
                                                  clues=[ContextClue("near the keyboard")]))
    assert region.region.contains_box(mouse)
    assert region.region.contains_box(keyboard)
    assert region.boxes == (mouse,)
    assert parse_region_text(region.raw_text).contains_box(mouse, tol=1e-4)

    # no clue and no target: the whole frame
    empty = call_adapter(backend, AdapterRequest(AdapterRole.PROPOSE_REGION, desk_query("Where is the zebra?"),
                                                 missing=[MissingObject("zebra")]))
    assert empty.region == Region.full_frame()
    assert empty.boxes == ()

    boxes = call_adapter(backend, AdapterRequest(AdapterRole.PROPOSE_BOXES, query, region=region.region,
                                                 missing=missing))
    assert boxes.boxes == (mouse,)

    mask = call_adapter(backend, AdapterRequest(AdapterRole.SEGMENT, query, region=region.region,
                                                boxes=boxes.boxes, missing=missing)).mask
    assert mask.count == mouse.area

    chain = EvidenceChain(region=region.region, boxes=boxes.boxes, missing=missing, mask=mask)
    summary = call_adapter(backend, AdapterRequest(AdapterRole.SUMMARIZE, query, boxes=boxes.boxes,
                                                   missing=missing, chain=chain))
    assert summary.raw_text == "white"

    # without evidence the oracle cannot see the mouse
    blind = call_adapter(backend, AdapterRequest(AdapterRole.SUMMARIZE, query, missing=missing,
                                                 chain=EvidenceChain(region=region.region)))
    assert blind.raw_text == "There is no mouse in the image."


if __name__ == "__main__":

    test_format_region()
    test_parse_region_text()
    test_region_text_roundtrip()
    test_trigger_text()
    test_request_validation()
    test_response_validation()
    test_fixture_backend()
    test_call_adapter_checks_role()
    test_instrumented_backend()
    test_parse_question()
    test_oracle_switch()
    test_oracle_proposals()
