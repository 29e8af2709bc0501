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


import json
import os
import tempfile

import pytest

from fastswitch.adapters import AdapterRole, FixtureBackend, InstrumentedBackend, OracleBackend, fixture_key, parse_question
from fastswitch.core import BBox, Mode, Query, mask_within_boxes
from fastswitch.core.serialization import canonical_dumps
from fastswitch.data import SceneGraph, SceneObject, Visibility, classify_visibility
from fastswitch.metrics import QueryLabel, is_correct
from fastswitch.pipeline import *
from fastswitch.pipeline.engine import DEGRADED_SLOW, EMPTY_PROPOSAL, FORCED_SLOW, SEGMENT_SKIPPED
from fastswitch.utils import BackendError, ConfigError, DegradedSlowError, InputError

from conftest import corpus, desk_backend, desk_query

MOUSE = BBox(230, 220, 238, 226, 400, 300)

CONFIGS = [PipelineConfig(two_stage_proposal=ts, enable_segmentation=seg) for ts in (True, False)
           for seg in (True, False)]


def test_detect_mode():

    decision = detect_mode("The cup is red.")
    assert decision.mode == Mode.FAST
    assert not decision.degraded

    decision = detect_mode("Sorry, I can not answer. Missing objects: [glove, bat]. Context: near home plate")
    assert decision.mode == Mode.SLOW
    assert [m.label for m in decision.missing] == ["glove", "bat"]
    assert [c.text for c in decision.clues] == ["near home plate"]

    decision = detect_mode("SORRY, I CAN NOT ANSWER this one")
    assert decision.mode == Mode.SLOW
    assert decision.degraded
    assert decision.missing == [] and decision.clues == []

    with pytest.raises(DegradedSlowError):
        detect_mode("Sorry, I can not answer.", strict=True)

    cfg = PipelineConfig(trigger_phrase="Cannot See")
    assert detect_mode("I cannot see it. Missing objects: [mouse].", cfg).mode == Mode.SLOW
    assert detect_mode("Sorry, I can not answer. Missing objects: [mouse].", cfg).mode == Mode.FAST


def test_config():

    cfg = PipelineConfig()
    assert cfg.slow_call_count() == 5
    assert PipelineConfig(two_stage_proposal=False, enable_segmentation=False).slow_call_count() == 3
    assert PipelineConfig(enable_proposal=False).slow_call_count() == 2
    assert PipelineConfig.from_dict({"enable_proposal": False}).enable_proposal is False

    assert PipelineConfig.from_dict(cfg.to_dict()) == cfg
    assert cfg.replace(force_mode="slow").force_mode == ForceMode.SLOW

    with pytest.raises(ConfigError):
        PipelineConfig(two_stage_proposal="yes")
    with pytest.raises(ConfigError):
        PipelineConfig(enable_proposal=1)
    with pytest.raises(ConfigError):
        PipelineConfig(summarize_with="pixels")
    with pytest.raises(ConfigError):
        PipelineConfig.from_dict({"two_stage": True})

    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "config.json")
        with open(path, "w") as f:
            json.dump({"pipeline": {"enable_segmentation": False}}, f)
        assert load_config(path) == PipelineConfig(enable_segmentation=False)


def test_fast_path():

    backend = InstrumentedBackend(desk_backend())
    answer = run_query(desk_query("What color is the cup?"), backend)

    assert answer.mode == Mode.FAST
    assert answer.text == "red"
    assert answer.chain is None
    assert backend.calls("q0") == [AdapterRole.SWITCH]

    bus = SceneObject("bus", BBox(100, 100, 220, 180, 640, 480), {"color": "red"})
    backend = InstrumentedBackend(OracleBackend({"street": SceneGraph(640, 480, [bus], "street")}))
    answer = run_query(Query("street", "What color is the bus?", "bus"), backend)

    assert (answer.mode, answer.text) == (Mode.FAST, "red")
    assert backend.count() == 1


def test_slow_path():

    backend = desk_backend()
    trace = QueryTrace(desk_query("What color is the mouse?"))
    answer = run_query(trace.query, backend, trace=trace)

    assert answer.mode == Mode.SLOW
    assert answer.text == "white"
    assert answer.flags == ()

    chain = answer.chain
    assert [m.label for m in chain.missing] == ["mouse"]
    assert [c.text for c in chain.clues] == ["near the keyboard"]
    assert chain.boxes == (MOUSE,)
    assert chain.region.contains_box(MOUSE)
    assert chain.mask.count == MOUSE.area

    assert trace.steps == ["switch", "propose_region", "propose_boxes", "segment", "summarize"]
    assert trace.to_dict()["answer"]["text"] == "white"


def test_call_count_law():

    for cfg in CONFIGS:
        backend = InstrumentedBackend(desk_backend())

        run_query(desk_query("What color is the cup?", "fast"), backend, cfg)
        run_query(desk_query("What color is the mouse?", "slow"), backend, cfg)

        assert len(backend.calls("fast")) == 1
        expected = 2 + int(cfg.two_stage_proposal) + int(cfg.enable_segmentation) + 1
        assert len(backend.calls("slow")) == expected, "Error in call count for %r" % cfg
        assert cfg.slow_call_count() == expected

        calls = backend.calls("slow")
        assert calls[0] == AdapterRole.SWITCH
        assert calls[-1] == AdapterRole.SUMMARIZE
        assert (AdapterRole.PROPOSE_BOXES in calls) == cfg.two_stage_proposal
        assert (AdapterRole.SEGMENT in calls) == cfg.enable_segmentation


def test_call_count_law_synthetic():

    data = corpus()
    slow = [q for q in data.queries if data.labels[q.query_id].subtask == "invisible"][:30]

    for cfg in CONFIGS:
        backend = InstrumentedBackend(OracleBackend(data.scenes))

        for q in slow:
            answer = run_query(q, backend, cfg)
            assert answer.text in data.labels[q.query_id].gold
            assert len(backend.calls(q.query_id)) == cfg.slow_call_count()


def test_proposal_and_segmentation_ablation():

    steps = {(False, False): ["switch", "summarize"],
             (False, True): ["switch", "summarize"],
             (True, False): ["switch", "propose_region", "propose_boxes", "summarize"],
             (True, True): ["switch", "propose_region", "propose_boxes", "segment", "summarize"]}

    for (proposal, seg), expected in steps.items():
        cfg = PipelineConfig(enable_proposal=proposal, enable_segmentation=seg)
        backend = InstrumentedBackend(desk_backend())
        trace = QueryTrace(desk_query("What color is the mouse?", "slow"))

        answer = run_query(trace.query, backend, cfg, trace)
        assert trace.steps == expected
        assert cfg.slow_call_count() == len(expected)

        fast = run_query(desk_query("What color is the cup?", "fast"), backend, cfg)
        assert (fast.mode, fast.text) == (Mode.FAST, "red")
        assert len(backend.calls("fast")) == 1

        assert answer.mode == Mode.SLOW
        assert [m.label for m in answer.chain.missing] == ["mouse"]
        assert [c.text for c in answer.chain.clues] == ["near the keyboard"]
        if proposal:
            assert answer.text == "white"
        else:
            # nothing located the mouse for the summarize step
            assert answer.text == "There is no mouse in the image."
            assert answer.chain.region is None and answer.chain.boxes == ()
            assert EMPTY_PROPOSAL not in answer.flags
        assert (SEGMENT_SKIPPED in answer.flags) == (seg and not proposal)


def test_summarize_with_mask():

    backend = InstrumentedBackend(desk_backend())
    answer = run_query(desk_query("What color is the mouse?"), backend, PipelineConfig(summarize_with="mask"))

    assert answer.text == "white"
    assert answer.chain.mask is not None


def test_empty_proposal():

    backend = InstrumentedBackend(desk_backend())
    answer = run_query(desk_query("What color is the zebra?"), backend)

    assert answer.mode == Mode.SLOW
    assert answer.text == "There is no zebra in the image."
    assert EMPTY_PROPOSAL in answer.flags
    assert SEGMENT_SKIPPED in answer.flags
    assert answer.chain.boxes == ()
    assert answer.chain.mask is None
    assert AdapterRole.SEGMENT not in backend.calls("q0")


def test_force_mode():

    backend = InstrumentedBackend(desk_backend())

    answer = run_query(desk_query("What color is the mouse?", "f"), backend, PipelineConfig(force_mode="fast"))
    assert answer.mode == Mode.FAST
    assert answer.text.startswith("Sorry, I can not answer")
    assert len(backend.calls("f")) == 1

    answer = run_query(desk_query("What color is the cup?", "s"), backend, PipelineConfig(force_mode="slow"))
    assert answer.mode == Mode.SLOW
    assert answer.text == "red"
    assert FORCED_SLOW in answer.flags
    # no missing objects to segment when the switch answered directly
    assert SEGMENT_SKIPPED in answer.flags


def test_switch_ablations():

    backend = desk_backend()

    answer = run_query(desk_query("What color is the mouse?"), backend, PipelineConfig(use_context_clues=False))
    assert answer.text == "white"
    assert answer.chain.clues == ()

    answer = run_query(desk_query("What color is the mouse?"), backend, PipelineConfig(use_missing_objects=False))
    assert answer.text == "white"
    assert answer.chain.missing == ()
    assert answer.chain.mask is None


def _degraded_fixtures():
    key = fixture_key("img1", "Where is the glove?")
    return {key: [
        {"role": "switch", "raw_text": "Sorry, I can not answer."},
        {"role": "propose_region", "raw_text": "[0.0, 1.0, 0.0, 1.0]",
         "region": {"left": 0.0, "right": 1.0, "top": 0.0, "bottom": 1.0}},
        {"role": "propose_boxes", "boxes": []},
        {"role": "summarize", "raw_text": "I do not know"},
    ]}


def test_degraded_slow():

    backend = FixtureBackend(_degraded_fixtures())
    answer = run_query(Query("img1", "Where is the glove?", "q1"), backend)

    assert answer.mode == Mode.SLOW
    assert answer.text == "I do not know"
    assert DEGRADED_SLOW in answer.flags
    assert EMPTY_PROPOSAL in answer.flags


def test_adapter_failure():

    fixtures = _degraded_fixtures()
    key = fixture_key("img1", "Where is the glove?")
    fixtures[key] = fixtures[key][:3]

    query = Query("img1", "Where is the glove?", "q1")
    trace = QueryTrace(query)

    with pytest.raises(BackendError) as e:
        run_query(query, FixtureBackend(fixtures), trace=trace)

    assert e.value.step == "summarize"
    assert trace.steps[-1] == "summarize"
    assert "error" in trace.to_dict()["events"][-1]


def test_batch():

    backend = desk_backend()
    queries = [desk_query("What color is the cup?", "a"),
               desk_query("How many cups are there?", "b"),
               desk_query("What color is the mouse?", "c")]
    labels = {"a": QueryLabel(("red",)), "c": QueryLabel(("white",), "invisible")}

    with tempfile.TemporaryDirectory() as tmp:
        records = run_batch(queries, backend, labels=labels, trace_dir=tmp, no_timestamps=True, parallelism=3)

        assert [r.query_id for r in records] == ["a", "b", "c"]
        assert [r.mode for r in records] == [Mode.FAST, Mode.FAILED, Mode.SLOW]

        failed = records[1]
        assert failed.failed_step == "switch"
        assert failed.predicted == ""

        assert records[2].subtask == "invisible"
        assert all(r.latency_ms == 0.0 for r in records)

        for r in records:
            assert os.path.exists(r.trace_ref)
        with open(records[2].trace_ref) as f:
            trace = json.load(f)
        assert [e["step"] for e in trace["events"]] == \
            ["switch", "propose_region", "propose_boxes", "segment", "summarize"]
        assert all(e["t_start"] == 0.0 for e in trace["events"])

    with pytest.raises(InputError):
        run_batch([queries[0], queries[0]], backend)
    with pytest.raises(ConfigError):
        run_batch(queries, backend, parallelism=0)


def test_trace_file_names():

    ids = ["a/b", "a_b", "a b", "a%2Fb", "..", "ß"]
    queries = [desk_query("What color is the cup?", query_id) for query_id in ids]

    with tempfile.TemporaryDirectory() as tmp:
        records = run_batch(queries, desk_backend(), trace_dir=tmp, parallelism=3)

        paths = [r.trace_ref for r in records]
        assert len(set(paths)) == len(ids)
        assert all(os.path.dirname(p) == tmp for p in paths)
        assert len(os.listdir(tmp)) == len(ids)

        for query_id, path in zip(ids, paths):
            with open(path) as f:
                assert json.load(f)["query"]["query_id"] == query_id


def test_batch_determinism():

    data = corpus()
    queries = data.queries[:60]
    backend = InstrumentedBackend(OracleBackend(data.scenes))

    serial = run_batch(queries, backend, labels=data.labels, no_timestamps=True)
    parallel = run_batch(queries, backend, labels=data.labels, no_timestamps=True, parallelism=8)

    assert canonical_dumps([r.to_dict() for r in serial]) == canonical_dumps([r.to_dict() for r in parallel])


def test_oracle_end_to_end():

    data = corpus()
    assert len(data.scenes) >= 200

    backend = InstrumentedBackend(OracleBackend(data.scenes))
    cfg = PipelineConfig()
    kinds = set()

    for q in data.queries:
        label = data.labels[q.query_id]
        kinds.add(label.subtask)

        answer = run_query(q, backend, cfg)

        assert answer.text in label.gold, "Wrong answer for %s: %s" % (q.question, answer.text)
        assert answer.mode == data.expected_modes[q.query_id], "Wrong mode for %s" % q.question

        # the routing matches the visibility of the asked-about object
        scene = data.scenes[q.image_ref]
        target = scene.find(parse_question(q.question).label)
        visible = target is not None and classify_visibility(target.bbox) == Visibility.VISIBLE
        assert (answer.mode == Mode.FAST) == visible

        if answer.mode == Mode.SLOW:
            chain = answer.chain
            assert all(chain.region.contains_box(b) for b in chain.boxes)
            if chain.mask is not None:
                assert mask_within_boxes(chain.mask, chain.boxes)
            assert len(backend.calls(q.query_id)) <= cfg.slow_call_count()
        else:
            assert len(backend.calls(q.query_id)) == 1

    assert kinds == {"visible", "invisible", "absent"}

    records = run_batch(data.queries, OracleBackend(data.scenes), labels=data.labels, parallelism=4)
    assert all(is_correct(r) for r in records)


if __name__ == "__main__":

    test_detect_mode()
    test_config()
    test_fast_path()
    test_slow_path()
    test_call_count_law()
    test_call_count_law_synthetic()
    test_proposal_and_segmentation_ablation()
    test_summarize_with_mask()
    test_empty_proposal()
    test_force_mode()
    test_switch_ablations()
    test_degraded_slow()
    test_adapter_failure()
    test_batch()
    test_trace_file_names()
    test_batch_determinism()
    test_oracle_end_to_end()
