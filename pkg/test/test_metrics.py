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

import numpy as np
import pytest

from fastswitch.core import Mask, Mode
from fastswitch.core.serialization import write_json
from fastswitch.metrics import *
from fastswitch.metrics.segmentation import segmentation_report
from fastswitch.utils import InputError, StructureError, UndefinedMetricError


def record(query_id, predicted, gold, **kwargs):
    if isinstance(gold, str):
        gold = [gold]
    return EvalRecord(query_id, predicted, tuple(gold), **kwargs)


def test_normalize_answer():

    assert normalize_answer("  Red. ") == "red"
    assert normalize_answer("YES!") == "yes"
    assert normalize_answer("near the keyboard.") == "near the keyboard"
    assert normalize_answer("U.S.A.") == "u.s.a"


def test_exact_match():

    records = [record("a", "a", "a"), record("b", "b", "b"), record("c", "c", "c")]
    assert exact_match_accuracy(records) == 1.0

    records = [record("a", "a", "a"), record("b", "b", "x"), record("c", "c", "c")]
    assert exact_match_accuracy(records) == pytest.approx(2.0 / 3.0)

    assert is_correct(record("a", "Red.", "red"))
    assert is_correct(record("a", "two", ["2", "two"]))
    assert not is_correct(record("a", "red", "red", correct=False))

    # failed queries count as wrong, unlabelled ones are ignored
    records = [record("a", "red", "red"), record("b", "", "blue", mode=Mode.FAILED), record("c", "x", [])]
    assert exact_match_accuracy(records) == 0.5

    with pytest.raises(UndefinedMetricError):
        exact_match_accuracy([])
    with pytest.raises(UndefinedMetricError):
        exact_match_accuracy([record("c", "x", [])])


def yes_no_records(pairs):
    return [record("q%d" % i, predicted, gold) for i, (predicted, gold) in enumerate(pairs)]


def test_pope_f1():

    perfect = pope_f1(yes_no_records([("yes", "yes"), ("no", "no"), ("Yes.", "yes")]))
    assert perfect["precision"] == perfect["recall"] == perfect["f1"] == 1.0
    assert perfect["accuracy"] == 1.0

    pairs = [("yes", "yes")] * 6 + [("yes", "no")] * 2 + [("no", "yes")] * 2 + [("no", "no")] * 5
    scores = pope_f1(yes_no_records(pairs))
    assert (scores["tp"], scores["fp"], scores["fn"], scores["tn"]) == (6, 2, 2, 5)
    assert scores["precision"] == pytest.approx(0.75)
    assert scores["recall"] == pytest.approx(0.75)
    assert scores["f1"] == pytest.approx(0.75)
    assert scores["yes_ratio"] == pytest.approx(8.0 / 15.0)

    scores = pope_f1(yes_no_records([("no", "yes"), ("no", "yes"), ("no", "no")]))
    assert scores["precision"] == 0.0
    assert scores["f1"] == 0.0

    scores = pope_f1(yes_no_records([("yes", "yes"), ("maybe", "no"), ("no", "a cat")]))
    assert scores["invalid"] == ["q1", "q2"]
    assert scores["n"] == 1

    with pytest.raises(UndefinedMetricError):
        pope_f1(yes_no_records([("maybe", "no")]))


def test_pope_f1_fuzz():

    random_state = np.random.RandomState(5)
    answers = ["yes", "no", "Yes.", "NO"]

    for _ in range(1000):
        n = random_state.randint(1, 40)
        pairs = [(answers[random_state.randint(4)], answers[random_state.randint(4)]) for _ in range(n)]

        tp = sum(1 for p, g in pairs if p.lower().startswith("y") and g.lower().startswith("y"))
        fp = sum(1 for p, g in pairs if p.lower().startswith("y") and g.lower().startswith("n"))
        fn = sum(1 for p, g in pairs if p.lower().startswith("n") and g.lower().startswith("y"))

        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0

        records = yes_no_records(pairs)
        scores = pope_f1(records)
        assert scores["f1"] == pytest.approx(f1), "Error in F1 for %r" % pairs

        random_state.shuffle(records)
        assert pope_f1(records)["f1"] == pytest.approx(scores["f1"])


def mme_records(subtask, answers, offset=0):
    """
    answers: per image, the correctness of its two questions
    """
    records = []
    for i, (first, second) in enumerate(answers):
        image_ref = "%s-%d" % (subtask, i + offset)
        for j, ok in enumerate((first, second)):
            records.append(record("%s-q%d" % (image_ref, j), "yes" if ok else "no", "yes",
                                  subtask=subtask, image_ref=image_ref))
    return records


def test_mme_score():

    scores = mme_score(mme_records("existence", [(True, True), (True, False)]))
    row = scores["per_subtask"]["existence"]
    assert row["acc"] == 75.0
    assert row["acc_plus"] == 50.0
    assert row["score"] == 125.0
    assert (row["n_images"], row["n_questions"]) == (2, 4)

    records = []
    for subtask in PERCEPTION_SUBTASKS:
        records += mme_records(subtask, [(True, True)] * 3)
    scores = mme_score(records)
    assert scores["total"] == 2000.0
    assert scores["perception"] == 2000.0
    assert scores["cognition"] == 0.0

    np.random.RandomState(0).shuffle(records)
    assert mme_score(records) == scores


def test_mme_random_predictor():

    random_state = np.random.RandomState(42)
    records = []

    for i in range(10000):
        for j in range(2):
            gold = "yes" if random_state.rand() < 0.5 else "no"
            predicted = "yes" if random_state.rand() < 0.5 else "no"
            records.append(record("q%d-%d" % (i, j), predicted, gold, subtask="existence", image_ref="img%d" % i))

    row = mme_score(records)["per_subtask"]["existence"]
    assert abs(row["acc"] - 50.0) < 2.0
    assert abs(row["acc_plus"] - 25.0) < 2.0
    assert row["acc_plus"] <= row["acc"]
    assert 0.0 <= row["score"] <= 200.0


def test_mme_structure():

    records = mme_records("color", [(True, True)])
    with pytest.raises(StructureError):
        mme_score(records[:1])
    with pytest.raises(StructureError):
        mme_score(records + [record("extra", "yes", "yes", subtask="color", image_ref="color-0")])
    with pytest.raises(StructureError):
        mme_score([record("a", "yes", "yes", image_ref="img")])
    with pytest.raises(UndefinedMetricError):
        mme_score([])


def raster(shape, cells):
    array = np.zeros(shape, dtype=bool)
    for y, x in cells:
        array[y, x] = True
    return Mask.from_array(array)


def two_image_pairs():
    top_two_rows = [(y, x) for y in range(2) for x in range(4)]
    top_row = [(0, x) for x in range(4)]

    a = MaskPair(raster((4, 4), top_two_rows), raster((4, 4), top_row), "a")
    b = MaskPair(raster((4, 4), top_row), Mask.empty(4, 4), "b")
    return [a, b]


def test_ciou_giou():

    pairs = two_image_pairs()

    assert iou_counts(pairs[0]) == (4, 8)
    assert iou_counts(pairs[1]) == (0, 4)
    assert ciou(pairs) == pytest.approx(4.0 / 12.0)
    assert giou(pairs) == pytest.approx(0.25)
    assert ciou(pairs[:1]) == giou(pairs[:1]) == 0.5

    identical = [MaskPair(p.gold, p.gold, p.image_ref) for p in pairs] + [MaskPair(pairs[0].predicted, pairs[0].predicted)]
    assert giou(identical) == 1.0
    assert ciou(identical) == 1.0

    empty = MaskPair(Mask.empty(4, 4), Mask.empty(4, 4), "blank")
    assert ciou([empty]) == 1.0
    assert giou([empty, pairs[1]]) == 0.5

    missed = [MaskPair(Mask.empty(4, 4), p.predicted, p.image_ref) for p in pairs]
    assert ciou(missed) == 0.0

    with pytest.raises(StructureError) as e:
        MaskPair(Mask.empty(4, 4), Mask.empty(4, 5), "odd")
    assert "odd" in str(e.value)
    with pytest.raises(UndefinedMetricError):
        ciou([])


def _naive_counts(predicted, gold):
    intersection = 0
    union = 0
    for p, g in zip(predicted.ravel().tolist(), gold.ravel().tolist()):
        intersection += p and g
        union += p or g
    return intersection, union


def test_iou_against_pixel_counting():

    random_state = np.random.RandomState(9)
    pairs = []
    counts = []

    for i in range(1000):
        density = random_state.uniform(0.0, 0.6)
        predicted = random_state.rand(32, 32) < density
        gold = random_state.rand(32, 32) < density
        if i % 100 == 0:
            predicted[:] = False

        pair = MaskPair(Mask.from_array(predicted), Mask.from_array(gold), "img%d" % i)
        pairs.append(pair)
        counts.append(_naive_counts(predicted, gold))

        assert iou_counts(pair) == counts[-1]

    intersection = sum(i for i, _ in counts)
    union = sum(u for _, u in counts)
    assert ciou(pairs) == intersection / union

    per_image = [i / u if u else 1.0 for i, u in counts]
    assert giou(pairs) == pytest.approx(sum(per_image) / len(per_image), rel=1e-12)

    random_state.shuffle(pairs)
    assert ciou(pairs) == intersection / union
    assert giou(pairs) == pytest.approx(sum(per_image) / len(per_image), rel=1e-12)


def test_load_mask_pairs():

    a, b = two_image_pairs()

    with tempfile.TemporaryDirectory() as tmp:
        os.mkdir(os.path.join(tmp, "masks"))
        for name, mask in [("a_pred", a.predicted), ("a_gold", a.gold), ("b_pred", b.predicted), ("b_gold", b.gold)]:
            write_json(os.path.join(tmp, "masks", name + ".json"), mask.to_dict())

        manifest = os.path.join(tmp, "pairs.json")
        with open(manifest, "w") as f:
            json.dump({"pairs": [{"image_ref": "a", "predicted": "masks/a_pred.json", "gold": "masks/a_gold.json"},
                                 {"image_ref": "b", "predicted": "masks/b_pred.json", "gold": "masks/b_gold.json"}]}, f)

        pairs = load_mask_pairs(manifest)

    assert pairs == [a, b]

    report = mask_report(pairs)
    assert report == segmentation_report([a, b])
    assert report["ciou"] == pytest.approx(1.0 / 3.0)
    assert report["giou"] == pytest.approx(0.25)
    assert [row["iou"] for row in report["per_image"]] == [0.5, 0.0]


def test_record_report():

    records = mme_records("existence", [(True, True), (True, False)]) + [
        record("failed", "", "yes", mode=Mode.FAILED, subtask="existence", image_ref="existence-2", failed_step="switch"),
        record("failed2", "", "yes", mode=Mode.FAILED, subtask="existence", image_ref="existence-2")]

    report = record_report(records)

    assert report["n_records"] == 6
    assert report["n_failed"] == 2
    assert report["modes"] == {"failed": 2, "fast": 4}
    assert report["accuracy"] == pytest.approx(0.5)
    assert report["n_correct"] == 3
    assert "pope" in report and "mme" in report
    assert report["mme"]["per_subtask"]["existence"]["n_images"] == 3

    report = record_report([record("a", "red", "red"), record("b", "blue", "red")])
    assert set(report) == {"n_records", "n_scored", "n_failed", "modes", "accuracy", "n_correct"}

    with pytest.raises(InputError):
        record_report(records, ["bleu"])


def test_records_io():

    records = [record("a", "red", "red", subtask="color", image_ref="img0", latency_ms=12.5),
               record("b", "", "blue", mode=Mode.FAILED, failed_step="segment", error="boom"),
               record("c", "yes", [], correct=True, flags=("forced_slow",))]

    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "records.jsonl")
        write_records(path, records)
        assert read_records(path) == records

        queries_path = os.path.join(tmp, "queries.jsonl")
        with open(queries_path, "w") as f:
            f.write('{"query_id": "q0", "image_ref": "desk", "question": "What color is the cup?", "gold": "red"}\n')
            f.write('{"query_id": "q1", "image_ref": "desk", "question": "Is there a cup?", '
                    '"gold": ["yes"], "subtask": "existence"}\n')
            f.write('\n')
            f.write('{"query_id": "q2", "image_ref": "desk", "question": "Where is the cup?"}\n')

        queries, labels = load_queries(queries_path)
        assert [q.query_id for q in queries] == ["q0", "q1", "q2"]
        assert labels["q0"] == QueryLabel(("red",))
        assert labels["q1"] == QueryLabel(("yes",), "existence")
        assert labels["q2"].gold == ()


if __name__ == "__main__":

    test_normalize_answer()
    test_exact_match()
    test_pope_f1()
    test_pope_f1_fuzz()
    test_mme_score()
    test_mme_random_predictor()
    test_mme_structure()
    test_ciou_giou()
    test_iou_against_pixel_counting()
    test_load_mask_pairs()
    test_record_report()
    test_records_io()
