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
MME scoring. Every image is asked two yes/no questions per subtask;
accuracy counts questions, accuracy+ counts images with both questions
right, and a subtask scores their sum out of 200.
"""

from collections import defaultdict

from ..utils import StructureError, UndefinedMetricError
from .answers import is_correct, scored_records

PERCEPTION_SUBTASKS = ("existence", "count", "position", "color", "posters", "celebrity", "scene",
                       "landmark", "artwork", "ocr")
COGNITION_SUBTASKS = ("commonsense_reasoning", "numerical_calculation", "text_translation", "code_reasoning")

QUESTIONS_PER_IMAGE = 2


def _category(subtask):
    name = subtask.strip().lower().replace(" ", "_")
    if name in PERCEPTION_SUBTASKS:
        return "perception"
    if name in COGNITION_SUBTASKS:
        return "cognition"
    return None


def mme_score(records):
    """ MME accuracy, accuracy+ and score per subtask.

        :param records: Evaluation records carrying a subtask
        :type records: list of EvalRecord
        :return: ``per_subtask`` mapping subtask to acc, acc_plus, score,
            n_images and n_questions; ``total`` over all subtasks; and
            ``perception`` / ``cognition`` totals over the standard subtasks
        :rtype: dict
        :raises StructureError: if a record has no subtask or an image does
            not have exactly two questions in a subtask
        :raises UndefinedMetricError: for an empty record set
    """

    groups = defaultdict(lambda: defaultdict(list))

    for r in scored_records(records):
        if not r.subtask:
            raise StructureError("Record %s has no MME subtask" % r.query_id)
        groups[r.subtask][r.image_ref].append(is_correct(r))

    if not groups:
        raise UndefinedMetricError("MME score is undefined for an empty record set")

    per_subtask = {}
    for subtask in sorted(groups):
        images = groups[subtask]
        n_questions = 0
        n_correct = 0
        n_both = 0
        for image_ref in sorted(images):
            answers = images[image_ref]
            if len(answers) != QUESTIONS_PER_IMAGE:
                raise StructureError("Image %s has %d questions in subtask '%s', expected %d"
                                     % (image_ref, len(answers), subtask, QUESTIONS_PER_IMAGE))
            n_questions += len(answers)
            n_correct += sum(answers)
            n_both += all(answers)

        acc = 100.0 * n_correct / n_questions
        acc_plus = 100.0 * n_both / len(images)
        per_subtask[subtask] = {"acc": acc, "acc_plus": acc_plus, "score": acc + acc_plus,
                                "n_images": len(images), "n_questions": n_questions}

    totals = {"perception": 0.0, "cognition": 0.0}
    for subtask, row in per_subtask.items():
        category = _category(subtask)
        if category is not None:
            totals[category] += row["score"]

    return {"per_subtask": per_subtask,
            "total": sum(row["score"] for row in per_subtask.values()),
            "perception": totals["perception"],
            "cognition": totals["cognition"]}
