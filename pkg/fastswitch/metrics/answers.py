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
Answer-level metrics: exact-match accuracy and POPE precision/recall/F1.
"""

import string

import numpy as np
from sklearn.metrics import confusion_matrix

from ..utils import UndefinedMetricError
from ..utils import get_logger

logger = get_logger(__name__)

_STRIP = string.punctuation + string.whitespace


def normalize_answer(text):
    """ Lowercases, trims whitespace and strips leading and trailing
        punctuation.

        >>> normalize_answer("  Red. ")
        'red'
    """
    return text.strip().lower().strip(_STRIP)


def is_correct(record):
    """
    True if the normalized prediction equals any normalized gold answer.
    An explicit ``record.correct`` takes precedence.
    """
    if record.correct is not None:
        return record.correct
    predicted = normalize_answer(record.predicted)
    return any(predicted == normalize_answer(g) for g in record.gold)


def scored_records(records):
    records = list(records)
    scored = [r for r in records if r.is_scored]
    if len(scored) < len(records):
        logger.info("Ignoring %d records without gold answers", len(records) - len(scored))
    return scored


def exact_match_accuracy(records):
    """ Fraction of scored records whose normalized prediction matches a
        normalized gold answer. Failed queries count as wrong.

        :param records: Evaluation records
        :type records: list of EvalRecord
        :rtype: float
        :raises UndefinedMetricError: if there are no scored records
    """

    scored = scored_records(records)
    if not scored:
        raise UndefinedMetricError("Exact-match accuracy is undefined for an empty record set")

    return sum(1 for r in scored if is_correct(r)) / len(scored)


def _binary(text):
    answer = normalize_answer(text)
    if answer in ("yes", "no"):
        return answer
    return None


def pope_f1(records):
    """ Precision, recall and F1 of yes/no answers with "yes" as the
        positive class. Records whose prediction or gold is not yes/no are
        excluded and listed under ``invalid``.

        F1 is 2PR/(P+R), and 0 when P+R is 0. Precision (recall) is 0
        when there are no positive predictions (no positive golds).

        :param records: Evaluation records
        :type records: list of EvalRecord
        :return: precision, recall, f1, accuracy, yes_ratio, the confusion
            counts tp/fp/fn/tn and the invalid query_ids
        :rtype: dict
        :raises UndefinedMetricError: if no valid yes/no record remains
    """

    y_true = []
    y_pred = []
    invalid = []

    for r in scored_records(records):
        gold = _binary(r.gold[0])
        predicted = _binary(r.predicted)
        if gold is None or predicted is None:
            invalid.append(r.query_id)
            continue
        y_true.append(gold)
        y_pred.append(predicted)

    if invalid:
        logger.warning("Excluding %d records with non yes/no answers from POPE scoring", len(invalid))
    if not y_true:
        raise UndefinedMetricError("POPE F1 is undefined without valid yes/no records")

    tn, fp, fn, tp = (int(v) for v in confusion_matrix(y_true, y_pred, labels=["no", "yes"]).ravel())

    precision = tp / (tp + fp) if tp + fp > 0 else 0.0
    recall = tp / (tp + fn) if tp + fn > 0 else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0

    n = len(y_true)

    return {
        "precision": precision,
        "recall": recall,
        "f1": f1,
        "accuracy": (tp + tn) / n,
        "yes_ratio": float(np.mean([p == "yes" for p in y_pred])),
        "tp": tp,
        "fp": fp,
        "fn": fn,
        "tn": tn,
        "n": n,
        "invalid": sorted(invalid),
    }
