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
Metric report assembly for ``fastswitch evaluate``.
"""

from collections import Counter

from ..utils import InputError
from ..utils import get_logger
from .answers import exact_match_accuracy, is_correct, normalize_answer, pope_f1, scored_records
from .mme import mme_score
from .segmentation import segmentation_report

logger = get_logger(__name__)

RECORD_METRICS = ("accuracy", "pope", "mme")


def _is_binary(records):
    return all(normalize_answer(r.gold[0]) in ("yes", "no") for r in records)


def _applicable(records):
    metrics = ["accuracy"]
    if records and _is_binary(records):
        metrics.append("pope")
    if records and all(r.subtask for r in records):
        metrics.append("mme")
    return metrics


def record_report(records, metrics=None):
    """ Scores evaluation records.

        :param records: Evaluation records
        :type records: list of EvalRecord
        :param metrics: Names from ``accuracy``, ``pope`` and ``mme``. By
            default every metric the records support is computed.
        :type metrics: list of strings
        :return: The metric values plus record, failure and mode counts
        :rtype: dict
    """

    records = list(records)
    scored = scored_records(records)

    if metrics is None:
        metrics = _applicable(scored)

    for name in metrics:
        if name not in RECORD_METRICS:
            raise InputError("Unknown metric %s. Expected one of %s" % (repr(name), ", ".join(RECORD_METRICS)))

    modes = Counter(r.mode.value for r in records)
    report = {"n_records": len(records),
              "n_scored": len(scored),
              "n_failed": sum(1 for r in records if r.failed),
              "modes": {mode: modes[mode] for mode in sorted(modes)}}

    if "accuracy" in metrics:
        report["accuracy"] = exact_match_accuracy(scored)
        report["n_correct"] = sum(1 for r in scored if is_correct(r))
    if "pope" in metrics:
        report["pope"] = pope_f1(scored)
    if "mme" in metrics:
        report["mme"] = mme_score(scored)

    logger.info("Scored %d records with %s", len(scored), ", ".join(metrics))
    return report


def mask_report(pairs):
    """
    CIoU, GIoU and the per-image intersection/union counts.
    """
    return segmentation_report(pairs)
