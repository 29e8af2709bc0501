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
Switch-ratio analysis: how often each mode was taken and how accurate
each mode was. Ratios are kept as exact fractions.
"""

from dataclasses import dataclass
from fractions import Fraction

from ..core import Mode
from ..metrics.answers import is_correct
from ..utils import InputError, UndefinedMetricError
from ..utils import is_positive_integer_or_zero


def _ratio(numerator, denominator):
    if denominator == 0:
        return None
    return Fraction(numerator, denominator)


def _as_float(value):
    return float(value) if value is not None else None


@dataclass(frozen=True)
class ModeReport:
    """
    Mode split of a batch. Accuracies of a mode with no queries are None.
    """

    dataset: str
    n_fast: int
    n_slow: int
    fast_correct: int
    slow_correct: int
    n_failed: int = 0

    def __post_init__(self):
        for name in ("n_fast", "n_slow", "fast_correct", "slow_correct", "n_failed"):
            if not is_positive_integer_or_zero(getattr(self, name)):
                raise InputError("Expected non-negative integer for '%s'. Got %s" % (name, repr(getattr(self, name))))
        if self.fast_correct > self.n_fast or self.slow_correct > self.n_slow:
            raise InputError("More correct answers than queries in a mode")
        if self.n_fast + self.n_slow == 0:
            raise UndefinedMetricError("Mode report is undefined without fast or slow queries")

    @property
    def fast_ratio(self):
        return Fraction(self.n_fast, self.n_fast + self.n_slow)

    @property
    def fast_acc(self):
        return _ratio(self.fast_correct, self.n_fast)

    @property
    def slow_acc(self):
        return _ratio(self.slow_correct, self.n_slow)

    @property
    def overall_acc(self):
        return Fraction(self.fast_correct + self.slow_correct, self.n_fast + self.n_slow)

    def to_dict(self):
        d = {"dataset": self.dataset,
             "n_fast": self.n_fast,
             "n_slow": self.n_slow,
             "n_failed": self.n_failed,
             "fast_correct": self.fast_correct,
             "slow_correct": self.slow_correct,
             "fast_ratio": float(self.fast_ratio),
             "overall_acc": float(self.overall_acc)}
        # absent rather than null for a mode nobody took
        for name in ("fast_acc", "slow_acc"):
            value = _as_float(getattr(self, name))
            if value is not None:
                d[name] = value
        return d


def mode_report_from_counts(n_fast, n_slow, fast_correct, slow_correct, dataset=""):
    return ModeReport(dataset, n_fast, n_slow, fast_correct, slow_correct)


def mode_report(records, dataset=""):
    """ Counts fast and slow queries and their correct answers.

        Failed queries are counted separately and left out of the ratios.

        :param records: Evaluation records with gold answers or an explicit
            ``correct`` flag
        :type records: list of EvalRecord
        :param dataset: Name echoed in the report
        :type dataset: string
        :rtype: ModeReport
        :raises InputError: if a record carries no correctness information
    """

    counts = {Mode.FAST: [0, 0], Mode.SLOW: [0, 0]}
    n_failed = 0

    for r in records:
        if r.failed:
            n_failed += 1
            continue
        if r.correct is None and not r.is_scored:
            raise InputError("Record %s has neither gold answers nor a correctness flag" % r.query_id)
        counts[r.mode][0] += 1
        counts[r.mode][1] += int(is_correct(r))

    return ModeReport(dataset, counts[Mode.FAST][0], counts[Mode.SLOW][0],
                      counts[Mode.FAST][1], counts[Mode.SLOW][1], n_failed)
