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
Runtime of a dual-mode system modelled as a mixture of the two pure
modes, weighted by how often the fast mode is taken.
"""

from dataclasses import dataclass

import numpy as np

from ..core import Mode
from ..utils import InputError, UndefinedMetricError
from ..utils import is_positive, is_fraction, is_dict

SYSTEM_1 = "System 1 Only"
SYSTEM_2 = "System 2 Only"
MIXED = "Fast/Slow Switching"

ROW_KEYS = (("fast", SYSTEM_1), ("slow", SYSTEM_2), ("mixed", MIXED))


@dataclass(frozen=True)
class RuntimeModel:
    t_fast_ms: float
    t_slow_ms: float
    p_fast: float

    def __post_init__(self):
        if not is_positive(self.t_fast_ms) or not is_positive(self.t_slow_ms):
            raise InputError("Expected positive latencies. Got %s and %s" % (str(self.t_fast_ms), str(self.t_slow_ms)))
        if not is_fraction(self.p_fast):
            raise InputError("Expected fast-mode ratio in [0, 1]. Got %s" % str(self.p_fast))

    def to_dict(self):
        return {"t_fast_ms": float(self.t_fast_ms), "t_slow_ms": float(self.t_slow_ms), "p_fast": float(self.p_fast)}


def expected_runtime(model):
    """ Mean per-query latency: ``p_fast * t_fast + (1 - p_fast) * t_slow``.

        >>> expected_runtime(RuntimeModel(734, 2938, 0.418))  # doctest: +ELLIPSIS
        2016.72...
    """
    return model.p_fast * model.t_fast_ms + (1.0 - model.p_fast) * model.t_slow_ms


def runtime_model_from_records(records):
    """ Estimates the runtime model from batch records: the mean latency of
        each mode and the share of fast queries. Failed queries are ignored.

        :rtype: RuntimeModel
        :raises UndefinedMetricError: if either mode has no records or only
            zero latencies
    """

    latencies = {Mode.FAST: [], Mode.SLOW: []}
    for r in records:
        if not r.failed:
            latencies[r.mode].append(r.latency_ms)

    for mode, values in latencies.items():
        if not values:
            raise UndefinedMetricError("No %s-mode records to estimate latency from" % mode.value)
        if not np.mean(values) > 0:
            raise UndefinedMetricError("No measured %s-mode latency, records carry zero timings" % mode.value)

    n_fast = len(latencies[Mode.FAST])
    n_slow = len(latencies[Mode.SLOW])

    return RuntimeModel(float(np.mean(latencies[Mode.FAST])), float(np.mean(latencies[Mode.SLOW])),
                        n_fast / (n_fast + n_slow))


def compare_modes(t_fast, t_slow, p_fast, results=None, measured=None):
    """ Runtime table for fast-only, slow-only and switching systems.

        :param t_fast: Fast-mode latency in milliseconds
        :param t_slow: Slow-mode latency in milliseconds
        :param p_fast: Share of queries answered in fast mode
        :param results: Optional result (e.g. accuracy) per row, keyed by
            ``fast``, ``slow`` and ``mixed``. Passed through unchanged.
        :type results: dict
        :param measured: Optional measured runtime per row, same keys. Rows
            with a measured value also get the relative gap of the model.
        :type measured: dict
        :return: One dict per row with ``system``, ``runtime_ms`` and the
            optional ``result``, ``measured_ms`` and ``gap``
        :rtype: list of dicts
    """

    model = RuntimeModel(t_fast, t_slow, p_fast)
    results = results or {}
    measured = measured or {}

    for name, value in (("results", results), ("measured", measured)):
        if not is_dict(value) or not set(value) <= set(k for k, _ in ROW_KEYS):
            raise InputError("Expected %s keyed by fast, slow and mixed. Got %s" % (name, repr(value)))

    runtimes = {"fast": float(model.t_fast_ms), "slow": float(model.t_slow_ms), "mixed": expected_runtime(model)}

    rows = []
    for key, system in ROW_KEYS:
        row = {"system": system, "runtime_ms": runtimes[key]}
        if key in results:
            row["result"] = results[key]
        if measured.get(key) is not None:
            row["measured_ms"] = float(measured[key])
            row["gap"] = (runtimes[key] - row["measured_ms"]) / row["measured_ms"]
        rows.append(row)

    return rows


def _cell(value, column):
    if value is None:
        return "-"
    if column == "gap":
        return "%+.1f%%" % (100.0 * value)
    if column == "result" and isinstance(value, float):
        return "%g" % value
    if isinstance(value, float):
        return "%.1f" % value
    return str(value)


def format_table(rows):
    """
    Aligned plain-text rendering of :func:`compare_modes` rows.
    """

    columns = ["system", "runtime_ms"]
    for optional in ("result", "measured_ms", "gap"):
        if any(optional in row for row in rows):
            columns.append(optional)

    cells = [columns] + [[_cell(row.get(c), c) for c in columns] for row in rows]
    widths = [max(len(line[i]) for line in cells) for i in range(len(columns))]

    lines = []
    for line in cells:
        lines.append("  ".join(c.ljust(w) if i == 0 else c.rjust(w)
                               for i, (c, w) in enumerate(zip(line, widths))).rstrip())
    return "\n".join(lines) + "\n"
