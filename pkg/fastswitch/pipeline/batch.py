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

from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

from ..core import Mode
from ..metrics.records import EvalRecord, QueryLabel
from ..utils import InputError, AdapterError, ConfigError
from ..utils import get_logger, is_positive_integer
from .config import PipelineConfig
from .engine import run_query
from .trace import QueryTrace

logger = get_logger(__name__)


def _run_one(query, backend, cfg, label, trace_dir, no_timestamps):
    trace = QueryTrace(query)

    try:
        answer = run_query(query, backend, cfg, trace)
        record = EvalRecord(query_id=query.query_id, predicted=answer.text, gold=label.gold, mode=answer.mode,
                            subtask=label.subtask, image_ref=query.image_ref,
                            latency_ms=0.0 if no_timestamps else answer.latency_ms, flags=answer.flags)
    except (AdapterError, InputError) as e:
        step = getattr(e, "step", None)
        logger.warning("Query %s failed at step %s: %s", query.query_id, step, e)
        record = EvalRecord(query_id=query.query_id, predicted="", gold=label.gold, mode=Mode.FAILED,
                            subtask=label.subtask, image_ref=query.image_ref, failed_step=step, error=str(e))

    if trace_dir is not None:
        path = trace.write(trace_dir, no_timestamps)
        record = replace(record, trace_ref=path)

    return record


def run_batch(queries, backend, cfg=None, parallelism=1, labels=None, trace_dir=None, no_timestamps=False):
    """ Runs queries with at most ``parallelism`` in flight.

        One record is returned per query, in input order. A failing query
        yields a record with mode ``failed`` and the failing step; it never
        aborts the batch.

        :param queries: Queries with unique query_ids
        :type queries: list of Query
        :param backend: Adapter backend, shared by all workers
        :type backend: Backend
        :param cfg: Pipeline configuration
        :type cfg: PipelineConfig
        :param parallelism: Maximum number of concurrent queries
        :type parallelism: integer
        :param labels: Gold answers and subtasks keyed by query_id
        :type labels: dict
        :param trace_dir: Directory for ``<query_id>.trace.json`` files
        :type trace_dir: string
        :param no_timestamps: Zero every timestamp and latency in the output
        :type no_timestamps: boolean
        :rtype: list of EvalRecord
    """

    cfg = cfg or PipelineConfig()
    labels = labels or {}
    queries = list(queries)

    if not is_positive_integer(parallelism):
        raise ConfigError("Expected positive integer value for variable 'parallelism'. Got %s" % str(parallelism))

    ids = [q.query_id for q in queries]
    if len(set(ids)) != len(ids):
        seen = set()
        duplicate = next(i for i in ids if i in seen or seen.add(i))
        raise InputError("Duplicate query_id in batch: %s" % duplicate)

    def work(query):
        return _run_one(query, backend, cfg, labels.get(query.query_id, QueryLabel()), trace_dir, no_timestamps)

    if parallelism == 1 or len(queries) < 2:
        return [work(q) for q in queries]

    with ThreadPoolExecutor(max_workers=parallelism) as executor:
        return list(executor.map(work, queries))
