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
Fast/slow control flow.

A query first goes to the switch adapter. If its response does not
contain the trigger phrase the response is the answer (fast mode).
Otherwise the pipeline builds a chain of evidence - region, boxes, mask -
and asks the summarize adapter for the final answer (slow mode).
"""

import time
from typing import NamedTuple

from ..adapters.backends import call_adapter
from ..adapters.protocol import AdapterRequest, AdapterRole, parse_trigger_tail
from ..core import EvidenceChain, FinalAnswer, Mode
from ..utils import AdapterError, DegradedSlowError
from ..utils import get_logger
from .config import ForceMode, PipelineConfig, SummarizeWith
from .trace import QueryTrace

logger = get_logger(__name__)

DEGRADED_SLOW = "degraded_slow"
EMPTY_PROPOSAL = "empty_proposal"
SEGMENT_SKIPPED = "segment_skipped"
FORCED_SLOW = "forced_slow"


class ModeDecision(NamedTuple):
    mode: Mode
    missing: list
    clues: list
    degraded: bool = False


def detect_mode(raw_switch_text, cfg=None, strict=False):
    """ Decides between fast and slow mode from the switch response.

        Slow mode is chosen when the lowercased response contains the
        configured trigger phrase. Missing objects and clues are then read
        from the ``Missing objects: [...]. Context: ...`` tail.

        :param raw_switch_text: Full switch adapter response
        :type raw_switch_text: string
        :param cfg: Pipeline configuration (for the trigger phrase)
        :type cfg: PipelineConfig
        :param strict: Raise instead of degrading when the tail is unparseable
        :type strict: boolean
        :rtype: ModeDecision
        :raises DegradedSlowError: in strict mode, for a trigger without a parseable tail
    """

    cfg = cfg or PipelineConfig()

    if cfg.trigger_phrase not in raw_switch_text.lower():
        return ModeDecision(Mode.FAST, [], [])

    tail = parse_trigger_tail(raw_switch_text)
    if tail is None:
        if strict:
            raise DegradedSlowError("Trigger phrase without a missing-object list: %s" % repr(raw_switch_text))
        return ModeDecision(Mode.SLOW, [], [], True)

    missing, clues = tail
    return ModeDecision(Mode.SLOW, missing, clues)


def _step(backend, request, trace):
    t_start = time.time()
    try:
        response = call_adapter(backend, request)
    except AdapterError as e:
        trace.fail(request, e, t_start, time.time())
        raise
    trace.add(request, response, t_start, time.time())
    return response


def build_chain(query, backend, cfg, missing, clues, trace, flags):
    """ Runs the slow-path proposal steps and returns the evidence chain.

        Calls ProposeRegion, then ProposeBoxes when ``two_stage_proposal``,
        then Segment when ``enable_segmentation``. Segment is skipped when
        there are no boxes or no missing objects to segment. With
        ``enable_proposal`` off no adapter is called and the chain holds
        only clues and missing objects.
    """

    if not cfg.enable_proposal:
        if cfg.enable_segmentation:
            flags.append(SEGMENT_SKIPPED)
        return EvidenceChain(clues=clues, missing=missing)

    region_response = _step(backend, AdapterRequest(AdapterRole.PROPOSE_REGION, query, clues=clues,
                                                    missing=missing), trace)
    region = region_response.region

    if cfg.two_stage_proposal:
        boxes_response = _step(backend, AdapterRequest(AdapterRole.PROPOSE_BOXES, query, clues=clues,
                                                       region=region, missing=missing), trace)
        boxes = boxes_response.boxes
    else:
        boxes = region_response.boxes

    if not boxes:
        logger.info("Query %s: proposals found no boxes", query.query_id)
        flags.append(EMPTY_PROPOSAL)

    mask = None
    if cfg.enable_segmentation:
        if boxes and missing:
            segment_response = _step(backend, AdapterRequest(AdapterRole.SEGMENT, query, clues=clues, region=region,
                                                             boxes=boxes, missing=missing), trace)
            mask = segment_response.mask
        else:
            flags.append(SEGMENT_SKIPPED)

    return EvidenceChain(clues=clues, region=region, boxes=boxes, missing=missing, mask=mask)


def run_query(query, backend, cfg=None, trace=None):
    """ Answers one query in fast or slow mode.

        Fast mode makes exactly one adapter call. Slow mode calls Switch,
        ProposeRegion, ProposeBoxes (if ``two_stage_proposal``), Segment
        (if ``enable_segmentation``) and Summarize, in that order. With
        ``enable_proposal`` off it calls Switch and Summarize only.

        :param query: The query
        :type query: Query
        :param backend: Adapter backend
        :type backend: Backend
        :param cfg: Pipeline configuration
        :type cfg: PipelineConfig
        :param trace: Trace to record the adapter calls into
        :type trace: QueryTrace
        :rtype: FinalAnswer
        :raises AdapterError: naming the failing step
    """

    cfg = cfg or PipelineConfig()
    trace = trace if trace is not None else QueryTrace(query)
    start = time.perf_counter()

    switch = _step(backend, AdapterRequest(AdapterRole.SWITCH, query), trace)
    decision = detect_mode(switch.raw_text, cfg)

    slow = decision.mode == Mode.SLOW
    if cfg.force_mode == ForceMode.FAST:
        slow = False
    elif cfg.force_mode == ForceMode.SLOW:
        slow = True

    if not slow:
        answer = FinalAnswer(switch.raw_text, Mode.FAST, latency_ms=(time.perf_counter() - start) * 1000.0)
        trace.answer = answer
        return answer

    flags = []
    if decision.mode == Mode.FAST:
        flags.append(FORCED_SLOW)
    if decision.degraded:
        logger.warning("Query %s: trigger without parseable tail, continuing with no clues", query.query_id)
        flags.append(DEGRADED_SLOW)

    missing = decision.missing if cfg.use_missing_objects else []
    clues = decision.clues if cfg.use_context_clues else []

    chain = build_chain(query, backend, cfg, missing, clues, trace, flags)

    # the summarize step learns what to attend to from the boxes it is sent
    send_boxes = cfg.summarize_with != SummarizeWith.MASK or chain.mask is None
    summary = _step(backend, AdapterRequest(AdapterRole.SUMMARIZE, query, clues=chain.clues, region=chain.region,
                                            boxes=chain.boxes if send_boxes else (), missing=chain.missing,
                                            chain=chain), trace)

    answer = FinalAnswer(summary.raw_text, Mode.SLOW, chain=chain,
                         latency_ms=(time.perf_counter() - start) * 1000.0, flags=flags)
    trace.answer = answer
    return answer
