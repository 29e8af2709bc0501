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

import enum

from ..adapters.protocol import TRIGGER_PHRASE
from ..core.serialization import read_json
from ..utils import ConfigError
from ..utils import is_bool, is_dict, is_non_empty_string


class SummarizeWith(str, enum.Enum):
    BOXES = "boxes"
    MASK = "mask"
    BOTH = "both"


class ForceMode(str, enum.Enum):
    AUTO = "auto"
    FAST = "fast"
    SLOW = "slow"


class PipelineConfig(object):
    """
    Settings of the fast/slow pipeline.

    :param enable_proposal: Run the region and box proposal steps. Without them the
        summarize step sees only the clues and missing objects
    :type enable_proposal: boolean
    :param two_stage_proposal: Ask for a region and then for boxes inside it (True),
        or take boxes from the region proposal in a single call (False)
    :type two_stage_proposal: boolean
    :param enable_segmentation: Run the segment step after box proposal
    :type enable_segmentation: boolean
    :param trigger_phrase: Substring of the lowercased switch response that activates slow mode
    :type trigger_phrase: string
    :param summarize_with: Evidence the summarize step attends to: 'boxes', 'mask' or 'both'
    :type summarize_with: string
    :param force_mode: 'auto' follows the switch adapter, 'fast' never builds evidence
        and 'slow' always does
    :type force_mode: string
    :param use_missing_objects: Pass the switch's missing objects to later steps
    :type use_missing_objects: boolean
    :param use_context_clues: Pass the switch's context clues to later steps
    :type use_context_clues: boolean
    """

    FIELDS = ("enable_proposal", "two_stage_proposal", "enable_segmentation", "trigger_phrase", "summarize_with",
              "force_mode", "use_missing_objects", "use_context_clues")

    def __init__(self, two_stage_proposal=True, enable_segmentation=True, trigger_phrase=TRIGGER_PHRASE,
                 summarize_with="both", force_mode="auto", use_missing_objects=True, use_context_clues=True,
                 enable_proposal=True):

        self._set_enable_proposal(enable_proposal)
        self._set_two_stage_proposal(two_stage_proposal)
        self._set_enable_segmentation(enable_segmentation)
        self._set_trigger_phrase(trigger_phrase)
        self._set_summarize_with(summarize_with)
        self._set_force_mode(force_mode)
        self._set_use_missing_objects(use_missing_objects)
        self._set_use_context_clues(use_context_clues)

    def _set_flag(self, name, value):
        if not is_bool(value):
            raise ConfigError("Expected boolean value for variable '%s'. Got %s" % (name, str(value)))
        setattr(self, name, bool(value))

    def _set_enable_proposal(self, enable_proposal):
        self._set_flag("enable_proposal", enable_proposal)

    def _set_two_stage_proposal(self, two_stage_proposal):
        self._set_flag("two_stage_proposal", two_stage_proposal)

    def _set_enable_segmentation(self, enable_segmentation):
        self._set_flag("enable_segmentation", enable_segmentation)

    def _set_use_missing_objects(self, use_missing_objects):
        self._set_flag("use_missing_objects", use_missing_objects)

    def _set_use_context_clues(self, use_context_clues):
        self._set_flag("use_context_clues", use_context_clues)

    def _set_trigger_phrase(self, trigger_phrase):
        if not is_non_empty_string(trigger_phrase):
            raise ConfigError("Expected non-empty string for variable 'trigger_phrase'. Got %s" % repr(trigger_phrase))
        # matching is done on lowercased text
        self.trigger_phrase = trigger_phrase.lower()

    def _set_summarize_with(self, summarize_with):
        try:
            self.summarize_with = SummarizeWith(getattr(summarize_with, "value", str(summarize_with).lower()))
        except ValueError:
            raise ConfigError("Expected 'boxes', 'mask' or 'both' for variable 'summarize_with'. Got %s"
                              % str(summarize_with))

    def _set_force_mode(self, force_mode):
        try:
            self.force_mode = ForceMode(getattr(force_mode, "value", str(force_mode).lower()))
        except ValueError:
            raise ConfigError("Expected 'auto', 'fast' or 'slow' for variable 'force_mode'. Got %s" % str(force_mode))

    def slow_call_count(self):
        """
        Adapter calls made by a slow-path query with non-empty proposals.
        Without proposals there is nothing to segment: Switch and Summarize only.
        """
        if not self.enable_proposal:
            return 2
        return 2 + int(self.two_stage_proposal) + int(self.enable_segmentation) + 1

    def replace(self, **kwargs):
        d = self.to_dict()
        d.update(kwargs)
        return PipelineConfig(**d)

    def to_dict(self):
        return {
            "enable_proposal": self.enable_proposal,
            "two_stage_proposal": self.two_stage_proposal,
            "enable_segmentation": self.enable_segmentation,
            "trigger_phrase": self.trigger_phrase,
            "summarize_with": self.summarize_with.value,
            "force_mode": self.force_mode.value,
            "use_missing_objects": self.use_missing_objects,
            "use_context_clues": self.use_context_clues,
        }

    @classmethod
    def from_dict(cls, d):
        if not is_dict(d):
            raise ConfigError("Expected pipeline configuration as a JSON object. Got %s" % type(d).__name__)
        unknown = sorted(set(d) - set(cls.FIELDS))
        if unknown:
            raise ConfigError("Unknown pipeline configuration keys: %s" % ", ".join(unknown))
        return cls(**d)

    def __eq__(self, other):
        return isinstance(other, PipelineConfig) and self.to_dict() == other.to_dict()

    def __ne__(self, other):
        return not self.__eq__(other)

    def __repr__(self):
        return "PipelineConfig(%s)" % ", ".join("%s=%r" % (k, v) for k, v in sorted(self.to_dict().items()))


def load_config(path):
    """
    Reads a PipelineConfig from a JSON file. A ``pipeline`` key, if present,
    holds the settings.
    """
    d = read_json(path)
    if is_dict(d) and "pipeline" in d:
        d = d["pipeline"]
    return PipelineConfig.from_dict(d)
