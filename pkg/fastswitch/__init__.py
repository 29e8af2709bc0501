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
fastswitch main module
======================

Provides
  1. core types, masks and canonical serialization
  2. adapter protocol, backends and a mock adapter server
  3. the fast/slow pipeline and batch runner
  4. switching dataset construction
  5. metrics and mode/runtime analysis
"""

from . import utils
from . import core
from . import adapters
from . import data
from . import pipeline
from . import metrics
from . import analysis
from .core import Query, FinalAnswer, EvidenceChain, Mode
from .pipeline import PipelineConfig, run_query, run_batch

__author__ = "The fastswitch developers"
__copyright__ = "Copyright 2024"
__license__ = "MIT"
__version__ = "0.1.0"
__status__ = "Beta"
