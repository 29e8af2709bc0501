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
Logging setup shared by all fastswitch modules.

The verbosity is read once from the ``FAST_PIPELINE_LOG`` environment
variable (``DEBUG``, ``INFO``, ``WARNING`` or ``ERROR``).
"""

import logging
import os
import sys

LOG_ENV_VARIABLE = "FAST_PIPELINE_LOG"
ROOT_LOGGER_NAME = "fastswitch"
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

_configured = False


def _level_from_env(default="WARNING"):
    name = os.environ.get(LOG_ENV_VARIABLE, default).strip().upper()
    level = logging.getLevelName(name)
    if not isinstance(level, int):
        return logging.getLevelName(default.upper())
    return level


def configure(level=None, stream=None, default="WARNING"):
    """
    Install a single line-delimited stream handler on the package logger.

    :param level: Logging level. Defaults to the value of ``FAST_PIPELINE_LOG``.
    :type level: int or string
    :param stream: Stream to write to. Defaults to stderr.
    :param default: Level used when ``FAST_PIPELINE_LOG`` is unset or unknown.
    :type default: string
    """
    global _configured

    root = logging.getLogger(ROOT_LOGGER_NAME)

    if level is None:
        level = _level_from_env(default)
    root.setLevel(level)

    if not _configured:
        handler = logging.StreamHandler(stream or sys.stderr)
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        root.addHandler(handler)
        root.propagate = False
        _configured = True

    return root


def get_logger(name):
    """
    Returns a logger in the ``fastswitch`` namespace.
    """
    if not _configured:
        configure()
    if not name.startswith(ROOT_LOGGER_NAME):
        name = "%s.%s" % (ROOT_LOGGER_NAME, name)
    return logging.getLogger(name)
