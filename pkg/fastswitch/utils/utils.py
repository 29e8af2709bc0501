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

import numpy as np

def is_positive(x):
    return (not is_array_like(x) and is_numeric(x) and x > 0)

def is_positive_or_zero(x):
    return (not is_array_like(x) and is_numeric(x) and x >= 0)

def is_array_like(x):
    return isinstance(x, (tuple, list, np.ndarray))

def is_positive_integer(x):
    return (not is_array_like(x) and _is_integer(x) and x > 0)

def is_positive_integer_or_zero(x):
    return (not is_array_like(x) and _is_integer(x) and x >= 0)

def is_string(x):
    return isinstance(x, str)

def is_non_empty_string(x):
    return is_string(x) and len(x.strip()) > 0

def is_dict(x):
    return isinstance(x, dict)

# bools are ints in python, but never valid coordinates or counts
def is_numeric(x):
    return isinstance(x, (float, int, np.integer, np.floating)) and not isinstance(x, bool)

# Doesn't accept floats e.g. 1.0
def _is_integer(x):
    return isinstance(x, (int, np.integer)) and not isinstance(x, bool)

def is_bool(x):
    return isinstance(x, (bool, np.bool_))

def is_fraction(x):
    """
    True for numbers in the closed unit interval.
    """
    return is_numeric(x) and 0 <= x <= 1


# ------------- ** Exceptions ** --------------------------

# Custom exception to raise when we intentionally catch an error
# This way we can test that the right error was raised in test cases
class InputError(Exception):
    pass


class ParseError(InputError):
    """
    Malformed serialized input. ``field`` names the offending field
    using a dotted path, e.g. ``chain.boxes[0].x1``.
    """

    def __init__(self, message, field=None):
        if field is not None:
            message = "%s (field '%s')" % (message, field)
        super(ParseError, self).__init__(message)
        self.field = field


class GeometryError(InputError):
    pass


class ConfigError(InputError):
    pass


class UndefinedMetricError(InputError):
    pass


class StructureError(InputError):
    pass


class DegradedSlowError(InputError):
    """
    The switch response contains the trigger phrase but no parseable
    missing-object tail.
    """
    pass


class AdapterError(Exception):
    """
    Base class for failures while talking to an adapter backend.

    :param message: Human readable description
    :type message: string
    :param step: Pipeline step (adapter role) that failed, if known
    :type step: string
    """

    retryable = False

    def __init__(self, message, step=None):
        super(AdapterError, self).__init__(message)
        self.message = message
        self.step = step

    def __str__(self):
        if self.step is None:
            return self.message
        return "[%s] %s" % (self.step, self.message)


class TransportError(AdapterError):
    retryable = True


class ProtocolError(AdapterError):
    pass


class BackendError(AdapterError):
    pass


class UnsupportedQuestionError(BackendError):
    pass
