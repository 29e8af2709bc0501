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
Run-length helpers for binary masks.

Runs are counted over the row-major flattening of a ``(height, width)``
raster and alternate between zeros and ones, the first run always
counting zeros (it is 0 when the first pixel is set).
"""

import numpy as np


def rle_encode(array):
    """ Encodes a binary raster into alternating zero/one run counts.

        :param array: Binary raster of shape (height, width)
        :type array: numpy array
        :return: Run counts, first run counts zeros
        :rtype: list of int
    """

    flat = np.asarray(array, dtype=bool).ravel().astype(np.int8)

    if flat.size == 0:
        return [0]

    change_indices = np.flatnonzero(np.diff(flat)) + 1
    positions = np.concatenate(([0], change_indices, [flat.size]))
    runs = np.diff(positions).tolist()

    if flat[0] == 1:
        runs.insert(0, 0)

    return [int(r) for r in runs]


def rle_decode(rle, width, height):
    """ Expands run counts into a boolean raster of shape (height, width).

        :param rle: Run counts, first run counts zeros
        :type rle: sequence of int
        :return: Boolean raster
        :rtype: numpy array
    """

    rle = np.asarray(rle, dtype=np.int64)
    values = (np.arange(rle.size) % 2).astype(bool)
    flat = np.repeat(values, rle)

    return flat.reshape((height, width))


def rle_count(rle):
    """
    Number of set pixels, i.e. the sum of the odd-indexed runs.
    """
    return int(sum(rle[1::2]))


def canonical_rle(rle):
    """ Merges interior zero-length runs into their neighbours and drops a
        trailing zero-length run. The leading run is always kept.

        e.g. [2, 0, 3] -> [5] and [0, 0, 4] -> [4]
    """

    rle = [int(r) for r in rle]
    if not rle:
        return rle

    out = [rle[0]]
    i = 1
    while i < len(rle):
        if rle[i] == 0 and i + 1 < len(rle):
            out[-1] += rle[i + 1]
            i += 2
        elif rle[i] == 0:
            i += 1
        else:
            out.append(rle[i])
            i += 1

    return out
