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

from ..utils import GeometryError
from .types import BBox, Mask


def mask_from_bbox(box):
    """ Rasterizes a bounding box into a mask of its image size.

        The mask has exactly ``box.area`` set pixels, all inside the box.
        Runs are computed row by row, so no raster is allocated.

        :param box: Bounding box
        :type box: BBox
        :return: Mask of shape (box.image_h, box.image_w)
        :rtype: Mask
    """

    w, h = box.image_w, box.image_h

    if box.width == w and box.height == h:
        return Mask(w, h, (0, w * h))

    runs = [box.y0 * w + box.x0]
    gap = w - box.width

    for row in range(box.height):
        runs.append(box.width)
        if row < box.height - 1:
            runs.append(gap)

    runs.append((h - box.y1) * w + (w - box.x1))

    return Mask(w, h, tuple(runs))


def union_masks(masks):
    """
    Pixel-wise union of masks that share one size.
    """

    masks = list(masks)
    if not masks:
        raise GeometryError("Expected at least one mask")

    shape = (masks[0].width, masks[0].height)
    raster = np.zeros((shape[1], shape[0]), dtype=bool)

    for m in masks:
        if (m.width, m.height) != shape:
            raise GeometryError("Mask sizes differ: %s x %s and %s x %s" % (shape + (m.width, m.height)))
        raster |= m.to_array()

    return Mask.from_array(raster)


def mask_support_box(mask):
    """
    Tight bounding box around the set pixels of ``mask``, or None for an empty mask.
    """

    raster = mask.to_array()
    ys, xs = np.nonzero(raster)

    if xs.size == 0:
        return None

    return BBox(int(xs.min()), int(ys.min()), int(xs.max()) + 1, int(ys.max()) + 1, mask.width, mask.height)


def mask_within_boxes(mask, boxes):
    """
    True if every set pixel of ``mask`` lies inside at least one of ``boxes``.
    """

    raster = mask.to_array()
    allowed = np.zeros_like(raster)

    for b in boxes:
        allowed[b.y0:b.y1, b.x0:b.x1] = True

    return not np.any(raster & ~allowed)
