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
Canonical byte encodings.

Every file and wire payload in fastswitch is UTF-8 JSON with sorted keys
and compact separators, so equal values always produce equal bytes.
"""

import json

from ..utils import ParseError
from .types import EvidenceChain


def canonical_dumps(d):
    """
    Serializes a JSON-compatible value to canonical UTF-8 bytes.
    """
    return json.dumps(d, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


def canonical_loads(data, what="document"):
    """ Parses UTF-8 JSON bytes (or text).

        :raises ParseError: if the payload is not valid JSON
    """

    if isinstance(data, (bytes, bytearray)):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as e:
            raise ParseError("Invalid UTF-8 in %s: %s" % (what, e), what)

    try:
        return json.loads(data)
    except ValueError as e:
        raise ParseError("Malformed JSON in %s: %s" % (what, e), what)


def serialize_chain(chain):
    """ Encodes an evidence chain to canonical bytes.

        :param chain: Evidence chain
        :type chain: EvidenceChain
        :rtype: bytes
    """
    return canonical_dumps(chain.to_dict())


def deserialize_chain(data):
    """ Decodes bytes produced by :func:`serialize_chain`.

        :raises ParseError: naming the offending field for malformed or truncated input
        :rtype: EvidenceChain
    """
    return EvidenceChain.from_dict(canonical_loads(data, "chain"), "chain")


def write_json(path, d, pretty=True):
    with open(path, "wb") as f:
        if pretty:
            f.write(json.dumps(d, sort_keys=True, indent=2, ensure_ascii=False).encode("utf-8"))
            f.write(b"\n")
        else:
            f.write(canonical_dumps(d))


def read_json(path):
    with open(path, "rb") as f:
        return canonical_loads(f.read(), str(path))


def write_jsonl(path_or_file, rows):
    """
    Writes one canonical JSON document per line.
    """
    lines = b"".join(canonical_dumps(r) + b"\n" for r in rows)

    if hasattr(path_or_file, "write"):
        path_or_file.write(lines.decode("utf-8"))
        return

    with open(path_or_file, "wb") as f:
        f.write(lines)


def read_jsonl(path):
    rows = []
    with open(path, "rb") as f:
        for i, line in enumerate(f):
            if not line.strip():
                continue
            rows.append(canonical_loads(line, "%s:%d" % (path, i + 1)))
    return rows
