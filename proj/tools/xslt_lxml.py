#!/usr/bin/env python3
# Copyright 2026 The farmwatch Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Minimal XSLT processor: xslt_lxml.py STYLESHEET [INPUT|-]

Reads the document from INPUT (or standard input for "-" or when omitted),
applies STYLESHEET and writes the result to standard output. Same calling
convention as `xsltproc STYLESHEET -`.
"""

import sys

from lxml import etree


def main(argv):
    if len(argv) not in (2, 3):
        sys.stderr.write("usage: xslt_lxml.py STYLESHEET [INPUT|-]\n")
        return 2
    source = sys.stdin.buffer if len(argv) == 2 or argv[2] == "-" else open(argv[2], "rb")
    try:
        transform = etree.XSLT(etree.parse(argv[1]))
        result = transform(etree.parse(source))
    except (etree.XMLSyntaxError, etree.XSLTError, OSError) as e:
        sys.stderr.write(f"xslt_lxml: {e}\n")
        return 1
    sys.stdout.buffer.write(bytes(result))
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
