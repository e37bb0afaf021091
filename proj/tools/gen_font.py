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

"""Regenerates include/farmwatch/grapher/font.hpp from Pillow's built-in bitmap font."""

import pathlib
import sys

from PIL import Image, ImageDraw, ImageFont

WIDTH, HEIGHT = 6, 11


def glyph_rows(font, ch):
    im = Image.new("1", (WIDTH, HEIGHT), 0)
    ImageDraw.Draw(im).text((0, 0), ch, font=font, fill=1)
    rows = []
    for y in range(HEIGHT):
        bits = 0
        for x in range(WIDTH):
            if im.getpixel((x, y)):
                bits |= 1 << (WIDTH - 1 - x)
        rows.append(bits)
    return rows


def main():
    root = pathlib.Path(__file__).resolve().parent.parent
    out = root / "include" / "farmwatch" / "grapher" / "font.hpp"
    font = ImageFont.load_default_imagefont()
    header = (pathlib.Path(__file__).resolve().parent.parent / "LICENSE_HEADER.txt").read_text().splitlines()
    lines = header + [
        "",
        "#pragma once",
        "",
        "// Generated by tools/gen_font.py. Printable ASCII, one byte per row, MSB = leftmost of 6 columns.",
        "",
        "#include <cstdint>",
        "",
        "namespace farmwatch::grapher::font {",
        "",
        f"inline constexpr int kWidth = {WIDTH};",
        f"inline constexpr int kHeight = {HEIGHT};",
        "",
        f"inline constexpr std::uint8_t kGlyphs[95][{HEIGHT}] = {{",
    ]
    for c in range(32, 127):
        rows = ", ".join(f"0x{r:02X}" for r in glyph_rows(font, chr(c)))
        shown = {" ": "space", "\\": "backslash"}.get(chr(c), chr(c))
        lines.append(f"    {{{rows}}},  // {shown}")
    lines += ["};", "", "}  // namespace farmwatch::grapher::font", ""]
    out.write_text("\n".join(lines))
    return 0


if __name__ == "__main__":
    sys.exit(main())
