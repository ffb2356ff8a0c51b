#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
# Copyright 2026 ICH Forge Contributors
"""Character-by-character reference for the corpus cleaning rules.

Independent of the C++ code path: uses Python's unicodedata for NFC and a
literal table for the width mapping. Prints input/expected pairs as JSON so
they can be frozen into the C++ unit tests.
"""
import json
import re
import sys
import unicodedata

HTML_ELEMENTS = {
    "a", "abbr", "address", "area", "article", "aside", "audio", "b", "base",
    "bdi", "bdo", "blockquote", "body", "br", "button", "canvas", "caption",
    "center", "cite", "code", "col", "colgroup", "data", "datalist", "dd",
    "del", "details", "dfn", "dialog", "div", "dl", "dt", "em", "embed",
    "fieldset", "figcaption", "figure", "font", "footer", "form", "h1", "h2",
    "h3", "h4", "h5", "h6", "head", "header", "hr", "html", "i", "iframe",
    "img", "input", "ins", "kbd", "label", "legend", "li", "link", "main",
    "map", "mark", "meta", "meter", "nav", "noscript", "object", "ol",
    "optgroup", "option", "output", "p", "param", "picture", "pre",
    "progress", "q", "rp", "rt", "ruby", "s", "samp", "script", "section",
    "select", "small", "source", "span", "strike", "strong", "style", "sub",
    "summary", "sup", "table", "tbody", "td", "template", "textarea",
    "tfoot", "th", "thead", "time", "title", "tr", "track", "tt", "u", "ul",
    "var", "video", "wbr",
}

WHITESPACE = set("\t\n\x0b\x0c\r \x85\xa0\u1680\u2028\u2029\u202f\u205f\u3000")
WHITESPACE |= {chr(c) for c in range(0x2000, 0x200B)}


def width_map(ch):
    o = ord(ch)
    if 0xFF10 <= o <= 0xFF19 or 0xFF21 <= o <= 0xFF3A or 0xFF41 <= o <= 0xFF5A:
        return chr(o - 0xFEE0)
    return ch


def is_removed_control(ch):
    o = ord(ch)
    return (o < 0x20 or 0x7F <= o <= 0x9F) and ch not in WHITESPACE


WS_CLASS = "".join(sorted(WHITESPACE))
TAG = re.compile("<(/?)([A-Za-z][A-Za-z0-9]*)((?:/|[" + re.escape(WS_CLASS) + "][^<>]*)?)>")


def strip_tags(s):
    while True:
        def repl(m):
            name = m.group(2).lower()
            rest = m.group(3)
            if name not in HTML_ELEMENTS:
                return m.group(0)
            return " "
        out = TAG.sub(repl, s)
        if out == s:
            return out
        s = out


def clean(raw):
    s = "".join(width_map(c) for c in raw)
    s = "".join(c for c in s if not is_removed_control(c))
    s = strip_tags(s)
    out, in_ws = [], False
    for c in s:
        if c in WHITESPACE:
            in_ws = True
            continue
        if in_ws and out:
            out.append(" ")
        in_ws = False
        out.append(c)
    return unicodedata.normalize("NFC", "".join(out))


CASES = [
    "  苗族古歌\u0000<br>流传  ",
    "已清洁文本",
    "ＡＢＣ１２３",
    "苗族，古歌。",
    "Ａ　Ｂ",
    "<p class=\"x\">贵州省</p>黄平县",
    "<b<br>r>x",
    "a<notatag>b",
    "é",
    "e\u0000́",
    "line1\nline2\r\n\tline3",
    "<BR/>大写",
    "<ｂｒ>宽",
    "x y",
    "",
    "\u0007\u0008",
    "1 < 2 and 3 > 2",
]

if __name__ == "__main__":
    json.dump([[c, clean(c)] for c in CASES], sys.stdout, ensure_ascii=True, indent=1)
    print()
