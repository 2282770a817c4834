"""Locate and extract numbers in free text.

The matcher is a hand-rolled scanner equivalent to the signed pattern

    [-]?(?:(?:0(?!\\.[0-9]))|(?:[0-9]*[.][0-9]+)|(?:[1-9][0-9]*))

with leftmost, non-overlapping, alternation-ordered semantics (the unsigned
variant simply drops the sign). Scientific notation is deliberately not
unified: "1e5" yields the numbers 1 and 5. Literals too wide for a lossless
float64 split into two parts joined by an overflow marker so the stream can
be reassembled byte-for-byte.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

SIGNED_PATTERN = r"[-]?(?:(?:0(?!\.[0-9]))|(?:[0-9]*[.][0-9]+)|(?:[1-9][0-9]*))"
UNSIGNED_PATTERN = r"(?:(?:0(?!\.[0-9]))|(?:[0-9]*[.][0-9]+)|(?:[1-9][0-9]*))"

_DIGITS = set("0123456789")
_NONZERO = set("123456789")

OVERFLOW_SIG_LIMIT = 17
OVERFLOW_SPLIT_AT = 16


@dataclass(frozen=True)
class TextSpan:
    start: int
    end: int
    text: str


@dataclass(frozen=True)
class NumberItem:
    start: int
    end: int
    literal: str
    value: float
    overflow_parts: int = 0  # 0 for plain numbers, 2 when this is half of a split


@dataclass(frozen=True)
class TokenStream:
    source_length: int
    items: tuple


def _match_alternatives(text: str, j: int) -> int | None:
    """End index of the first alternative matching at j, regex order."""
    n = len(text)
    if j >= n:
        return None
    ch = text[j]
    # alternative 1: single 0 not followed by .digit
    if ch == "0" and not (j + 2 < n and text[j + 1] == "." and text[j + 2] in _DIGITS):
        return j + 1
    # alternative 2: [0-9]*[.][0-9]+  (greedy digit run, then dot, then digits)
    k = j
    while k < n and text[k] in _DIGITS:
        k += 1
    if k < n and text[k] == "." and k + 1 < n and text[k + 1] in _DIGITS:
        m = k + 1
        while m < n and text[m] in _DIGITS:
            m += 1
        return m
    # alternative 3: [1-9][0-9]*
    if ch in _NONZERO:
        k = j + 1
        while k < n and text[k] in _DIGITS:
            k += 1
        return k
    return None


def find_numbers(text: str, signed: bool = True) -> list[tuple[tuple[int, int], str]]:
    """All number literal matches as ((start, end), literal), leftmost first."""
    out = []
    i, n = 0, len(text)
    while i < n:
        if signed and text[i] == "-":
            end = _match_alternatives(text, i + 1)
            if end is not None:
                out.append(((i, end), text[i:end]))
                i = end
                continue
        end = _match_alternatives(text, i)
        if end is not None:
            out.append(((i, end), text[i:end]))
            i = end
        else:
            i += 1
    return out


def _sig_digit_positions(literal: str) -> list[int]:
    """Indices of significant digits: leading and trailing zeros excluded."""
    digit_pos = [i for i, c in enumerate(literal) if c in _DIGITS]
    first = next((p for p in digit_pos if literal[p] != "0"), None)
    if first is None:
        return digit_pos[:1]  # all zeros: the single 0 counts
    sig = [p for p in digit_pos if p >= first]
    while len(sig) > 1 and literal[sig[-1]] == "0":
        sig.pop()
    return sig


def _needs_overflow(literal: str) -> bool:
    if len(_sig_digit_positions(literal)) > OVERFLOW_SIG_LIMIT:
        return True
    try:
        v = float(literal)
    except (ValueError, OverflowError):
        return True
    return v in (float("inf"), float("-inf"))


def _split_point(literal: str) -> int:
    """Split after the 16th significant digit; after the 16th digit character
    when fewer significant digits exist (range overflow with trailing zeros)."""
    sig = _sig_digit_positions(literal)
    if len(sig) >= OVERFLOW_SPLIT_AT:
        return sig[OVERFLOW_SPLIT_AT - 1] + 1
    digit_pos = [i for i, c in enumerate(literal) if c in _DIGITS]
    return digit_pos[min(OVERFLOW_SPLIT_AT, len(digit_pos)) - 1] + 1


def _parse_part(part: str) -> float:
    try:
        return float(part)
    except (ValueError, OverflowError):
        return float("inf") if not part.startswith("-") else float("-inf")


def tokenize_with_num(text: str) -> TokenStream:
    """Mixed stream of text spans and number values covering the input exactly."""
    items = []
    cursor = 0

    def flush_text(upto: int):
        nonlocal cursor
        if upto > cursor:
            items.append(TextSpan(cursor, upto, text[cursor:upto]))
        cursor = upto

    for (start, end), literal in find_numbers(text, signed=True):
        flush_text(start)
        if _needs_overflow(literal):
            cut = start + _split_point(literal)
            for s, e in ((start, cut), (cut, end)):
                part = text[s:e]
                items.append(NumberItem(s, e, part, _parse_part(part), overflow_parts=2))
        else:
            items.append(NumberItem(start, end, literal, float(literal)))
        cursor = end
    flush_text(len(text))
    return TokenStream(len(text), tuple(items))


def detokenize(stream: TokenStream) -> str:
    """Byte-identical reconstruction of the source text."""
    parts = []
    cursor = 0
    for item in stream.items:
        if item.start != cursor:
            raise ValueError(f"stream has a gap or overlap at offset {cursor}")
        parts.append(item.text if isinstance(item, TextSpan) else item.literal)
        cursor = item.end
    if cursor != stream.source_length:
        raise ValueError("stream does not cover the full source")
    return "".join(parts)


def stream_to_jsonl(stream: TokenStream) -> str:
    lines = [json.dumps({"type": "meta", "length": stream.source_length})]
    for item in stream.items:
        if isinstance(item, TextSpan):
            lines.append(
                json.dumps({"type": "text", "span": [item.start, item.end], "text": item.text})
            )
        else:
            lines.append(
                json.dumps(
                    {
                        "type": "num",
                        "span": [item.start, item.end],
                        "literal": item.literal,
                        "value": item.value,
                        "overflow": item.overflow_parts,
                    }
                )
            )
    return "\n".join(lines) + "\n"


def stream_from_jsonl(payload: str) -> TokenStream:
    items = []
    length = 0
    for line in payload.splitlines():
        if not line.strip():
            continue
        obj = json.loads(line)
        if obj["type"] == "meta":
            length = obj["length"]
        elif obj["type"] == "text":
            items.append(TextSpan(obj["span"][0], obj["span"][1], obj["text"]))
        else:
            items.append(
                NumberItem(
                    obj["span"][0],
                    obj["span"][1],
                    obj["literal"],
                    obj["value"],
                    obj.get("overflow", 0),
                )
            )
    return TokenStream(length, tuple(items))
