import re

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from numtok.textparse import (
    SIGNED_PATTERN,
    UNSIGNED_PATTERN,
    detokenize,
    find_numbers,
    stream_from_jsonl,
    stream_to_jsonl,
    tokenize_with_num,
)

SIGNED_RE = re.compile(SIGNED_PATTERN)
UNSIGNED_RE = re.compile(UNSIGNED_PATTERN)


def reference_matches(text, signed=True):
    rx = SIGNED_RE if signed else UNSIGNED_RE
    return [((m.start(), m.end()), m.group()) for m in rx.finditer(text)]


def test_find_numbers_examples():
    assert [lit for _, lit in find_numbers("x=0.5, y=-3")] == ["0.5", "-3"]
    assert [lit for _, lit in find_numbers("007")] == ["0", "0", "7"]
    assert [lit for _, lit in find_numbers("1e5")] == ["1", "5"]


def test_find_numbers_unsigned_variant():
    assert [lit for _, lit in find_numbers("y=-3.5", signed=False)] == ["3.5"]


EDGE_TEXTS = [
    "",
    "007",
    "0.5",
    "-3",
    "1e5",
    "00.5",
    "0.5.6",
    ".5",
    "12.",
    "-.5",
    "--3",
    "-0",
    "-0.0",
    "0-0",
    "a-0.25bc.7.",
    "3.14159 and -2.71",
    "price: $1,234.56",
    "0.0.0.0",
    "v1.2.3",
    "1-2-3",
    "-0.5e-7",
    "0..5",
    "10000000000000000000000000000007",
]


@pytest.mark.parametrize("text", EDGE_TEXTS)
def test_scanner_matches_reference_engine(text):
    assert find_numbers(text, signed=True) == reference_matches(text, signed=True)
    assert find_numbers(text, signed=False) == reference_matches(text, signed=False)


@given(st.text(alphabet="0123456789.-abc e,$", max_size=80))
@settings(max_examples=500)
def test_scanner_matches_reference_engine_random(text):
    assert find_numbers(text, signed=True) == reference_matches(text, signed=True)
    assert find_numbers(text, signed=False) == reference_matches(text, signed=False)


@given(st.text(max_size=120))
@settings(max_examples=300)
def test_scanner_matches_reference_any_unicode(text):
    assert find_numbers(text, signed=True) == reference_matches(text, signed=True)


def test_tokenize_simple():
    stream = tokenize_with_num("pi is 3.14")
    kinds = [type(i).__name__ for i in stream.items]
    assert kinds == ["TextSpan", "NumberItem"]
    assert stream.items[1].value == 3.14
    assert stream.items[1].overflow_parts == 0


def test_tokenize_empty():
    assert tokenize_with_num("").items == ()


def test_overflow_split_long_integer():
    lit = "1234567890123456789012345678901234567890" * 10  # 400 digits
    stream = tokenize_with_num(lit)
    nums = [i for i in stream.items if not isinstance(i, str)]
    assert len(stream.items) == 2
    assert all(i.overflow_parts == 2 for i in stream.items)
    assert stream.items[0].literal == lit[:16]
    assert stream.items[0].end == stream.items[1].start
    assert detokenize(stream) == lit


def test_overflow_split_on_significant_digits():
    # 18 significant digits: split lands after the 16th significant one
    lit = "0.000000123456789012345678"
    stream = tokenize_with_num(lit)
    assert [i.literal for i in stream.items] == ["0.0000001234567890123456", "78"]


def test_no_overflow_for_trailing_zeros():
    # one significant digit; exactly representable magnitude
    stream = tokenize_with_num("1" + "0" * 21)
    assert len(stream.items) == 1
    assert stream.items[0].overflow_parts == 0


def test_overflow_range_with_few_sig_digits():
    # 1 followed by 399 zeros: 1 significant digit but beyond float64 range
    lit = "1" + "0" * 399
    stream = tokenize_with_num(lit)
    assert len(stream.items) == 2
    assert all(i.overflow_parts == 2 for i in stream.items)
    assert detokenize(stream) == lit


@given(st.text(alphabet="0123456789.-abc xyz,", max_size=200))
@settings(max_examples=500)
def test_roundtrip_lossless(text):
    assert detokenize(tokenize_with_num(text)) == text


def test_jsonl_serialization_roundtrip():
    text = "a=1.5 b=-0.25 huge=123456789012345678901"
    stream = tokenize_with_num(text)
    restored = stream_from_jsonl(stream_to_jsonl(stream))
    assert restored == stream
    assert detokenize(restored) == text


def test_number_values_reparse():
    from numtok.numcore import format_shortest

    stream = tokenize_with_num("0.1 22 -9.75e2")
    for item in stream.items:
        if hasattr(item, "value"):
            rendered = format_shortest(item.value)
            assert float(rendered) == item.value
