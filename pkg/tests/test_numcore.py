import math
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from numtok.numcore import (
    FloatBits,
    count_sig,
    float_to_uint64,
    format_canonical,
    format_shortest,
    from_bits,
    round_sig,
    round_sig_bits,
    to_bits,
    uint64_to_float,
)

SPECIALS = [
    0.0,
    -0.0,
    math.inf,
    -math.inf,
    math.nan,
    5e-324,                 # smallest subnormal
    2.2250738585072009e-308,  # largest subnormal
    2.2250738585072014e-308,  # smallest normal
    1.7976931348623157e308,   # largest finite
    1.0,
    -2.0,
]


def test_to_bits_one():
    b = to_bits(1.0)
    assert (b.sign, b.exponent_field, b.significand) == (0, 1023, 0)


def test_to_bits_negative_zero():
    b = to_bits(-0.0)
    assert (b.sign, b.exponent_field, b.significand) == (1, 0, 0)


def test_to_bits_half():
    # frozen from the hardware reinterpretation of the 64-bit pattern
    b = to_bits(0.5)
    assert (b.sign, b.exponent_field, b.significand) == (0, 1022, 0)


def test_from_bits_examples():
    assert from_bits(FloatBits(0, 1023, 0)) == 1.0
    assert from_bits(FloatBits(1, 1024, 0)) == -2.0
    assert from_bits(FloatBits(0, 2047, 0)) == math.inf


def test_roundtrip_specials_bitwise():
    for v in SPECIALS:
        u = float_to_uint64(v)
        assert to_bits(v).to_uint64() == u
        assert float_to_uint64(from_bits(to_bits(v))) == u


def test_nan_payload_preserved():
    weird_nan = uint64_to_float(0x7FF8DEADBEEF0001)
    assert math.isnan(weird_nan)
    assert float_to_uint64(from_bits(to_bits(weird_nan))) == 0x7FF8DEADBEEF0001


@given(st.integers(min_value=0, max_value=2**64 - 1))
def test_roundtrip_any_pattern(u):
    v = uint64_to_float(u)
    assert to_bits(v).to_uint64() == u


def test_significand_bits_order():
    # 1.5 = 1.1b: top significand bit set, rest clear
    bits = to_bits(1.5).significand_bits()
    assert bits[0] == 1 and all(b == 0 for b in bits[1:])
    assert len(bits) == 52


def test_round_sig_examples():
    assert round_sig(123456.0, 3) == 123000.0
    assert round_sig(0.001999, 2) == 0.002
    v = 9.99999999999999e14
    w = round_sig(v, 15)
    assert round_sig(w, 15) == w


def test_round_sig_half_even():
    assert round_sig(1.25, 2) == 1.2
    assert round_sig(1.35, 2) == 1.4  # 1.35 is actually 1.350000...0444 in binary
    assert round_sig(0.125, 2) == 0.12


def test_round_sig_rejects_bad_p():
    with pytest.raises(ValueError):
        round_sig(1.0, 0)
    with pytest.raises(ValueError):
        round_sig(1.0, 18)


def test_round_sig_preserves_signed_zero():
    assert math.copysign(1.0, round_sig(-0.0, 3)) == -1.0


@given(
    st.floats(allow_nan=False, allow_infinity=False, min_value=-1e300, max_value=1e300),
    st.integers(min_value=1, max_value=17),
)
@settings(max_examples=300)
def test_round_sig_idempotent(v, p):
    w = round_sig(v, p)
    assert round_sig(w, p) == w


@given(
    st.floats(allow_nan=False, allow_infinity=False, min_value=1e-14, max_value=1e15),
    st.integers(min_value=1, max_value=17),
)
@settings(max_examples=300)
def test_round_sig_digit_budget(v, p):
    w = round_sig(v, p)
    assert count_sig(w, 10) <= p or count_sig(w, 10) == 17
    # the shortest rendering never needs more than p digits
    rendered = format_shortest(w).replace("-", "").replace(".", "").strip("0")
    assert len(rendered) <= p


def test_round_sig_bits():
    assert round_sig_bits(0.75, 2) == 0.75
    assert round_sig_bits(0.875, 2) == 1.0  # 0.111b -> 1.0b (half-even on 0.11|1)
    assert round_sig_bits(5.0, 2) == 5.0 - 1.0  # 101b to 2 bits: 10.0b rounds half-even -> 100b
    with pytest.raises(ValueError):
        round_sig_bits(1.0, 0)


@given(
    st.floats(allow_nan=False, allow_infinity=False, min_value=-1e300, max_value=1e300),
    st.integers(min_value=1, max_value=53),
)
@settings(max_examples=300)
def test_round_sig_bits_idempotent(v, p):
    w = round_sig_bits(v, p)
    assert round_sig_bits(w, p) == w
    if w != 0:
        assert count_sig(w, 2) <= p


def test_count_sig_examples():
    assert count_sig(1200.0, 10) == 2
    assert count_sig(0.75, 2) == 2
    # frozen from the exact decimal expansion of the double nearest 1/3
    # (54 significant digits, capped at the 17-digit budget)
    assert count_sig(1 / 3, 10) == 17


def test_count_sig_zero_is_one():
    assert count_sig(0.0, 10) == 1
    assert count_sig(0.0, 2) == 1
    assert count_sig(-0.0, 10) == 1


def test_count_sig_exact_values():
    assert count_sig(0.5, 10) == 1
    assert count_sig(123.456, 10) == 17  # not exactly representable
    assert count_sig(1.0, 2) == 1
    assert count_sig(5.0, 2) == 3  # 101b


def test_format_canonical_examples():
    assert format_canonical(0.5).digits == "0.5"
    assert format_canonical(-0.0).digits == "-0"
    # frozen via the decimal oracle: 0.1 + 0.2 rounds to 0.3 at 15 digits
    assert format_canonical(0.1 + 0.2).digits == "0.3"


def test_format_canonical_nonfinite():
    assert format_canonical(math.inf).digits == "Infinity"
    assert format_canonical(-math.inf).digits == "-Infinity"
    assert format_canonical(math.nan).digits == "NaN"


def test_format_canonical_notation_switch():
    assert format_canonical(1e15).digits == "1e+15"
    assert format_canonical(999999999999999.0).digits == "999999999999999"
    assert format_canonical(1e-14).digits == "0.00000000000001"
    assert format_canonical(5e-15).digits == "5e-15"
    assert format_canonical(-1.5e20).digits == "-1.5e+20"


def test_format_shortest_positional():
    assert format_shortest(1e15) == "1000000000000000"
    assert format_shortest(0.001) == "0.001"
    assert format_shortest(-12.5) == "-12.5"
    assert format_shortest(0.0) == "0"


@given(st.floats(allow_nan=False, allow_infinity=False, min_value=-1e300, max_value=1e300))
@settings(max_examples=300)
def test_format_canonical_reparses_to_round15(v):
    c = format_canonical(v)
    parsed = float(c.digits)
    assert round_sig(parsed, 15) == round_sig(v, 15)
    assert c.sig_count <= 15


@given(st.floats(allow_nan=False, allow_infinity=False))
@settings(max_examples=300)
def test_format_shortest_roundtrips(v):
    assert float(format_shortest(v)) == v
