"""Bit-level and decimal-precision primitives for 64-bit floats.

Everything else in the package builds on these: exact field decomposition
of the IEEE 754 double layout, significant-digit rounding/counting done in
high-precision decimal arithmetic (never in binary floats, to avoid
double-rounding artifacts), and canonical string rendering.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from decimal import ROUND_FLOOR, ROUND_HALF_EVEN, Decimal, localcontext

EXP_BITS = 11
MANT_BITS = 52
EXP_MASK = (1 << EXP_BITS) - 1          # 2047
MANT_MASK = (1 << MANT_BITS) - 1

# All internal decimal work runs at this precision; the exact expansion of
# any double fits in 767 digits, and sums of two doubles in ~1100.
DEC_PREC = 1200

# Canonical rendering stays positional inside this interval and switches
# to scientific notation outside it.
POSITIONAL_LO = 1e-14
POSITIONAL_HI = 1e15


@dataclass(frozen=True)
class FloatBits:
    """Decomposed IEEE 754 double: sign bit, 11-bit exponent field, 52-bit significand."""

    sign: int
    exponent_field: int
    significand: int

    def __post_init__(self):
        if self.sign not in (0, 1):
            raise ValueError(f"sign must be 0 or 1, got {self.sign}")
        if not 0 <= self.exponent_field <= EXP_MASK:
            raise ValueError(f"exponent_field out of [0, {EXP_MASK}]: {self.exponent_field}")
        if not 0 <= self.significand <= MANT_MASK:
            raise ValueError("significand must fit in 52 bits")

    @property
    def is_nan(self) -> bool:
        return self.exponent_field == EXP_MASK and self.significand != 0

    @property
    def is_infinite(self) -> bool:
        return self.exponent_field == EXP_MASK and self.significand == 0

    def significand_bits(self) -> tuple[int, ...]:
        """The 52 significand bits, most significant (b_51) first."""
        return tuple((self.significand >> i) & 1 for i in range(MANT_BITS - 1, -1, -1))

    def to_uint64(self) -> int:
        return (self.sign << 63) | (self.exponent_field << MANT_BITS) | self.significand


@dataclass(frozen=True)
class CanonicalDecimal:
    """A canonical decimal rendering plus its significant-digit count."""

    digits: str
    sig_count: int


def to_bits(v: float) -> FloatBits:
    """Decompose any 64-bit value (including ±0, ±inf, NaN, subnormals) losslessly."""
    u = struct.unpack("<Q", struct.pack("<d", v))[0]
    return FloatBits(
        sign=u >> 63,
        exponent_field=(u >> MANT_BITS) & EXP_MASK,
        significand=u & MANT_MASK,
    )


def from_bits(bits: FloatBits) -> float:
    """Exact inverse of to_bits; NaN payloads survive bit-for-bit."""
    return struct.unpack("<d", struct.pack("<Q", bits.to_uint64()))[0]


def float_to_uint64(v: float) -> int:
    return struct.unpack("<Q", struct.pack("<d", v))[0]


def uint64_to_float(u: int) -> float:
    return struct.unpack("<d", struct.pack("<Q", u))[0]


def round_sig(v: float, p: int) -> float:
    """Round v to at most p significant decimal digits, half to even.

    Idempotent; non-finite inputs pass through unchanged.
    """
    if not 1 <= p <= 17:
        raise ValueError(f"significant-digit count must be in 1..17, got {p}")
    if v == 0.0 or not math.isfinite(v):
        return v
    with localcontext() as ctx:
        ctx.prec = DEC_PREC
        d = Decimal(v)
        q = d.quantize(Decimal(1).scaleb(d.adjusted() - p + 1), rounding=ROUND_HALF_EVEN)
    return float(q)


def round_sig_bits(v: float, p: int) -> float:
    """Round v to at most p significant binary digits (half to even).

    Companion to round_sig for the bit-precision dataset variant; p in 1..53.
    """
    if not 1 <= p <= 53:
        raise ValueError(f"significant-bit count must be in 1..53, got {p}")
    if v == 0.0 or not math.isfinite(v):
        return v
    m, e = math.frexp(v)           # v = m * 2**e, 0.5 <= |m| < 1
    scaled = m * (1 << p)          # |scaled| in [2**(p-1), 2**p)
    r = round(scaled)              # Python round is half-to-even
    if abs(r) == (1 << p):         # rounded up to the next power of two
        r //= 2
        e += 1
    return math.ldexp(r, e - p)


def count_sig(v: float, base: int = 10) -> int:
    """Significant digit (base 10, capped at 17) or bit (base 2) count.

    Base 10 counts the digits of the exact decimal expansion of the double,
    excluding leading and trailing zeros; base 2 counts the bits of the odd
    part of the significand. count_sig(0) is 1 in either base.
    """
    if base not in (2, 10):
        raise ValueError(f"base must be 2 or 10, got {base}")
    if not math.isfinite(v):
        raise ValueError("count_sig requires a finite value")
    if v == 0.0:
        return 1
    if base == 2:
        u = float_to_uint64(v)
        e = (u >> MANT_BITS) & EXP_MASK
        mant = u & MANT_MASK
        if e != 0:
            mant |= 1 << MANT_BITS  # implicit leading bit of normal numbers
        while mant & 1 == 0:
            mant >>= 1
        return mant.bit_length()
    digits = list(Decimal(v).as_tuple().digits)
    while digits and digits[-1] == 0:
        digits.pop()
    return min(len(digits), 17)


def _render(sign: int, digits: str, adjusted: int, force_positional: bool) -> str:
    """Render a digit string (no zeros at either end) with decimal point at 10**adjusted."""
    prefix = "-" if sign else ""
    if force_positional:
        if adjusted >= len(digits) - 1:
            return prefix + digits + "0" * (adjusted - len(digits) + 1)
        if adjusted >= 0:
            return prefix + digits[: adjusted + 1] + "." + digits[adjusted + 1 :]
        return prefix + "0." + "0" * (-adjusted - 1) + digits
    mantissa = digits[0] if len(digits) == 1 else digits[0] + "." + digits[1:]
    return f"{prefix}{mantissa}e{'+' if adjusted >= 0 else '-'}{abs(adjusted)}"


def format_shortest(v: float) -> str:
    """Shortest decimal string that parses back to v, always positional.

    Used for operand rendering inside the benchmark interval where prompts
    never use scientific notation.
    """
    if math.isnan(v):
        return "NaN"
    if math.isinf(v):
        return "-Infinity" if v < 0 else "Infinity"
    if v == 0.0:
        return "-0" if math.copysign(1.0, v) < 0 else "0"
    d = Decimal(repr(v)).normalize()
    sign, digits, exponent = d.as_tuple()
    ds = "".join(map(str, digits))
    return _render(sign, ds, exponent + len(ds) - 1, force_positional=True)


def format_canonical(v: float) -> CanonicalDecimal:
    """Canonical rendering: shortest string that rounds back to round_sig(v, 15).

    Positional notation inside [1e-14, 1e15), scientific outside; non-finite
    values render as Infinity/-Infinity/NaN with sig_count 0.
    """
    if math.isnan(v):
        return CanonicalDecimal("NaN", 0)
    if math.isinf(v):
        return CanonicalDecimal("-Infinity" if v < 0 else "Infinity", 0)
    w = round_sig(v, 15)
    if w == 0.0:
        s = "-0" if math.copysign(1.0, w) < 0 else "0"
        return CanonicalDecimal(s, 1)
    d = Decimal(repr(w)).normalize()
    sign, digits, exponent = d.as_tuple()
    ds = "".join(map(str, digits))
    positional = POSITIONAL_LO <= abs(w) < POSITIONAL_HI
    return CanonicalDecimal(_render(sign, ds, exponent + len(ds) - 1, positional), len(ds))


def parse_number(text: str) -> float | None:
    """Parse a decimal/JSON-ish number literal; None when unparseable."""
    s = text.strip()
    if not s:
        return None
    if s in ("Infinity", "inf", "+Infinity"):
        return math.inf
    if s in ("-Infinity", "-inf"):
        return -math.inf
    if s == "NaN":
        return math.nan
    try:
        return float(s)
    except ValueError:
        return None


def decimal_of(v: float) -> Decimal:
    """The exact decimal value of a finite double."""
    return Decimal(v)


def round_decimal_sig(d: Decimal, p: int) -> Decimal:
    """Round an exact Decimal to p significant digits, half to even."""
    if d.is_zero():
        return Decimal(0)
    with localcontext() as ctx:
        ctx.prec = DEC_PREC
        return d.quantize(Decimal(1).scaleb(d.adjusted() - p + 1), rounding=ROUND_HALF_EVEN)


def decimal_floor(d: Decimal) -> Decimal:
    with localcontext() as ctx:
        ctx.prec = DEC_PREC
        return d.to_integral_value(rounding=ROUND_FLOOR)
