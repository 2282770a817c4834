"""Single-token number representations and their decoders.

Four families live here: the bit-payload scheme built on the IEEE 754
double layout (with its reciprocal concatenation, ablation axes, and
sigmoid number-head loss), the sinusoidal digit-frequency scheme, the
log-rescaled scalar scheme, and token accounting for plain digit
tokenizers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal, localcontext

import numpy as np

from .numcore import (
    DEC_PREC,
    float_to_uint64,
    round_sig,
    uint64_to_float,
)

BIT_PAYLOAD = 64
DIGIT_PAYLOAD = 20  # sign dim + 2 exponent digits + 17 significand digits
DIGIT_EXP_OFFSET = 50

COMBINE_STRATEGIES = ("sum", "product", "concat", "zero_pad", "weighted", "weighted_sum")


@dataclass(frozen=True)
class EmbeddingVector:
    """A fixed-width model-input vector representing one number."""

    values: np.ndarray
    scheme: str

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64))


@dataclass(frozen=True)
class BitTokenConfig:
    include_reciprocal: bool = True
    base: int = 2
    combine: str = "sum"
    d_model: int = 768

    def __post_init__(self):
        if self.base not in (2, 10):
            raise ValueError(f"base must be 2 or 10, got {self.base}")
        if self.combine not in COMBINE_STRATEGIES:
            raise ValueError(f"unknown combine strategy {self.combine!r}")
        if self.payload_width > self.d_model:
            raise ValueError(
                f"d_model={self.d_model} smaller than payload width {self.payload_width}"
            )

    @property
    def payload_width(self) -> int:
        per_number = BIT_PAYLOAD if self.base == 2 else DIGIT_PAYLOAD
        return per_number * (2 if self.include_reciprocal else 1)


@dataclass(frozen=True)
class FoNEConfig:
    base: int = 10
    int_freqs: int = 17
    frac_freqs: int = 32
    d_model: int = 768

    @property
    def frequencies(self) -> tuple[int, ...]:
        """Frequency exponents, ascending: -int_freqs..-1 then 0..frac_freqs-1.

        Exponent phi reads the digit at place base**(-phi-1), so negative
        exponents cover integer places and nonnegative ones fraction places.
        """
        return tuple(range(-self.int_freqs, self.frac_freqs))

    @property
    def payload_width(self) -> int:
        return 2 * len(self.frequencies)

    def __post_init__(self):
        if self.base < 2:
            raise ValueError("base must be >= 2")
        if self.payload_width > self.d_model:
            raise ValueError("d_model smaller than payload width")


@dataclass(frozen=True)
class NumberHeadParams:
    """Linear-plus-sigmoid readout predicting payload bits from a hidden state."""

    weight: np.ndarray  # d_model x n_bits
    bias: np.ndarray    # n_bits

    def __post_init__(self):
        w = np.array(self.weight, dtype=np.float64)  # own immutable copies
        b = np.array(self.bias, dtype=np.float64)
        if w.ndim != 2 or b.ndim != 1 or w.shape[1] != b.shape[0]:
            raise ValueError("weight must be d_model x n_bits and bias n_bits")
        w.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "weight", w)
        object.__setattr__(self, "bias", b)

    @property
    def n_bits(self) -> int:
        return self.bias.shape[0]


# ---------------------------------------------------------------------------
# bit-payload scheme


def _reciprocal(v: float) -> float:
    # IEEE semantics: 1/±0 = ±inf, 1/±inf = ±0, 1/NaN = NaN
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        return float(np.divide(1.0, np.float64(v)))


def _bits_pm1(v: float) -> np.ndarray:
    """The 64 bits of v as ±1 entries, ordered sign, exponent (msb first), significand."""
    u = float_to_uint64(v)
    bits = np.array([(u >> i) & 1 for i in range(63, -1, -1)], dtype=np.float64)
    return 2.0 * bits - 1.0


def _digits_pm1(v: float) -> np.ndarray:
    """Base-10 ablation payload: sign dim, 2 exponent digits, 17 significand digits.

    Digits map to 2*(d/9) - 1; the exponent carries offset 50, a range forced
    by the benchmark interval. Non-finite values saturate the exponent at 99
    with significand all 0 (inf) or all 9 (NaN).
    """
    out = np.zeros(DIGIT_PAYLOAD, dtype=np.float64)
    sign = 1.0 if (math.copysign(1.0, v) < 0) else -1.0
    out[0] = sign
    if math.isnan(v):
        digits, exp = [9] * 17, 99
    elif math.isinf(v):
        digits, exp = [0] * 17, 99
    elif v == 0.0:
        digits, exp = [0] * 17, DIGIT_EXP_OFFSET
    else:
        w = round_sig(abs(v), 17)
        d = Decimal(repr(w)).normalize()
        _, digs, e = d.as_tuple()
        digits = (list(digs) + [0] * 17)[:17]
        exp = (e + len(digs) - 1) + DIGIT_EXP_OFFSET
        exp = min(max(exp, 0), 99)
    out[1] = 2.0 * (exp // 10) / 9.0 - 1.0
    out[2] = 2.0 * (exp % 10) / 9.0 - 1.0
    out[3:] = [2.0 * d / 9.0 - 1.0 for d in digits]
    return out


def _payload_pm1(v: float, cfg: BitTokenConfig) -> np.ndarray:
    per = _bits_pm1 if cfg.base == 2 else _digits_pm1
    parts = [per(v)]
    if cfg.include_reciprocal:
        parts.append(per(_reciprocal(v)))
    return np.concatenate(parts)


def bittoken_encode(
    v: float,
    cfg: BitTokenConfig | None = None,
    num_token: np.ndarray | None = None,
    weight: np.ndarray | None = None,
) -> EmbeddingVector:
    """Encode v as a ±1 bit payload zero-padded to d_model.

    The combine strategy shapes how a caller-supplied [NUM] token vector is
    mixed in; with no token the payload block is returned as-is (equivalent
    to zero_pad). `weight` is the linear map for the weighted strategies.
    """
    cfg = cfg or BitTokenConfig()
    payload = _payload_pm1(v, cfg)
    w = cfg.payload_width
    vec = np.zeros(cfg.d_model, dtype=np.float64)

    if cfg.combine in ("weighted", "weighted_sum"):
        if weight is None:
            raise ValueError(f"combine={cfg.combine!r} requires a weight matrix")
        if weight.shape != (w, cfg.d_model):
            raise ValueError(f"weight must be {w} x {cfg.d_model}")
        vec[:] = payload @ weight
        if cfg.combine == "weighted_sum" and num_token is not None:
            vec += num_token
        return EmbeddingVector(vec, "bittoken")

    vec[:w] = payload
    if num_token is not None:
        if num_token.shape != (cfg.d_model,):
            raise ValueError(f"num_token must have length {cfg.d_model}")
        if cfg.combine == "sum":
            vec += num_token
        elif cfg.combine == "product":
            vec *= num_token
        elif cfg.combine == "concat":
            masked = num_token.copy()
            masked[:w] = 0.0
            vec += masked
        # zero_pad ignores the token entirely
    return EmbeddingVector(vec, "bittoken")


def bittoken_decode(probs: np.ndarray, cfg: BitTokenConfig | None = None) -> float:
    """Threshold bit probabilities at 0.5 and reassemble the leading number block.

    The reciprocal block (when present) is predicted but never used for the
    value; the decode source is always the first 64 bits (or 20 digit dims
    in the base-10 ablation).
    """
    cfg = cfg or BitTokenConfig()
    probs = np.asarray(probs, dtype=np.float64)
    if probs.shape != (cfg.payload_width,):
        raise ValueError(f"expected {cfg.payload_width} probabilities, got {probs.shape}")
    bits = (probs >= 0.5).astype(np.uint64)
    if cfg.base == 2:
        u = 0
        for b in bits[:BIT_PAYLOAD]:
            u = (u << 1) | int(b)
        return uint64_to_float(u)
    return _decode_digit_block(probs[:DIGIT_PAYLOAD])


def _decode_digit_block(block: np.ndarray) -> float:
    digits = [int(d) for d in np.clip(np.rint((block + 1.0) / 2.0 * 9.0), 0, 9)]
    negative = block[0] >= 0.0
    exp = 10 * digits[1] + digits[2] - DIGIT_EXP_OFFSET
    if exp == 99 - DIGIT_EXP_OFFSET and all(d == 9 for d in digits[3:]):
        return math.nan
    if exp == 99 - DIGIT_EXP_OFFSET and all(d == 0 for d in digits[3:]):
        return -math.inf if negative else math.inf
    with localcontext() as ctx:
        ctx.prec = 40
        mag = Decimal(int("".join(map(str, digits[3:])))).scaleb(exp - 16)
    v = float(mag)
    return -v if negative else v


def payload_to_probs(payload: np.ndarray) -> np.ndarray:
    """Map a ±1 payload block to the probability space the decoder consumes."""
    return (np.asarray(payload, dtype=np.float64) + 1.0) / 2.0


def bce_loss_grad(probs: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean bit-wise binary cross entropy and its gradient w.r.t. the logits.

    Equal weighting per dimension; the gradient through the sigmoid collapses
    to (p - t) / n_bits, which keeps the computation finite for p near {0,1}.
    """
    p = np.asarray(probs, dtype=np.float64)
    t = np.asarray(target, dtype=np.float64)
    if p.shape != t.shape:
        raise ValueError("probs and target must have matching shapes")
    n = p.shape[-1]
    eps = 1e-300
    loss = float(np.mean(-(t * np.log(p + eps) + (1.0 - t) * np.log(1.0 - p + eps))))
    return loss, (p - t) / n


# ---------------------------------------------------------------------------
# batch paths (vectorized over uint64 views; used by the file format and CLI)


def bittoken_encode_batch(values: np.ndarray, cfg: BitTokenConfig | None = None) -> np.ndarray:
    """Vectorized payload construction: (n, payload_width) of ±1, float32-safe."""
    cfg = cfg or BitTokenConfig()
    values = np.asarray(values, dtype=np.float64)
    if cfg.base != 2:
        rows = [_payload_pm1(float(v), cfg) for v in values]
        return np.stack(rows) if rows else np.zeros((0, cfg.payload_width))
    blocks = [_bits_pm1_batch(values)]
    if cfg.include_reciprocal:
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            blocks.append(_bits_pm1_batch(1.0 / values))
    return np.concatenate(blocks, axis=1)


def _bits_pm1_batch(values: np.ndarray) -> np.ndarray:
    u = np.ascontiguousarray(values, dtype=np.float64).view(np.uint64)
    be = u.astype(">u8").view(np.uint8).reshape(-1, 8)
    bits = np.unpackbits(be, axis=1)
    return bits.astype(np.float64) * 2.0 - 1.0


def bittoken_decode_batch(probs: np.ndarray, cfg: BitTokenConfig | None = None) -> np.ndarray:
    cfg = cfg or BitTokenConfig()
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim != 2 or probs.shape[1] != cfg.payload_width:
        raise ValueError(f"expected (n, {cfg.payload_width}) probabilities")
    if cfg.base != 2:
        return np.array([bittoken_decode(row, cfg) for row in probs])
    bits = (probs[:, :BIT_PAYLOAD] >= 0.5).astype(np.uint8)
    packed = np.packbits(bits, axis=1)
    u = packed.view(">u8").ravel().astype(np.uint64)
    return u.view(np.float64)


# ---------------------------------------------------------------------------
# sinusoidal digit-frequency scheme


def _phase_fraction(terms: list[tuple[int, int]], base: int, phi: int) -> float:
    """Exact frac(base**phi * sum(m * 2**e)) for integer mantissa/exponent terms.

    Pure integer arithmetic, so enormous frequency exponents lose no
    precision; the result is then rounded once to a float in [0, 1).
    """
    if not terms:
        return 0.0
    e_min = min(e for _, e in terms)
    m_total = sum(m << (e - e_min) for m, e in terms)
    if m_total == 0:
        return 0.0
    num = m_total * (1 << max(0, e_min)) * base ** max(0, phi)
    den = (1 << max(0, -e_min)) * base ** max(0, -phi)
    q = num % den
    if q == 0:
        return 0.0
    return math.ldexp(float((q << 64) // den), -64)


def _float_terms(v: float) -> list[tuple[int, int]]:
    m, e = math.frexp(v)
    return [(int(m * (1 << 53)), e - 53)]


def _phases(terms: list[tuple[int, int]], cfg: FoNEConfig) -> np.ndarray:
    """(cos, sin) pairs of 2*pi*base**phi*v for every frequency, exact-phase."""
    out = np.empty(cfg.payload_width, dtype=np.float64)
    for i, phi in enumerate(cfg.frequencies):
        theta = 2.0 * math.pi * _phase_fraction(terms, cfg.base, phi)
        out[2 * i] = math.cos(theta)
        out[2 * i + 1] = math.sin(theta)
    return out


def fone_encode(v: float, cfg: FoNEConfig | None = None) -> EmbeddingVector:
    """Sinusoidal encoding of a nonnegative value, zero-padded to d_model.

    The sign never enters the payload; callers emit a separate [-] token for
    negative numbers.
    """
    cfg = cfg or FoNEConfig()
    if not math.isfinite(v):
        raise ValueError("value must be finite")
    if v < 0:
        raise ValueError("negative values must be sign-split by the caller")
    vec = np.zeros(cfg.d_model, dtype=np.float64)
    vec[: cfg.payload_width] = _phases(_float_terms(v), cfg)
    return EmbeddingVector(vec, "fone")


def fone_decode(payload: np.ndarray, cfg: FoNEConfig | None = None) -> float:
    """Digit-wise nearest-phase decode, finest place first.

    Each frequency's (cos, sin) pair is compared against the ten reference
    digit phases after rotating away the already-decoded lower places; the
    best cosine similarity wins and ties break toward the lower digit.
    """
    cfg = cfg or FoNEConfig()
    payload = np.asarray(payload, dtype=np.float64)
    if payload.shape[0] < cfg.payload_width:
        raise ValueError(f"payload must carry {cfg.payload_width} dims")
    if not np.all(np.isfinite(payload[: cfg.payload_width])):
        raise ValueError("payload entries must be finite")
    b = cfg.base
    refs = [(math.cos(2 * math.pi * d / b), math.sin(2 * math.pi * d / b)) for d in range(b)]
    freqs = sorted(cfg.frequencies, reverse=True)  # largest phi = finest place first
    idx = {phi: i for i, phi in enumerate(cfg.frequencies)}
    low = 0  # accumulated digits below the current place, scaled by b**frac_freqs
    scale = cfg.frac_freqs
    for phi in freqs:
        place = -phi - 1
        c, s = payload[2 * idx[phi]], payload[2 * idx[phi] + 1]
        # rotate by -2*pi*frac(low * b**(phi - scale)) to cancel lower places
        theta = 2.0 * math.pi * _phase_fraction([(low, 0)], b, phi - scale)
        cr = c * math.cos(theta) + s * math.sin(theta)
        sr = s * math.cos(theta) - c * math.sin(theta)
        best, best_dot = 0, -math.inf
        for d, (rc, rs) in enumerate(refs):
            dot = cr * rc + sr * rs
            if dot > best_dot + 1e-12:
                best, best_dot = d, dot
        low += best * b ** (place + scale)
    with localcontext() as ctx:
        ctx.prec = DEC_PREC
        return float(Decimal(low).scaleb(-scale) if b == 10 else Decimal(low) / Decimal(b) ** scale)


def homomorphism_residual(x: float, y: float, cfg: FoNEConfig | None = None) -> float:
    """Max component gap between the encoding of x+y and the pairwise rotation
    product of the encodings of x and y.

    The sum's phases are computed from the exact value of x+y (integer
    arithmetic), so the residual reflects only trigonometric rounding.
    """
    cfg = cfg or FoNEConfig()
    tx, ty = _float_terms(x), _float_terms(y)
    fx = _phases(tx, cfg)
    fy = _phases(ty, cfg)
    fsum = _phases(tx + ty, cfg)
    prod = np.empty_like(fsum)
    prod[0::2] = fx[0::2] * fy[0::2] - fx[1::2] * fy[1::2]
    prod[1::2] = fx[0::2] * fy[1::2] + fx[1::2] * fy[0::2]
    return float(np.max(np.abs(fsum - prod)))


# ---------------------------------------------------------------------------
# log-rescaled scalar scheme

XVAL_LO_EXP = -14.0
XVAL_SPAN = 29.0  # log10 span of the benchmark interval [1e-14, 1e15)
XVAL_LIMIT = 5.0


def xval_encode(v: float) -> float:
    """Sign-symmetric log map of the benchmark interval onto [-5, 5]; 0 -> 0."""
    if not math.isfinite(v):
        raise ValueError("value must be finite")
    if v == 0.0:
        return 0.0
    s = XVAL_LIMIT * (math.log10(abs(v)) - XVAL_LO_EXP) / XVAL_SPAN
    s = min(max(s, -XVAL_LIMIT), XVAL_LIMIT)
    return math.copysign(s, v)


def xval_decode(s: float) -> float:
    """Inverse of xval_encode on its range; precision is whatever the scalar kept."""
    if abs(s) > XVAL_LIMIT:
        raise ValueError(f"scalar out of [-5, 5]: {s}")
    if s == 0.0:
        return 0.0
    mag = 10.0 ** (abs(s) * XVAL_SPAN / XVAL_LIMIT + XVAL_LO_EXP)
    return math.copysign(mag, s)


# ---------------------------------------------------------------------------
# digit-tokenizer accounting

_WORD = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_"


def digit_token_count(rendered: str, scheme: str = "single_digit") -> int:
    """Token count under a plain digit tokenizer.

    single_digit: every digit is one token; subword3 groups up to three
    digits greedily left to right within each digit run. Non-digit text is
    a whitespace/punctuation approximation: words are single tokens and
    every other non-space character stands alone.
    """
    if scheme not in ("single_digit", "subword3"):
        raise ValueError(f"unknown scheme {scheme!r}")
    count = 0
    i = 0
    n = len(rendered)
    while i < n:
        ch = rendered[i]
        if ch.isdigit():
            j = i
            while j < n and rendered[j].isdigit():
                j += 1
            run = j - i
            count += run if scheme == "single_digit" else -(-run // 3)
            i = j
        elif ch in _WORD:
            j = i
            while j < n and rendered[j] in _WORD:
                j += 1
            count += 1
            i = j
        elif ch.isspace():
            i += 1
        else:
            count += 1
            i += 1
    return count


# exposed for the probe's boolean-gate identity checks
def bit_and_mod2(x: int, y: int) -> int:
    return (x * y) % 2


def bit_xor_mod2(x: int, y: int) -> int:
    return (x + y) % 2
