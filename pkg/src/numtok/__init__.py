"""numtok: single-token number encodings, numeracy benchmark generation, and scoring."""

from .numcore import (
    CanonicalDecimal,
    FloatBits,
    count_sig,
    format_canonical,
    format_shortest,
    from_bits,
    round_sig,
    round_sig_bits,
    to_bits,
)

__version__ = "0.1.0"

__all__ = [
    "CanonicalDecimal",
    "FloatBits",
    "count_sig",
    "format_canonical",
    "format_shortest",
    "from_bits",
    "round_sig",
    "round_sig_bits",
    "to_bits",
    "__version__",
]
