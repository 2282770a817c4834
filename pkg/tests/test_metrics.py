import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from numtok.metrics import (
    ScoreReport,
    canonicalize_answer,
    exact_match,
    generalized_mean,
    log_smape,
    smape,
)

finite = st.floats(allow_nan=False, allow_infinity=False, min_value=-1e300, max_value=1e300)


def test_smape_examples():
    assert smape(1.0, 1.0) == 0.0
    assert abs(smape(2.0, 1.0) - 1 / 3) < 1e-15
    assert smape(0.0, 0.0) == 0.0


def test_smape_nonfinite_pred():
    assert smape(math.inf, 1.0) == 1.0
    assert smape(math.nan, 1.0) == 1.0


@given(finite, finite)
@settings(max_examples=300)
def test_smape_symmetric_and_bounded(a, b):
    assert smape(a, b) == smape(b, a)
    # strictly below 1 in exact arithmetic; the epsilon is under one ulp of
    # the denominator for opposite-sign operands, so float64 saturates at 1.0
    assert 0.0 <= smape(a, b) <= 1.0


def test_log_smape_anchor():
    # one part in a thousand off: first 3 of 15 significant digits correct
    assert abs(log_smape(1001.0, 999.0) - 0.2) < 1e-12
    assert smape(1001.0, 999.0) == 1e-3


def test_log_smape_exact_match_caps_at_one():
    assert log_smape(2.5, 2.5) == 1.0


def test_log_smape_direct_evaluation():
    # independent oracle: exact decimal values of the two doubles
    from decimal import Decimal

    a, b = Decimal(1.001), Decimal(1.000)
    s = float((a - b) / (a + b))
    expected = -math.log10(s + 1e-100) / 15
    assert abs(log_smape(1.001, 1.000) - expected) < 1e-12
    assert abs(expected - 0.22011) < 1e-4


@given(finite, finite)
@settings(max_examples=300)
def test_log_smape_bounds(a, b):
    assert 0.0 <= log_smape(a, b) <= 1.0


def test_log_smape_monotone_in_smape():
    vals = [log_smape(1.0 + d, 1.0) for d in (1e-12, 1e-9, 1e-6, 1e-3, 0.5)]
    assert vals == sorted(vals, reverse=True)


def test_exact_match_canonicalization():
    assert exact_match("0.50", 0.5)
    assert not exact_match("abc", 1.0)
    assert not exact_match("", 1.0)
    assert exact_match("1e3", 1000.0)


def test_exact_match_fifteen_digit_boundary():
    # frozen via the round_sig oracle: the double nearest 1.234567890123456
    # rounds to 1.23456789012346 at 15 digits, so the 15-digit string one ulp
    # below does NOT match, while the correctly rounded one does
    assert not exact_match("1.23456789012345", 1.234567890123456)
    assert exact_match("1.23456789012346", 1.234567890123456)


def test_generalized_mean_examples():
    assert abs(generalized_mean([0.5, 0.5, 0.5], -1.0) - 0.5) < 1e-7
    assert abs(generalized_mean([1.0, 1.0], -1.0) - 1.0) < 1e-7
    assert abs(generalized_mean([0.2, 0.8], -1.0) - 0.32) < 1e-6


def test_generalized_mean_rejects_bad_args():
    with pytest.raises(ValueError):
        generalized_mean([], -1.0)
    with pytest.raises(ValueError):
        generalized_mean([0.5], 0.0)


@given(st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=1, max_size=10))
@settings(max_examples=300)
def test_harmonic_below_arithmetic(perfs):
    # power-mean inequality on the eps-shifted values: h <= mean(p) + eps
    h = generalized_mean(perfs, -1.0)
    a = sum(perfs) / len(perfs)
    assert h <= a + 1e-8 + 1e-12


def test_canonicalize_answer():
    assert canonicalize_answer("add", "0.50") == "0.5"
    assert canonicalize_answer("sorting", "[1.0, 2.50]") == "[1, 2.5]"
    assert canonicalize_answer("interval", " B ") == "B"
    assert canonicalize_answer("minmax", "7") == "7"


def test_score_report():
    r = ScoreReport()
    r.add("add", "2", "2", 2.0)
    r.add("add", "3", "2", 2.0)
    r.add("minmax", "5.0", "5", 5.0)
    d = r.to_dict()
    assert d["tasks"]["add"]["count"] == 2
    assert d["tasks"]["add"]["exact_match_rate"] == 0.5
    assert d["tasks"]["minmax"]["exact_match_rate"] == 1.0
    assert 0.0 < d["aggregate"]["generalized_mean"] <= 1.0
