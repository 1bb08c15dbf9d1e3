"""Exact amount predicates against integer-only oracles."""

from fractions import Fraction
from math import gcd

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from haveno_trace_kit.ledger.errors import InvalidRate
from haveno_trace_kit.ledger.model import TradeStatRecord, xmr
from haveno_trace_kit.ledger.params import HeuristicParams
from haveno_trace_kit.scanner.btc_match import has_max_decimals, implied_xmr, is_even_amount, true_amount_range

STEPS = (Fraction(1), Fraction(1, 2), Fraction(1, 4), Fraction(1, 10))


def oracle_max_decimals(num: int, den: int, d: int) -> bool:
    # num/den * 10^d is whole  <=>  den divides num * 10^d
    return (num * 10**d) % den == 0


def oracle_even(num: int, den: int, steps=STEPS) -> bool:
    # num/den = k * (p/q)  <=>  (num * q) divisible by (den * p)
    return any((num * s.denominator) % (den * s.numerator) == 0 for s in steps)


# --- known values ---

def test_implied_xmr_examples():
    assert implied_xmr(2_000_000, Fraction(400_000)) == Fraction(5)
    assert implied_xmr(123_457, Fraction(400_000)) == Fraction("0.3086425")
    with pytest.raises(InvalidRate):
        implied_xmr(1, Fraction(0))
    with pytest.raises(ValueError):
        implied_xmr(1, Fraction(-3))


def test_has_max_decimals_examples():
    assert has_max_decimals(Fraction(5), 4)
    assert not has_max_decimals(Fraction("0.3086425"), 4)
    assert has_max_decimals(Fraction("1.2345"), 4)
    assert not has_max_decimals(Fraction("1.23456"), 4)
    with pytest.raises(ValueError):
        has_max_decimals(Fraction(0), 4)


def test_is_even_amount_examples():
    assert is_even_amount(Fraction("2.5"), STEPS)
    assert not is_even_amount(Fraction("1.2345"), STEPS)
    assert is_even_amount(Fraction("0.75"), STEPS)
    assert is_even_amount(Fraction("0.3"), STEPS)
    assert not is_even_amount(Fraction("0.35"), STEPS)
    with pytest.raises(ValueError):
        is_even_amount(Fraction(-1), STEPS)


def test_true_amount_range_examples():
    stat = TradeStatRecord("t", xmr(10), Fraction(300_000), 0)
    lo, hi = true_amount_range(stat, HeuristicParams())
    # 10/1.05 and 10/0.95 XMR, rounded outward to piconero
    assert lo == 9_523_809_523_809
    assert hi == 10_526_315_789_474
    assert Fraction(lo) <= Fraction(xmr(10)) / Fraction(105, 100)
    assert Fraction(hi) >= Fraction(xmr(10)) / Fraction(95, 100)


def test_true_amount_range_degenerate():
    stat = TradeStatRecord("t", xmr("1.5"), Fraction(300_000), 0)
    p = HeuristicParams(obfuscation_fraction=Fraction(1, 10**9))
    lo, hi = true_amount_range(stat, p)
    assert lo <= xmr("1.5") <= hi
    assert hi - lo <= 4_000


def test_symmetric_range_is_narrower():
    stat = TradeStatRecord("t", xmr(10), Fraction(300_000), 0)
    exact = true_amount_range(stat, HeuristicParams())
    sym = true_amount_range(stat, HeuristicParams(symmetric_range=True))
    assert sym == (xmr("9.5"), xmr("10.5"))
    assert exact[0] > sym[0] and exact[1] > sym[1]


# --- oracle agreement ---

def test_predicates_agree_with_integer_oracle_on_random_rationals():
    rng = np.random.default_rng(0)
    disagreements = 0
    for _ in range(10_000):
        den = int(rng.choice([1, 2, 3, 4, 5, 8, 10, 16, 20, 25, 40, 100, 1000, 10**4, 10**5, 10**6, 7, 30, 300_000]))
        num = int(rng.integers(1, 10**7))
        x = Fraction(num, den)
        d = int(rng.integers(0, 9))
        disagreements += has_max_decimals(x, d) != oracle_max_decimals(num, den, d)
        disagreements += is_even_amount(x, STEPS) != oracle_even(num, den)
    assert disagreements == 0


@settings(max_examples=500, deadline=None)
@given(
    num=st.integers(min_value=1, max_value=10**15),
    den=st.integers(min_value=1, max_value=10**8),
    d=st.integers(min_value=0, max_value=12),
)
def test_has_max_decimals_property(num, den, d):
    assert has_max_decimals(Fraction(num, den), d) == oracle_max_decimals(num, den, d)


@settings(max_examples=500, deadline=None)
@given(
    num=st.integers(min_value=1, max_value=10**9),
    den=st.sampled_from([1, 2, 4, 10, 20, 40, 100, 3, 7, 10**4]),
)
def test_is_even_amount_property(num, den):
    assert is_even_amount(Fraction(num, den), STEPS) == oracle_even(num, den)


@settings(max_examples=300, deadline=None)
@given(
    sat=st.integers(min_value=1, max_value=10**12),
    rate_num=st.integers(min_value=1, max_value=10**9),
    rate_den=st.integers(min_value=1, max_value=10**3),
)
def test_implied_xmr_is_exact_quotient(sat, rate_num, rate_den):
    rate = Fraction(rate_num, rate_den)
    x = implied_xmr(sat, rate)
    assert x * rate == sat
    g = gcd(sat * rate_den, rate_num)
    assert x.denominator == rate_num // g
