import math

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from slowescape.errors import CapacityError, DomainError
from slowescape.numeric_tower import (
    LevelIndex, Ordering, PrecisionPolicy, add_real, apply_exp, apply_log, compare,
    exp_of, from_real, mul_real,
)

positive = st.floats(min_value=1e-300, max_value=1e300, allow_nan=False, allow_infinity=False)


def _oracle(v):
    """Repeated math.log until below e: an independent normal form."""
    level = 0
    while v >= math.e:
        v = math.log(v)
        level += 1
    return level, v


@pytest.mark.parametrize("v", [0.5, 1.0, 2.0, 2.718281828, 3.0, 15.15426224, 1e10, 1e300])
def test_from_real_matches_log_oracle(v):
    level, idx = _oracle(v)
    li = from_real(v)
    assert li.level == level
    assert li.index == pytest.approx(idx, rel=1e-14)


def test_two_is_level_zero():
    assert from_real(2.0) == LevelIndex(0, 2.0)


def test_normal_form_rejected():
    with pytest.raises(DomainError):
        LevelIndex(1, 0.5)
    with pytest.raises(DomainError):
        LevelIndex(0, 3.0)
    with pytest.raises(DomainError):
        LevelIndex(-1, 1.5)
    with pytest.raises(DomainError):
        from_real(0.0)
    with pytest.raises(DomainError):
        from_real(float("inf"))


@settings(max_examples=300, deadline=None)
@given(positive)
def test_round_trip(v):
    assert from_real(v).to_real() == pytest.approx(v, rel=1e-12)


@settings(max_examples=300, deadline=None)
@given(positive, positive)
def test_order_isomorphism(a, b):
    la, lb = from_real(a), from_real(b)
    if a < b:
        assert la <= lb
    elif a > b:
        assert la >= lb
    else:
        assert la == lb


def test_compare_orderings():
    a, b = from_real(10.0), from_real(1e10)
    assert compare(a, b) is Ordering.LESS
    assert compare(b, a) is Ordering.GREATER
    assert compare(a, a) is Ordering.EQUAL
    c = LevelIndex(5, 1.5)
    d = LevelIndex(5, 1.5 + 2.0 ** -52)
    assert compare(c, d) is Ordering.INDISTINGUISHABLE


def test_parse_and_str():
    li = LevelIndex(4, 1.25)
    assert str(li) == "L4:1.25"
    assert LevelIndex.parse(str(li)) == li
    with pytest.raises(DomainError):
        LevelIndex.parse("4:1.25")


def test_exp_log_inverse():
    a = LevelIndex(7, 2.0)
    assert apply_log(apply_exp(a)) == a
    assert apply_exp(LevelIndex(0, 0.5)) == LevelIndex(0, math.exp(0.5))
    with pytest.raises(DomainError):
        apply_log(LevelIndex(0, 0.5))


def test_exp_of_matches_math_exp():
    for x in (0.3, 1.0, 5.0, 100.0):
        assert exp_of(x).to_real() == pytest.approx(math.exp(x), rel=1e-13)
    assert exp_of(LevelIndex(3, 2.0)) == LevelIndex(4, 2.0)


def test_to_real_overflow():
    big = LevelIndex(3, 2.0)
    assert not big.fits_double()
    with pytest.raises(CapacityError):
        big.to_real()
    assert big.fits_mpf()
    assert mpmath.log(mpmath.log(big.to_mpf())) == pytest.approx(math.exp(2.0), rel=1e-12)
    assert not LevelIndex(4, 2.0).fits_mpf()


def test_add_and_mul_real():
    a = from_real(1e5)
    assert add_real(a, 7.0).to_real() == pytest.approx(1e5 + 7.0, rel=1e-14)
    assert mul_real(a, 3.0).to_real() == pytest.approx(3e5, rel=1e-14)
    huge = LevelIndex(9, 2.0)
    assert add_real(huge, 1.0) == huge
    # c*exp(exp(x)) = exp(exp(x) + log c)
    b = LevelIndex(2, 2.0)
    with mpmath.workprec(128):
        want = mpmath.log(mpmath.exp(mpmath.e ** 2) * 5)
    assert apply_log(mul_real(b, 5.0)).to_real() == pytest.approx(float(want), rel=1e-14)


def test_precision_policy(monkeypatch):
    p = PrecisionPolicy(base_bits=64, max_bits=512)
    assert list(p.ladder()) == [64, 128, 256, 512]
    with pytest.raises(DomainError):
        PrecisionPolicy(base_bits=1024, max_bits=64)
    monkeypatch.setenv("SLOWESCAPE_BITS", "200")
    assert PrecisionPolicy.from_env().base_bits == 200
