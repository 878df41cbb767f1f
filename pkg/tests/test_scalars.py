from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from sweil.scalars import QI, ZERO, ONE, I, format_qi, parse_qi


def qi_strategy():
    frac = st.fractions(min_value=-40, max_value=40, max_denominator=12)
    return st.builds(QI, frac, frac)


def test_basic_arithmetic():
    a = QI(Fraction(1, 2), Fraction(-3, 4))
    b = QI(2, 1)
    assert a + b == QI(Fraction(5, 2), Fraction(1, 4))
    assert a - a == ZERO
    assert I * I == QI(-1)
    assert (a * b) / b == a


def test_division_by_zero():
    with pytest.raises(ZeroDivisionError):
        ONE / ZERO


def test_conjugation_is_involutive_automorphism():
    a = QI(Fraction(2, 3), Fraction(5, 7))
    b = QI(-1, Fraction(1, 2))
    assert a.conj().conj() == a
    assert (a * b).conj() == a.conj() * b.conj()
    assert (a + b).conj() == a.conj() + b.conj()


def test_equality_with_ints_and_hash():
    assert QI(3) == 3
    assert QI(3, 1) != 3
    assert hash(QI(1, 2)) == hash(QI(1, 2))


def test_immutability():
    with pytest.raises(AttributeError):
        ONE.re = Fraction(2)


@given(qi_strategy(), qi_strategy(), qi_strategy())
def test_field_laws(a, b, c):
    assert (a + b) * c == a * c + b * c
    assert a * b == b * a
    assert (a + b) + c == a + (b + c)
    if not b.is_zero():
        assert (a / b) * b == a


@given(qi_strategy())
def test_format_parse_roundtrip(z):
    assert parse_qi(format_qi(z)) == z


def test_format_examples():
    assert format_qi(ZERO) == "0"
    assert format_qi(QI(Fraction(-3, 2))) == "-3/2"
    assert format_qi(I) == "i"
    assert format_qi(-I) == "-i"
    assert format_qi(QI(0, 2)) == "2i"
    assert format_qi(QI(Fraction(-3, 2), Fraction(1, 4))) == "-3/2+1/4i"


def test_parse_star_form():
    assert parse_qi("1/2+3/4*i") == QI(Fraction(1, 2), Fraction(3, 4))
    assert parse_qi("-i") == -I
    with pytest.raises(ValueError):
        parse_qi("")
