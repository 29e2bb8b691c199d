"""Strict rational parsing, rendering and grid rounding."""

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from ptsm import (
    RangeError,
    RationalSyntaxError,
    ceil_to_grid,
    check_unit_interval,
    decimal_repr,
    floor_to_grid,
    format_rational,
    nearest_grid,
    parse_rational,
)

unit_fractions = st.fractions(min_value=0, max_value=1, max_denominator=64)
grids = st.fractions(min_value=Fraction(1, 64), max_value=1, max_denominator=64)


@pytest.mark.parametrize(
    "text, value",
    [
        ("0", Fraction(0)),
        ("1", Fraction(1)),
        ("1/2", Fraction(1, 2)),
        ("3/16", Fraction(3, 16)),
        ("2/4", Fraction(1, 2)),
        ("  7/8 ", Fraction(7, 8)),
        ("-1/2", Fraction(-1, 2)),
    ],
)
def test_parse_accepts_integer_and_quotient_forms(text, value):
    assert parse_rational(text) == value


@pytest.mark.parametrize(
    "text",
    ["0.5", "1.0", "", "a", "1/0", "1/ 2", "1 /2", "1//2", "+1/2", "1/-2", "0x1"],
)
def test_parse_rejects_non_rational_syntax(text):
    with pytest.raises(RationalSyntaxError):
        parse_rational(text)


def test_parse_rejects_non_string_payloads():
    with pytest.raises(RationalSyntaxError):
        parse_rational(0.5)
    with pytest.raises(RationalSyntaxError):
        parse_rational(1)


def test_parse_error_mentions_location():
    with pytest.raises(RationalSyntaxError, match="valuation of q"):
        parse_rational("0.5", where="valuation of q")


@pytest.mark.parametrize(
    "value, text",
    [
        (Fraction(0), "0"),
        (Fraction(3), "3"),
        (Fraction(1, 2), "1/2"),
        (Fraction(-3, 16), "-3/16"),
    ],
)
def test_format_canonical_forms(value, text):
    assert format_rational(value) == text


@given(st.fractions(max_denominator=1000))
def test_format_parse_round_trip(q):
    assert parse_rational(format_rational(q)) == q


@pytest.mark.parametrize(
    "value, text",
    [
        (Fraction(1, 2), "0.500000"),
        (Fraction(1, 3), "0.333333"),
        (Fraction(2, 3), "0.666667"),
        (Fraction(0), "0.000000"),
        (Fraction(1), "1.000000"),
        (Fraction(-1, 2), "-0.500000"),
        (Fraction(1, 64), "0.015625"),
    ],
)
def test_decimal_repr_rounds_half_up(value, text):
    assert decimal_repr(value) == text


def test_decimal_repr_custom_places():
    assert decimal_repr(Fraction(1, 3), places=2) == "0.33"


def test_check_unit_interval_bounds():
    assert check_unit_interval(Fraction(1, 2), "x") == Fraction(1, 2)
    with pytest.raises(RangeError, match="weight"):
        check_unit_interval(Fraction(3, 2), "weight")
    with pytest.raises(RangeError):
        check_unit_interval(Fraction(-1, 10), "x")


@given(unit_fractions, grids)
def test_grid_rounding_brackets_the_value(q, grid):
    lo, hi = floor_to_grid(q, grid), ceil_to_grid(q, grid)
    assert lo <= q <= hi
    assert hi - lo in (0, grid)
    assert (lo / grid).denominator == 1 and (hi / grid).denominator == 1
    near = nearest_grid(q, grid)
    assert near in (lo, hi)
    assert abs(near - q) <= grid / 2


def test_grid_rounding_examples():
    g = Fraction(1, 8)
    assert floor_to_grid(Fraction(3, 16), g) == Fraction(1, 8)
    assert ceil_to_grid(Fraction(3, 16), g) == Fraction(1, 4)
    # exact ties round down
    assert nearest_grid(Fraction(3, 16), g) == Fraction(1, 8)
    assert floor_to_grid(Fraction(1, 4), g) == Fraction(1, 4)
    assert ceil_to_grid(Fraction(1, 4), g) == Fraction(1, 4)
