"""Strict rational parsing and formatting on top of fractions.Fraction.

All quantitative values in the toolkit are exact rationals. JSON documents
carry them as strings, either an integer 'n' or a quotient 'n/d'; anything
else, in particular decimal or float syntax, is rejected so no rounding can
sneak in at the boundary.
"""
from __future__ import annotations

import re
from fractions import Fraction

from .errors import RangeError, RationalSyntaxError

_RATIONAL_RE = re.compile(r"^(-?\d+)(?:/(\d+))$|^(-?\d+)$")

ZERO = Fraction(0)
ONE = Fraction(1)


def parse_rational(text, where=""):
    """Parse 'n' or 'n/d' into a Fraction; reject everything else."""
    if not isinstance(text, str):
        raise RationalSyntaxError(
            f"{where}: rational values must be strings like '1/2', got "
            f"{type(text).__name__} {text!r}"
        )
    m = _RATIONAL_RE.match(text.strip())
    if m is None:
        raise RationalSyntaxError(
            f"{where}: {text!r} is not a rational literal (use 'n' or 'n/d')"
        )
    if m.group(3) is not None:
        return Fraction(int(m.group(3)))
    num, den = int(m.group(1)), int(m.group(2))
    if den == 0:
        raise RationalSyntaxError(f"{where}: zero denominator in {text!r}")
    return Fraction(num, den)


def format_rational(q: Fraction) -> str:
    """Canonical string form: integers without slash, otherwise 'n/d'."""
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def decimal_repr(q: Fraction, places: int = 6) -> str:
    """Fixed-point decimal rendering, advisory only; values stay rational."""
    scaled = q * 10**places
    n = scaled.numerator // scaled.denominator
    if scaled.numerator % scaled.denominator * 2 >= scaled.denominator:
        n += 1
    sign = "-" if n < 0 else ""
    n = abs(n)
    whole, frac = divmod(n, 10**places)
    return f"{sign}{whole}.{frac:0{places}d}"


def check_unit_interval(q: Fraction, what: str) -> Fraction:
    if q < ZERO or q > ONE:
        raise RangeError(f"{what} must lie in [0, 1], got {format_rational(q)}")
    return q


def floor_to_grid(q: Fraction, grid: Fraction) -> Fraction:
    """Largest multiple of grid that is <= q."""
    return grid * (q / grid).__floor__()


def ceil_to_grid(q: Fraction, grid: Fraction) -> Fraction:
    return grid * -((-q / grid).__floor__())


def nearest_grid(q: Fraction, grid: Fraction) -> Fraction:
    lo = floor_to_grid(q, grid)
    hi = lo + grid
    return lo if q - lo <= hi - q else hi
