"""Exact rationals (gmpy2.mpq) plus parsing and formatting helpers."""
from __future__ import annotations

import re
from fractions import Fraction

from gmpy2 import mpq

Rational = type(mpq(0))
ZERO = mpq(0)
ONE = mpq(1)
HALF = mpq(1, 2)

_DEC = re.compile(r"^[+-]?\d+(\.\d{1,12})?$")
_FRAC = re.compile(r"^[+-]?\d+/\d+$")


class RationalParseError(ValueError):
    pass


def to_q(v) -> mpq:
    """Coerce int, Fraction, mpq or string into an exact rational.

    Strings are "num/den", an integer, or a decimal with at most 12 fractional
    digits. Floats are rejected since they are rarely what the caller meant.
    """
    if isinstance(v, Rational):
        return v
    if isinstance(v, bool):
        raise RationalParseError(f"not a rational: {v!r}")
    if isinstance(v, (int, Fraction)):
        return mpq(v)
    if isinstance(v, str):
        s = v.strip()
        if _FRAC.match(s):
            num, den = s.split("/")
            if int(den) == 0:
                raise RationalParseError(f"zero denominator: {v!r}")
            return mpq(int(num), int(den))
        if _DEC.match(s):
            return mpq(Fraction(s))
        raise RationalParseError(f"cannot parse rational {v!r}")
    raise RationalParseError(f"not a rational: {v!r}")


def fmt_q(q) -> str:
    q = mpq(q)
    return f"{q.numerator}/{q.denominator}"


def fmt_short(q) -> str:
    q = mpq(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def to_float(q) -> float:
    return float(q)
