"""Helpers shared by the float and exact-rational code paths.

Core computations use plain Python arithmetic, so feeding ``Fraction``
inputs yields exact rational results with no separate implementation.
"""
from __future__ import annotations

import os
from fractions import Fraction
from numbers import Rational
from typing import Any, Union

Number = Union[int, float, Fraction]


def exact_mode_requested() -> bool:
    return os.environ.get("DST_EXACT", "").strip().lower() in {"1", "true", "yes", "on"}


def to_fraction(value: Any) -> Fraction:
    """Convert to an exact rational, using the shortest decimal form for floats."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(str(value).strip())


def parse_number(text: str, exact: bool = False) -> Number:
    text = text.strip()
    if exact:
        return Fraction(text)
    if "/" in text:
        return float(Fraction(text))
    return float(text)


def is_exact(value: Any) -> bool:
    return isinstance(value, Rational)


def json_number(value: Any, exact: bool = False):
    """Render a number for JSON: floats stay floats, exact rationals may stay exact strings."""
    if isinstance(value, Fraction):
        if exact:
            return str(value) if value.denominator != 1 else value.numerator
        return float(value)
    if isinstance(value, bool):
        return value
    if isinstance(value, int):
        return value
    if isinstance(value, float):
        return value
    return value


def sign(value: Number, eps: float = 0.0) -> int:
    """Sign with a dead zone of ``eps``; exact rationals are compared exactly."""
    if isinstance(value, (Fraction, int)):
        eps = 0
    if value > eps:
        return 1
    if value < -eps:
        return -1
    return 0
