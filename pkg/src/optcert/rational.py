"""Exact rational scalars and vectors.

Scalars are :class:`fractions.Fraction` (always in lowest terms, positive
denominator); vectors are plain tuples of fractions. Floats are rejected on
purpose so that nothing inexact leaks into certificate computations.
"""
from __future__ import annotations

import numbers
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import InputError

Vector = tuple  # tuple[Fraction, ...]


def to_fraction(value) -> Fraction:
    """Convert an int, Fraction or ``"p/q"`` string to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise InputError(f"boolean is not a rational: {value!r}")
    if isinstance(value, numbers.Integral):
        return Fraction(int(value))
    if isinstance(value, str):
        text = value.strip()
        if not text:
            raise InputError("empty rational string")
        if any(ch in text for ch in ".eE") and "/" not in text:
            raise InputError(f"decimal notation is not accepted, write p/q: {value!r}")
        try:
            num, _, den = text.partition("/")
            n = int(num)
            d = int(den) if den else 1
        except ValueError:
            raise InputError(f"bad rational: {value!r}") from None
        if d == 0:
            raise InputError(f"zero denominator in rational: {value!r}")
        return Fraction(n, d)
    if isinstance(value, numbers.Rational):
        return Fraction(value.numerator, value.denominator)
    raise InputError(f"expected an exact rational, got {type(value).__name__}: {value!r}")


def as_vector(values: Iterable) -> Vector:
    return tuple(to_fraction(v) for v in values)


def fmt(q: Fraction) -> str:
    """Render a fraction the way problem files spell it."""
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def fmt_vector(v: Sequence) -> list:
    return [fmt(q) for q in v]


def dot(a: Sequence, b: Sequence):
    if len(a) != len(b):
        raise InputError(f"dimension mismatch: {len(a)} vs {len(b)}")
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def add(a: Sequence, b: Sequence) -> Vector:
    if len(a) != len(b):
        raise InputError(f"dimension mismatch: {len(a)} vs {len(b)}")
    return tuple(x + y for x, y in zip(a, b))


def sub(a: Sequence, b: Sequence) -> Vector:
    if len(a) != len(b):
        raise InputError(f"dimension mismatch: {len(a)} vs {len(b)}")
    return tuple(x - y for x, y in zip(a, b))


def scale(c, a: Sequence) -> Vector:
    return tuple(c * x for x in a)


def zeros(n: int) -> Vector:
    return (Fraction(0),) * n


def unit(n: int, i: int, sign: int = 1) -> Vector:
    return tuple(Fraction(sign if k == i else 0) for k in range(n))


def is_zero(v: Sequence) -> bool:
    return all(x == 0 for x in v)
