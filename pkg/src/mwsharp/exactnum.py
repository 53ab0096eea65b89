"""Exact numbers: dyadic rationals m/2^e and general rationals.

General rationals are plain :class:`fractions.Fraction` values (``Rat``);
they are canonical on construction and compare by cross-multiplication.
:class:`Dyadic` is a thin exact type for breakpoints, which are always of
the form m/2^e in the constructed weights.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from numbers import Rational

Rat = Fraction

_DYADIC_RE = re.compile(r"^\s*(-?\d+)\s*/\s*2\^(\d+)\s*$")
_RAT_RE = re.compile(r"^\s*(-?\d+)\s*(?:/\s*(\d+))?\s*$")


class Dyadic:
    """Exact dyadic rational ``mantissa / 2**exponent`` in canonical form.

    Canonical means the mantissa is odd (or zero, with exponent 0), so two
    equal values always have identical fields.
    """

    __slots__ = ("mantissa", "exponent")

    def __init__(self, mantissa: int, exponent: int = 0):
        if exponent < 0:
            mantissa <<= -exponent
            exponent = 0
        if mantissa == 0:
            exponent = 0
        else:
            tz = (mantissa & -mantissa).bit_length() - 1
            shift = min(tz, exponent)
            mantissa >>= shift
            exponent -= shift
        object.__setattr__(self, "mantissa", mantissa)
        object.__setattr__(self, "exponent", exponent)

    def __setattr__(self, name, value):
        raise AttributeError("Dyadic is immutable")

    @classmethod
    def from_value(cls, x) -> "Dyadic":
        """Convert an int, Fraction or Dyadic; raises if the denominator is not 2^e."""
        if isinstance(x, Dyadic):
            return x
        q = Fraction(x)
        den = q.denominator
        if den & (den - 1):
            raise ValueError(f"{q} is not a dyadic rational")
        return cls(q.numerator, den.bit_length() - 1)

    def to_rat(self) -> Fraction:
        return Fraction(self.mantissa, 1 << self.exponent)

    def _coerce(self, other):
        if isinstance(other, Dyadic):
            return other
        if isinstance(other, int):
            return Dyadic(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return Fraction(self.to_rat()) + other
        e = max(self.exponent, other.exponent)
        return Dyadic((self.mantissa << (e - self.exponent)) + (other.mantissa << (e - other.exponent)), e)

    __radd__ = __add__

    def __neg__(self):
        return Dyadic(-self.mantissa, self.exponent)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return self.to_rat() - other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return self.to_rat() * other
        return Dyadic(self.mantissa * other.mantissa, self.exponent + other.exponent)

    __rmul__ = __mul__

    def shift(self, k: int) -> "Dyadic":
        """Multiply by 2**k (k may be negative)."""
        return Dyadic(self.mantissa, self.exponent - k)

    def __eq__(self, other):
        if isinstance(other, Dyadic):
            return self.mantissa == other.mantissa and self.exponent == other.exponent
        if isinstance(other, (int, Rational)):
            return self.to_rat() == other
        return NotImplemented

    def __hash__(self):
        return hash(self.to_rat())

    def __lt__(self, other):
        return self.to_rat() < _as_rat(other)

    def __le__(self, other):
        return self.to_rat() <= _as_rat(other)

    def __gt__(self, other):
        return self.to_rat() > _as_rat(other)

    def __ge__(self, other):
        return self.to_rat() >= _as_rat(other)

    def __float__(self):
        return rat_to_float(self.to_rat())

    def __str__(self):
        return f"{self.mantissa}/2^{self.exponent}"

    def __repr__(self):
        return f"Dyadic({self.mantissa}, {self.exponent})"


def _as_rat(x) -> Fraction:
    if isinstance(x, Dyadic):
        return x.to_rat()
    return Fraction(x)


def rat_cmp(a, b) -> int:
    """Return -1, 0 or 1 according to the exact order of ``a`` and ``b``."""
    a, b = _as_rat(a), _as_rat(b)
    lhs = a.numerator * b.denominator
    rhs = b.numerator * a.denominator
    return (lhs > rhs) - (lhs < rhs)


def dyadic_to_rat(d: Dyadic) -> Fraction:
    return d.to_rat()


def rat_to_dyadic(q) -> Dyadic:
    return Dyadic.from_value(q)


def rat_to_float(a) -> float:
    """Nearest double (round half to even). Raises OverflowError past the double range."""
    a = _as_rat(a)
    # int/int true division is correctly rounded in CPython
    return a.numerator / a.denominator


def format_rat(q) -> str:
    q = _as_rat(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def format_dyadic(d) -> str:
    return str(Dyadic.from_value(d))


def parse_number(s: str) -> Fraction:
    """Parse ``"p/q"``, ``"p"`` or ``"m/2^e"`` into an exact Fraction."""
    m = _DYADIC_RE.match(s)
    if m:
        return Fraction(int(m.group(1)), 1 << int(m.group(2)))
    m = _RAT_RE.match(s)
    if not m:
        raise ValueError(f"cannot parse exact number {s!r}")
    den = int(m.group(2)) if m.group(2) else 1
    if den == 0:
        raise ValueError("zero denominator")
    return Fraction(int(m.group(1)), den)


def parse_dyadic(s: str) -> Dyadic:
    return Dyadic.from_value(parse_number(s))


def lcm_rat(a: Fraction, b: Fraction) -> Fraction:
    """Least positive common multiple of two positive rationals."""
    a, b = Fraction(a), Fraction(b)
    return Fraction(math.lcm(a.numerator, b.numerator), math.gcd(a.denominator, b.denominator))
