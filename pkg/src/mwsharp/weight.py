"""The extremal periodic step weight and exact queries on step weights."""

from __future__ import annotations

import json
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .exactnum import Dyadic, format_dyadic, format_rat, parse_number


@dataclass(frozen=True)
class Piece:
    """Half-open interval ``[start, end)`` carrying a constant positive value."""

    start: Fraction
    end: Fraction
    value: Fraction

    def __post_init__(self):
        if not self.start < self.end:
            raise ValueError(f"empty piece [{self.start}, {self.end})")
        if self.value <= 0:
            raise ValueError("piece value must be positive")

    @property
    def length(self) -> Fraction:
        return self.end - self.start


@dataclass(frozen=True)
class StepWeight:
    """Periodic piecewise-constant weight.

    ``pieces`` tile one period ``[0, period)``; the weight at any real x is the
    value of the piece containing ``x mod period``.
    """

    pieces: tuple
    period: Fraction
    label: str = ""
    n: int | None = None  # construction parameter, when built by build_weight
    _starts: list = field(init=False, repr=False, compare=False)
    _prefix: list = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        pieces = tuple(self.pieces)
        if not pieces:
            raise ValueError("a step weight needs at least one piece")
        object.__setattr__(self, "pieces", pieces)
        object.__setattr__(self, "period", Fraction(self.period))
        if pieces[0].start != 0 or pieces[-1].end != self.period:
            raise ValueError("pieces must tile [0, period)")
        for a, b in zip(pieces, pieces[1:]):
            if a.end != b.start:
                raise ValueError(f"gap or overlap at {a.end} / {b.start}")
        prefix = [Fraction(0)]
        for p in pieces:
            prefix.append(prefix[-1] + p.value * p.length)
        object.__setattr__(self, "_starts", [p.start for p in pieces])
        object.__setattr__(self, "_prefix", prefix)

    def __len__(self):
        return len(self.pieces)

    @property
    def values(self) -> list:
        return [p.value for p in self.pieces]

    @property
    def mass(self) -> Fraction:
        """Integral over one period."""
        return self._prefix[-1]

    @property
    def min_value(self) -> Fraction:
        return min(p.value for p in self.pieces)

    @property
    def max_value(self) -> Fraction:
        return max(p.value for p in self.pieces)

    def breakpoints(self) -> list:
        """Piece starts in one period (0 included, period excluded)."""
        return list(self._starts)

    def locate(self, x) -> tuple[int, int]:
        """Return ``(copy, index)`` with x in ``pieces[index]`` shifted by ``copy`` periods."""
        x = Fraction(x)
        q, r = divmod(x, self.period)
        return int(q), bisect_right(self._starts, r) - 1

    def scaled(self, c) -> "StepWeight":
        """The weight ``c * w`` for a positive rational c."""
        c = Fraction(c)
        if c <= 0:
            raise ValueError("scale must be positive")
        return StepWeight(tuple(Piece(p.start, p.end, p.value * c) for p in self.pieces),
                          self.period, f"{c}*{self.label}" if self.label else "", None)

    # JSON ------------------------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "period": _fmt_point(self.period),
            "pieces": [
                {"start": _fmt_point(p.start), "end": _fmt_point(p.end), "value": format_rat(p.value)}
                for p in self.pieces
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "StepWeight":
        pieces = tuple(
            Piece(parse_number(p["start"]), parse_number(p["end"]), parse_number(p["value"]))
            for p in data["pieces"]
        )
        label = data.get("label", "")
        n = None
        if label.startswith("MW-sharp N="):
            n = int(label.split("=", 1)[1])
        return cls(pieces, parse_number(data["period"]), label, n)

    def dump(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1)

    @classmethod
    def load(cls, path) -> "StepWeight":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def _fmt_point(x: Fraction) -> str:
    den = x.denominator
    if den & (den - 1) == 0:
        return format_dyadic(x)
    return format_rat(x)


def step_weight(breaks: Sequence, values: Sequence, label: str = "") -> StepWeight:
    """Build a weight from breakpoints ``0 = b0 < b1 < ... < bP = period`` and P values."""
    breaks = [Fraction(b) for b in breaks]
    if len(breaks) != len(values) + 1:
        raise ValueError("need one more breakpoint than values")
    pieces = tuple(Piece(a, b, Fraction(v)) for a, b, v in zip(breaks, breaks[1:], values))
    return StepWeight(pieces, breaks[-1], label)


def constant_weight(value=1, period=1) -> StepWeight:
    return step_weight([0, period], [value], f"constant {value}")


# ---------------------------------------------------------------------------
# The construction


def block_pieces(k: int) -> list[Piece]:
    """Pieces of ``w_k`` on ``J_k = [2^k, 2^{k+1})`` in left-to-right order.

    ``I_k = [2^k, 2^k + k)`` carries 2^{k+1}; the rest ``L_k`` is split into
    halves, and each half into intervals of geometrically halving length
    moving outwards from the center of ``L_k``, the j-th ones carrying 2^j.
    """
    lo = Fraction(2**k)
    hi = Fraction(2 ** (k + 1))
    half = Fraction(2**k - k, 2)  # |L_k^-| = |L_k^+|
    center = lo + k + half
    left = []  # (L_k^-)^j, j = 1..k, built from the center outwards
    right = []
    b, c = center, center
    for j in range(1, k):
        ln = half / 2**j
        left.append(Piece(b - ln, b, Fraction(2**j)))
        right.append(Piece(c, c + ln, Fraction(2**j)))
        b -= ln
        c += ln
    ln = half / 2 ** (k - 1)
    left.append(Piece(lo + k, lo + k + ln, Fraction(2**k)))
    right.append(Piece(hi - ln, hi, Fraction(2**k)))
    assert left[-1].end == b and right[-1].start == c
    return [Piece(lo, lo + k, Fraction(2 ** (k + 1)))] + left[::-1] + right


def build_weight(N: int) -> StepWeight:
    """The periodic weight with ``[w]_A1 ~ N`` and ``|{x > 1: w(x) > x}| ~ N^2``.

    On ``[0, 2^{N+1})`` it is ``chi_[0,4) + sum_{k=2}^N w_k``; the second half
    of the period ``2^{N+2}`` is the mirror image, built by reflecting the
    half-open pieces.
    """
    if not isinstance(N, int) or N < 2:
        raise ValueError(f"N must be an integer >= 2, got {N!r}")
    half = [Piece(Fraction(0), Fraction(4), Fraction(1))]
    for k in range(2, N + 1):
        half.extend(block_pieces(k))
    period = Fraction(2 ** (N + 2))
    mirrored = [Piece(period - p.end, period - p.start, p.value) for p in reversed(half)]
    return StepWeight(tuple(half + mirrored), period, f"MW-sharp N={N}", N)


def expected_piece_count(N: int) -> int:
    return 2 * (1 + sum(2 * k + 1 for k in range(2, N + 1)))


# ---------------------------------------------------------------------------
# Queries


def value_at(w: StepWeight, x) -> Fraction:
    _, i = w.locate(x)
    return w.pieces[i].value


def _antiderivative(w: StepWeight, x: Fraction) -> Fraction:
    q, r = divmod(Fraction(x), w.period)
    i = bisect_right(w._starts, r) - 1
    p = w.pieces[i]
    return q * w.mass + w._prefix[i] + p.value * (r - p.start)


def integral(w: StepWeight, a, b) -> Fraction:
    """Exact integral of w over [a, b]."""
    a, b = Fraction(a), Fraction(b)
    if a > b:
        raise ValueError("integral needs a <= b")
    return _antiderivative(w, b) - _antiderivative(w, a)


def essinf(w: StepWeight, a, b) -> Fraction:
    """Smallest value among pieces meeting (a, b) in positive measure."""
    a, b = Fraction(a), Fraction(b)
    if a >= b:
        raise ValueError("essinf needs a < b")
    if b - a >= w.period:
        return w.min_value
    copy, i = w.locate(a)
    P = len(w.pieces)
    best = None
    pos = copy * w.period + w.pieces[i].start
    while pos < b:
        v = w.pieces[i].value
        best = v if best is None else min(best, v)
        pos += w.pieces[i].length
        i += 1
        if i == P:
            i = 0
    return best


def superlevel_vs_identity(w: StepWeight) -> Fraction:
    """Exact measure of ``{x > 1 : w(x) > x}``."""
    total = Fraction(0)
    vmax = w.max_value
    copy = 0
    while copy * w.period < vmax:
        off = copy * w.period
        for p in w.pieces:
            lo = max(p.start + off, Fraction(1))
            hi = min(p.end + off, p.value)
            if hi > lo:
                total += hi - lo
        copy += 1
    return total


def block_mass_closed_form(k: int) -> int:
    return 2 ** (k + 1) * k + (k - 1) * (2**k - k) + 2 * (2**k - k)


def block_mass(w: StepWeight, k: int) -> Fraction:
    """Exact mass of ``J_k``; cross-checked against the closed form.

    Raises ``AssertionError`` when piece summation and the closed form disagree.
    """
    if w.n is None:
        raise ValueError("block_mass needs a weight from build_weight")
    if not 2 <= k <= w.n:
        raise ValueError(f"k must lie in [2, {w.n}], got {k}")
    lo, hi = Fraction(2**k), Fraction(2 ** (k + 1))
    summed = sum((p.value * p.length for p in w.pieces if lo <= p.start and p.end <= hi), Fraction(0))
    closed = block_mass_closed_form(k)
    if summed != closed:
        raise AssertionError(f"block {k}: piece sum {summed} != closed form {closed}")
    return summed
