"""Diagonal matrix weights ``W = diag(w_1, ..., w_n)`` and the scalar embedding ``W = w I_n``.

For diagonal matrices ``||W(x) W(y)^{-1}|| = max_i w_i(x) / w_i(y)``, so the
matrix A1 constant is again a supremum of averages of step functions and can
be enumerated exactly like the scalar one.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .a1solver import a1_exact
from .exactnum import format_rat
from .operators import maximal_chi01
from .weight import Piece, StepWeight, value_at


@dataclass(frozen=True)
class DiagMatrixWeight:
    """n diagonal entries refined to a common grid over one shared period."""

    entries: tuple

    def __post_init__(self):
        entries = tuple(self.entries)
        if not entries:
            raise ValueError("need at least one diagonal entry")
        period = entries[0].period
        if any(e.period != period for e in entries):
            raise ValueError("diagonal entries must share the same period")
        grid = sorted({p.start for e in entries for p in e.pieces} | {period})
        refined = []
        for e in entries:
            pieces = tuple(Piece(a, b, value_at(e, a)) for a, b in zip(grid, grid[1:]))
            refined.append(StepWeight(pieces, period, e.label, e.n))
        object.__setattr__(self, "entries", tuple(refined))

    @property
    def n(self) -> int:
        return len(self.entries)

    @property
    def period(self) -> Fraction:
        return self.entries[0].period

    def diag_at(self, x) -> tuple:
        return tuple(value_at(e, x) for e in self.entries)


def embed_scalar(w: StepWeight, n: int) -> DiagMatrixWeight:
    """``W = w I_n``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return DiagMatrixWeight((w,) * n)


def operator_norm_diag(dx: Sequence, dy: Sequence) -> Fraction:
    """``||diag(dx) diag(dy)^{-1}||`` for positive diagonals."""
    return max(Fraction(a) / Fraction(b) for a, b in zip(dx, dy))


def matrix_a1_diag(W: DiagMatrixWeight, window_periods: int = 3) -> Fraction:
    """Exact ``sup_Q esssup_{y in Q} avg_{x in Q} ||W(x) W(y)^{-1}||``.

    For each distinct diagonal vector u taken by W(y), the integrand
    ``max_i w_i(x) / u_i`` is a step function of x; its averages are taken
    over whole-piece ranges that contain a piece of class u or are adjacent
    to one (the sliver limit, as in the scalar case).
    """
    if W.n == 1:
        return a1_exact(W.entries[0], window_periods).value
    P = len(W.entries[0].pieces)
    if P == 1:
        return Fraction(1)
    K = window_periods
    lens = [p.length for p in W.entries[0].pieces] * K
    vecs = [tuple(e.pieces[i].value for e in W.entries) for i in range(P)] * K
    classes = sorted(set(vecs))
    den = math.lcm(*(x.denominator for x in lens))
    ilens = [int(x * den) for x in lens]
    n = len(vecs)
    best = Fraction(1)
    for u in classes:
        g = [max(a / b for a, b in zip(vx, u)) for vx in vecs]
        gden = math.lcm(*(x.denominator for x in g))
        mass = [int(gi * gden) * li for gi, li in zip(g, ilens)]
        member = [vx == u for vx in vecs]
        bnum, bden = best.numerator * gden, best.denominator
        for i in range(n):
            seen = member[i - 1]
            m = 0
            ln = 0
            for j in range(i, n):
                m += mass[j]
                ln += ilens[j]
                seen = seen or member[j] or member[(j + 1) % n]
                if seen and m * bden > bnum * ln:
                    bnum, bden = m, ln
        best = Fraction(bnum, bden * gden)
    return best


# ---------------------------------------------------------------------------
# Vector functions and the matrix maximal operator


@dataclass(frozen=True)
class VectorStepFunction:
    """Step function R -> Q^n: ``values[k]`` on ``[breaks[k], breaks[k+1])``, zero outside."""

    breaks: tuple
    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "breaks", tuple(Fraction(b) for b in self.breaks))
        object.__setattr__(self, "values", tuple(tuple(Fraction(c) for c in v) for v in self.values))
        if len(self.breaks) != len(self.values) + 1:
            raise ValueError("need one more breakpoint than value vectors")
        if any(a >= b for a, b in zip(self.breaks, self.breaks[1:])):
            raise ValueError("breakpoints must increase")
        if len({len(v) for v in self.values}) > 1:
            raise ValueError("all value vectors need the same dimension")

    @property
    def n(self) -> int:
        return len(self.values[0])

    def at(self, y) -> tuple:
        k = bisect_right(self.breaks, Fraction(y)) - 1
        if k < 0 or k >= len(self.values):
            return (Fraction(0),) * self.n
        return self.values[k]


@dataclass(frozen=True)
class SqrtRat:
    """The number ``factor * sqrt(radicand)`` with a square-free-ish integer radicand."""

    radicand: int
    factor: Fraction

    def __float__(self):
        return float(self.factor) * math.sqrt(self.radicand)

    def __str__(self):
        return f"sqrt({self.radicand})*{format_rat(self.factor)}"


def _sqrt_rat(q: Fraction):
    """Exact square root as Fraction if q is a square, else ``(radicand, factor)``."""
    q = Fraction(q)
    num, den = q.numerator * q.denominator, q.denominator
    # sqrt(q) = sqrt(num) / den
    s = math.isqrt(num)
    if s * s == num:
        return Fraction(s, den), 1
    out, rad = 1, num
    p = 2
    while p * p <= rad and p < 10_000:
        while rad % (p * p) == 0:
            rad //= p * p
            out *= p
        p += 1
    return Fraction(out, den), rad


def matrix_maximal_at(W: DiagMatrixWeight, f: VectorStepFunction, x):
    """``M_W f(x) = sup_{Q containing x} avg_{y in Q} |W(x) W(y)^{-1} f(y)|`` exactly.

    Returns a Fraction when all norms share a rational square root, a
    :class:`SqrtRat` when they share one irrational radicand, and raises
    ``ValueError`` otherwise.
    """
    x = Fraction(x)
    if f.n != W.n:
        raise ValueError("dimension mismatch")
    wx = W.diag_at(x)
    lo, hi = f.breaks[0], f.breaks[-1]
    cuts = set(f.breaks) | {x}
    for e in W.entries:
        T = e.period
        c0 = math.floor(lo / T)
        c1 = math.ceil(hi / T)
        for c in range(c0, c1 + 1):
            for p in e.pieces:
                b = p.start + c * T
                if lo < b < hi:
                    cuts.add(b)
    cuts = sorted(cuts)
    # integrand per cut interval, as (rational factor, radicand)
    segs = []
    radicand = None
    for a, b in zip(cuts, cuts[1:]):
        mid = (a + b) / 2
        fy = f.at(mid)
        wy = W.diag_at(mid)
        sq = sum((wx[i] / wy[i] * fy[i]) ** 2 for i in range(W.n))
        factor, rad = _sqrt_rat(sq)
        if factor != 0:
            if radicand is None:
                radicand = rad
            elif rad != radicand:
                raise ValueError("integrand norms have different irrational radicands")
        segs.append((a, b, factor))
    # sup of averages over [a, b] containing x, a, b in cuts; plus the Lebesgue limits at x
    left = [c for c in cuts if c <= x]
    right = [c for c in cuts if c >= x]
    pre = {cuts[0]: Fraction(0)}
    acc = Fraction(0)
    for a, b, fac in segs:
        acc += fac * (b - a)
        pre[b] = acc

    def prim(t):
        if t <= cuts[0]:
            return Fraction(0)
        if t >= cuts[-1]:
            return acc
        return pre[t]

    best = Fraction(0)
    for a in left:
        for b in right:
            if b > a:
                best = max(best, (prim(b) - prim(a)) / (b - a))
    for a, b, fac in segs:
        if a <= x <= b:
            best = max(best, fac)
    if radicand is None or radicand == 1:
        return best
    return SqrtRat(radicand, best)


def lemma21_check(w: StepWeight, n: int, sample_points: Sequence) -> dict:
    """Check ``|M_W f(x)| = w(x) M chi_[0,1](x)`` for ``W = w I_n``, ``f = (w chi_[0,1], 0, ...)``,
    and ``[W]_A1 = [w]_A1``."""
    W = embed_scalar(w, n)
    breaks = sorted({Fraction(0), Fraction(1)} | {p.start for p in w.pieces if 0 < p.start < 1})
    vals = [(value_at(w, a),) + (Fraction(0),) * (n - 1) for a in breaks[:-1]]
    f = VectorStepFunction(tuple(breaks), tuple(vals))
    mismatches = []
    for x in sample_points:
        x = Fraction(x)
        lhs = matrix_maximal_at(W, f, x)
        rhs = value_at(w, x) * maximal_chi01(x)
        if lhs != rhs:
            mismatches.append({"x": format_rat(x), "matrix": str(lhs), "scalar": format_rat(rhs)})
    a1_m = matrix_a1_diag(W)
    a1_s = a1_exact(w).value
    return {
        "n": n,
        "points": len(sample_points),
        "mismatches": mismatches,
        "a1_matrix": format_rat(a1_m),
        "a1_scalar": format_rat(a1_s),
        "a1_equal": a1_m == a1_s,
        "passed": not mismatches and a1_m == a1_s,
    }
