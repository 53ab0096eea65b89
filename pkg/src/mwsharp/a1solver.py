"""Exact A1 constants of periodic step weights.

The A1 constant is a supremum over all real intervals I of
``w(I) / (|I| * essinf_I w)``. For a step weight it suffices to look at
unions U of consecutive whole pieces, with the essential infimum optionally
lowered by a vanishing sliver of the piece just left or right of U:

* with the set of touched pieces fixed, the average is a ratio of affine
  functions of each endpoint, so it is extremal when the endpoint sits on a
  piece boundary;
* a sliver of an adjacent piece changes the average by an amount that tends
  to zero while the infimum drops to that piece's value, so the supremum is
  the limit value (not attained);
* an interval longer than one period contains a copy of the global minimum
  piece, and by the mediant inequality its average is dominated by that of a
  sub-interval of length at most three periods.

Three concatenated periods are therefore exhaustive.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .exactnum import format_rat, rat_to_float
from .weight import StepWeight, essinf, integral

# Relative slack used when screening float ratios; the float error of a
# ratio of two positive cumulative sums of n terms is below (2n + 8) * 2^-53.
_SCREEN_SLACK = 1e-9


@dataclass(frozen=True)
class A1Certificate:
    value: Fraction
    witness_range: tuple[int, int]
    sliver: tuple[str, int] | None
    window_periods: int

    @property
    def value_float(self) -> float:
        return rat_to_float(self.value)

    def to_dict(self) -> dict:
        return {
            "value": format_rat(self.value),
            "value_float": self.value_float,
            "witness": {
                "first_piece": self.witness_range[0],
                "last_piece": self.witness_range[1],
                "sliver": None if self.sliver is None else {"side": self.sliver[0], "piece": self.sliver[1]},
            },
            "window_periods": self.window_periods,
        }


def interval_ratio(w: StepWeight, a, b) -> Fraction:
    """``(integral of w over [a, b]) / ((b - a) * essinf)`` exactly."""
    a, b = Fraction(a), Fraction(b)
    if a >= b:
        raise ValueError("interval_ratio needs a < b")
    return integral(w, a, b) / ((b - a) * essinf(w, a, b))


def _window(w: StepWeight, K: int):
    """Integer-scaled lengths and values of K concatenated periods.

    Lengths are multiplied by a common denominator and values by another, so
    all ratios can be compared with integer cross-multiplication.
    """
    import math

    len_den = 1
    val_den = 1
    for p in w.pieces:
        len_den = math.lcm(len_den, p.length.denominator)
        val_den = math.lcm(val_den, p.value.denominator)
    lens = [int(p.length * len_den) for p in w.pieces] * K
    vals = [int(p.value * val_den) for p in w.pieces] * K
    return lens, vals


def _range_key(lens, vals, pre_m, pre_l, i, j):
    """Exact (numerator, denominator, sliver) of the best choice for pieces i..j."""
    n = len(vals)
    mn = min(vals[i:j + 1])
    left = vals[(i - 1) % n]
    right = vals[(j + 1) % n]
    sliver = None
    m = mn
    if left < m:
        m, sliver = left, ("left", (i - 1) % n)
    if right < m:
        m, sliver = right, ("right", (j + 1) % n)
    return pre_m[j + 1] - pre_m[i], (pre_l[j + 1] - pre_l[i]) * m, sliver


def _prefix(lens, vals):
    pre_m = [0]
    pre_l = [0]
    for ln, v in zip(lens, vals):
        pre_m.append(pre_m[-1] + ln * v)
        pre_l.append(pre_l[-1] + ln)
    return pre_m, pre_l


def _better(num, den, bnum, bden):
    return num * bden > bnum * den


def _certificate(w, K, lens, vals, pre_m, pre_l, candidates):
    bnum, bden, best = 0, 1, None
    for i, j in candidates:
        num, den, sliver = _range_key(lens, vals, pre_m, pre_l, i, j)
        if best is None or _better(num, den, bnum, bden):
            bnum, bden, best = num, den, (i, j, sliver)
    # both scales cancel between mass and length * value
    i, j, sliver = best
    return A1Certificate(Fraction(bnum, bden), (i, j), sliver, K)


def a1_exact(w: StepWeight, window_periods: int = 3, method: str = "screened") -> A1Certificate:
    """Exact A1 constant with a witness.

    ``method="screened"`` ranks all piece ranges with float ratios (vectorized)
    and decides exactly among the near-maximal ones; ``method="exact"`` runs
    the plain O(P^2) enumeration with integer arithmetic throughout.
    """
    if window_periods < 3:
        raise ValueError("window_periods must be at least 3")
    K = window_periods
    if len(w.pieces) == 1:
        return A1Certificate(Fraction(1), (0, 0), None, K)
    lens, vals = _window(w, K)
    pre_m, pre_l = _prefix(lens, vals)
    if method == "exact":
        cands = _exact_candidates(lens, vals, pre_m, pre_l)
    elif method == "screened":
        cands = _screen_candidates(lens, vals)
    else:
        raise ValueError(f"unknown method {method!r}")
    return _certificate(w, K, lens, vals, pre_m, pre_l, cands)


def _exact_candidates(lens, vals, pre_m, pre_l):
    n = len(vals)
    bnum, bden, best = 0, 1, (0, 0)
    for i in range(n):
        left = vals[i - 1]
        run = vals[i]
        for j in range(i, n):
            v = vals[j]
            if v < run:
                run = v
            right = vals[(j + 1) % n]
            m = run
            if left < m:
                m = left
            if right < m:
                m = right
            num = pre_m[j + 1] - pre_m[i]
            den = (pre_l[j + 1] - pre_l[i]) * m
            if num * bden > bnum * den:
                bnum, bden, best = num, den, (i, j)
    return [best]


def _screen_candidates(lens, vals):
    L = np.array(lens, dtype=float)
    V = np.array(vals, dtype=float)
    n = len(V)
    M = L * V
    Vnext = np.roll(V, -1)
    rows = []
    best = 0.0
    for i in range(n):
        mass = np.cumsum(M[i:])
        length = np.cumsum(L[i:])
        m = np.minimum(np.minimum.accumulate(V[i:]), Vnext[i:])
        m = np.minimum(m, V[i - 1])
        r = mass / (length * m)
        rows.append(r)
        best = max(best, float(r.max()))
    cut = best * (1 - _SCREEN_SLACK)
    cands = []
    for i, r in enumerate(rows):
        for j in np.flatnonzero(r >= cut):
            cands.append((i, i + int(j)))
    return cands


def certificate_value(w: StepWeight, cert: A1Certificate) -> Fraction:
    """Recompute a certificate's value from the weight alone."""
    P = len(w.pieces)
    i, j = cert.witness_range
    a = (i // P) * w.period + w.pieces[i % P].start
    b = (j // P) * w.period + w.pieces[j % P].end
    m = essinf(w, a, b)
    if cert.sliver is not None:
        side, k = cert.sliver
        m = min(m, w.pieces[k % P].value)
    return integral(w, a, b) / ((b - a) * m)


@dataclass(frozen=True)
class OracleResult:
    """Brute-force lower bounds for the A1 constant.

    ``value`` is a maximum over genuine intervals (so it never exceeds the
    supremum); ``sliver_limit`` replaces each epsilon-sliver interval's
    average by its epsilon -> 0 limit while keeping the lowered infimum.
    """

    value: Fraction
    sliver_limit: Fraction
    intervals: int


def a1_bruteforce(w: StepWeight, samples: int = 0, seed: int = 0, slivers: bool = True,
                  eps_exponent: int = 40, periods: int = 3) -> OracleResult:
    """Max of interval ratios over breakpoint pairs in ``periods`` periods, random
    intervals and epsilon-sliver extensions, via direct integral/essinf queries."""
    if samples < 0:
        raise ValueError("samples must be >= 0")
    P = len(w.pieces)
    pts = [c * w.period + p.start for c in range(periods) for p in w.pieces] + [periods * w.period]
    scale = Fraction(1, 2**eps_exponent)
    best = Fraction(0)
    limit = Fraction(0)
    count = 0
    for ia in range(len(pts)):
        a = pts[ia]
        for ib in range(ia + 1, len(pts)):
            b = pts[ib]
            mass = integral(w, a, b)
            r = mass / ((b - a) * essinf(w, a, b))
            count += 1
            best = max(best, r)
            limit = max(limit, r)
            if not slivers:
                continue
            # sliver of the piece just left of a / just right of b
            left_eps = w.pieces[(ia - 1) % P].length * scale
            right_eps = w.pieces[ib % P].length * scale
            for a2, b2 in ((a - left_eps, b), (a, b + right_eps)):
                m2 = essinf(w, a2, b2)
                best = max(best, integral(w, a2, b2) / ((b2 - a2) * m2))
                limit = max(limit, mass / ((b - a) * m2))
                count += 1
    rng = random.Random(seed)
    span = periods * w.period
    for _ in range(samples):
        a = Fraction(rng.randrange(2**30), 2**30) * span
        b = Fraction(rng.randrange(2**30), 2**30) * span
        if a == b:
            continue
        a, b = min(a, b), max(a, b)
        r = interval_ratio(w, a, b)
        best = max(best, r)
        limit = max(limit, r)
        count += 1
    return OracleResult(best, limit, count)


def max_adjacent_jump(w: StepWeight) -> tuple[Fraction, Fraction]:
    """Largest ratio between values of adjacent pieces (period wrap included)."""
    P = len(w.pieces)
    best, where = Fraction(1), w.pieces[0].start
    for i in range(P):
        v1 = w.pieces[i - 1].value
        v2 = w.pieces[i].value
        r = max(v1 / v2, v2 / v1)
        if r > best:
            best, where = r, w.pieces[i].start
    return best, where


def jump_audit(w: StepWeight) -> dict:
    """Adjacent-jump statistics of a constructed weight.

    Reports the set of adjacent ratios, where ratio 8 occurs, and the largest
    jump strictly inside any ``L_k = [2^k + k, 2^{k+1})`` (or its mirror).
    """
    P = len(w.pieces)
    T = w.period
    ratios = set()
    where = {}
    for i in range(P):
        v1, v2 = w.pieces[i - 1].value, w.pieces[i].value
        r = max(v1 / v2, v2 / v1)
        ratios.add(r)
        where.setdefault(r, []).append(w.pieces[i].start)
    intra = Fraction(1)
    if w.n is not None:
        for k in range(2, w.n + 1):
            lo, hi = Fraction(2**k + k), Fraction(2 ** (k + 1))
            for seg_lo, seg_hi in ((lo, hi), (T - hi, T - lo)):
                inside = [p for p in w.pieces if seg_lo <= p.start and p.end <= seg_hi]
                for p, q in zip(inside, inside[1:]):
                    intra = max(intra, p.value / q.value, q.value / p.value)
    return {
        "ratios": sorted(ratios),
        "locations": {r: where[r] for r in sorted(where)},
        "max_intra_L": intra,
        "max_jump": max(ratios),
    }
