"""Level sets and weak-type quasinorms of ``w * |T chi_[0,1]|`` for T in {M, H}.

``M`` is the uncentered Hardy-Littlewood maximal operator, for which
``M chi_[0,1](x)`` is 1 on [0, 1], 1/x right of 1 and 1/(1 - x) left of 0.
``H`` is the Hilbert transform, ``H chi_[0,1](x) = log|x / (x - 1)|``.

For a periodic step weight, the set ``{w |T chi| > alpha}`` is a finite
union of intervals whose endpoints come from inverting the symbol on each
level set of w. The quasinorm ``sup_alpha alpha * mu(alpha)`` is found by
branch and bound over alpha: ``mu`` is nonincreasing, so on ``[a, b]``
the product is at most ``b * mu(a)``, and intervals containing only a few
kinks of ``mu`` are resolved directly.

Tail. Because w is periodic and the symbols decay like 1/|x|,
``alpha * mu(alpha)`` tends to twice the mean of w as ``alpha -> 0``. For M
the excess over that limit is ``S(1/alpha) * alpha`` with S periodic (all
level-set periods divide a common one), so the supremum over small alpha is
either the limit itself or is reached within one period of ``1/alpha``;
only that window needs searching. For H the tail is cut where a crude
bound makes it negligible and the remaining gap is reported.
"""

from __future__ import annotations

import heapq
import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

from .exactnum import format_rat, lcm_rat, rat_to_float
from .weight import StepWeight

EPS = 2.0**-52


class OperatorKind(Enum):
    M = "M"
    H = "H"


# ---------------------------------------------------------------------------
# Symbols


def maximal_chi01(x) -> Fraction:
    """Uncentered maximal function of ``chi_[0,1]`` at x (exact)."""
    x = Fraction(x)
    if x > 1:
        return 1 / x
    if x < 0:
        return 1 / (1 - x)
    return Fraction(1)


def hilbert_chi01(x) -> float:
    """``|H chi_[0,1](x)| = |log|x / (x - 1)||``; within a few ulps.

    Raises ``ZeroDivisionError``-style ``ValueError`` at the singular points 0 and 1.
    """
    x = Fraction(x)
    if x == 0 or x == 1:
        raise ValueError(f"H chi_[0,1] is singular at {x}")
    if x > 1:
        # log(x / (x - 1)) = log1p(1 / (x - 1))
        return math.log1p(rat_to_float(1 / (x - 1)))
    if x < 0:
        return math.log1p(rat_to_float(1 / -x))
    # 0 < x < 1: |log(x / (1 - x))|
    if x <= Fraction(1, 2):
        return math.log1p(rat_to_float((1 - 2 * x) / x))
    return math.log1p(rat_to_float((2 * x - 1) / (1 - x)))


def hilbert_error_bound(value: float) -> float:
    """Absolute error bound of :func:`hilbert_chi01` (4 ulps)."""
    return 4 * math.ulp(value) if value else 4 * 2.0**-1074


# ---------------------------------------------------------------------------
# Level structure of a periodic step weight


class _Level:
    """One level set ``{w = v}`` of a periodic step weight, in exact and float form."""

    def __init__(self, value, spans, period):
        self.value = value
        self.period = period
        merged = []
        for s, e in spans:
            if merged and merged[-1][1] == s:
                merged[-1][1] = e
            else:
                merged.append([s, e])
        self.starts = [s for s, _ in merged]
        self.ends = [e for _, e in merged]
        self.lens = [e - s for s, e in merged]
        self.before = [Fraction(0)]
        for ln in self.lens:
            self.before.append(self.before[-1] + ln)
        self.total = self.before[-1]
        bps = sorted(set(self.starts) | set(self.ends))
        if bps and bps[-1] == period:
            bps = sorted(set(bps[:-1]) | {Fraction(0)})
        self.bps = bps
        # float mirrors
        self.fvalue = float(value)
        self.fperiod = float(period)
        self.fstarts = [float(s) for s in self.starts]
        self.flens = [float(x) for x in self.lens]
        self.fbefore = [float(x) for x in self.before]
        self.ftotal = float(self.total)
        self.fbps = [float(b) for b in self.bps]

    def cum(self, y: Fraction) -> Fraction:
        """``|A^per cap [0, y)|`` (negative for y < 0), exact."""
        q, r = divmod(y, self.period)
        i = bisect_right(self.starts, r) - 1
        part = Fraction(0) if i < 0 else self.before[i] + min(r - self.starts[i], self.lens[i])
        return q * self.total + part

    def fcum(self, y: float) -> float:
        q = math.floor(y / self.fperiod)
        r = y - q * self.fperiod
        i = bisect_right(self.fstarts, r) - 1
        part = 0.0 if i < 0 else self.fbefore[i] + min(r - self.fstarts[i], self.flens[i])
        return q * self.ftotal + part

    def points_between(self, lo, hi, limit=None, exact=True):
        """Boundary points of ``A^per`` strictly inside (lo, hi), ascending."""
        bps = self.bps if exact else self.fbps
        T = self.period if exact else self.fperiod
        out = []
        q = math.floor(lo / T)
        base = q * T
        i = bisect_right(bps, lo - base)
        while True:
            if i == len(bps):
                i = 0
                q += 1
                base = q * T
            x = base + bps[i]
            if x >= hi:
                return out
            out.append(x)
            if limit is not None and len(out) > limit:
                return out
            i += 1

    def count_between(self, lo, hi, exact=True) -> int:
        bps = self.bps if exact else self.fbps
        T = self.period if exact else self.fperiod
        n = len(bps)

        def below(y, strict):  # number of periodic points < y (or <= y)
            q = math.floor(y / T)
            r = y - q * T
            k = bisect_left(bps, r) if strict else bisect_right(bps, r)
            return q * n + k

        return max(0, below(hi, True) - below(lo, False))


def _levels(w: StepWeight) -> list[_Level]:
    spans = {}
    for p in w.pieces:
        spans.setdefault(p.value, []).append((p.start, p.end))
    return [_Level(v, sp, w.period) for v, sp in sorted(spans.items())]


# ---------------------------------------------------------------------------
# Profiles: mu(alpha) and its kinks for each operator


class _MaximalProfile:
    """Exact level-set measures of ``w * M chi_[0,1]``."""

    exact = True

    def __init__(self, w: StepWeight):
        self.w = w
        self.levels = _levels(w)
        self.one = Fraction(1)

    def mu(self, alpha: Fraction, closed: bool = False) -> Fraction:
        """``|{w M chi > alpha}|``, or ``|{... >= alpha}|`` when ``closed``."""
        total = Fraction(0)
        for lv in self.levels:
            v = lv.value
            reach = v / alpha
            if reach > 1:
                total += lv.cum(reach) - lv.cum(self.one)
                total += lv.cum(Fraction(0)) - lv.cum(1 - reach)
            if v > alpha or (closed and v == alpha):
                total += lv.cum(self.one) - lv.cum(Fraction(0))
        return total

    def count_kinks(self, a: Fraction, b: Fraction) -> int:
        n = 0
        for lv in self.levels:
            v = lv.value
            lo, hi = max(v / b, self.one), max(v / a, self.one)
            if hi > lo:
                n += lv.count_between(lo, hi)
                n += lv.count_between(1 - hi, 1 - lo)
            if a < v < b:
                n += 1
        return n

    def kinks(self, a: Fraction, b: Fraction) -> list:
        out = set()
        for lv in self.levels:
            v = lv.value
            lo, hi = max(v / b, self.one), max(v / a, self.one)
            if hi > lo:
                out.update(v / x for x in lv.points_between(lo, hi))
                out.update(v / (1 - x) for x in lv.points_between(1 - hi, 1 - lo))
            if a < v < b:
                out.add(v)
        return sorted(out)

    def split(self, a, b):
        g = Fraction(math.sqrt(float(a) * float(b))).limit_denominator(2**40)
        if not a < g < b:
            g = (a + b) / 2
        return g


class _HilbertProfile:
    """Float level-set measures of ``w * |H chi_[0,1]|`` with error tracking."""

    exact = False

    def __init__(self, w: StepWeight):
        self.w = w
        self.levels = _levels(w)

    @staticmethod
    def thresholds(t: float):
        """Right reach, left reach and the middle half-width for symbol level t."""
        if t > 700:
            return 1.0, 0.0, 0.0
        em = math.expm1(t)
        return 1.0 + 1.0 / em, -1.0 / em, 1.0 / (2.0 + em)

    def mu(self, alpha: float, closed: bool = False) -> float:
        return self.mu_err(alpha)[0]

    def mu_err(self, alpha: float):
        """Measure and an absolute rounding-error bound."""
        total = 0.0
        err = 0.0
        for lv in self.levels:
            r, l, a = self.thresholds(alpha / lv.fvalue)
            terms = (
                lv.fcum(r) - lv.fcum(1.0),
                lv.fcum(0.0) - lv.fcum(l),
                lv.fcum(a) - lv.fcum(0.0),
                lv.fcum(1.0) - lv.fcum(1.0 - a),
            )
            for x in terms:
                total += x
            # threshold (few ulps relative) times slope <= 1, plus cancellation in differences
            err += 8 * EPS * (abs(r) + abs(l) + 2 + abs(lv.fcum(r)) + abs(lv.fcum(l)))
        err += EPS * abs(total) * 4 * len(self.levels)
        return total, err

    def _windows(self, lv, a, b):
        """x-intervals swept by the three thresholds of a level as alpha runs over [a, b]."""
        ra, la, ma = self.thresholds(a / lv.fvalue)
        rb, lb, mb = self.thresholds(b / lv.fvalue)
        return ((rb, ra), (la, lb), (mb, ma), (1.0 - ma, 1.0 - mb))

    def count_kinks(self, a: float, b: float) -> int:
        n = 0
        for lv in self.levels:
            for lo, hi in self._windows(lv, a, b):
                if hi > lo:
                    n += lv.count_between(lo, hi, exact=False)
        return n

    def kinks(self, a: float, b: float) -> list:
        out = set()
        for lv in self.levels:
            v = lv.fvalue
            (r0, r1), (l0, l1), (m0, m1), (n0, n1) = self._windows(lv, a, b)
            for x in lv.points_between(r0, r1, exact=False):
                out.add(v * math.log1p(1.0 / (x - 1.0)))
            for x in lv.points_between(l0, l1, exact=False):
                if x < 0:
                    out.add(v * math.log1p(-1.0 / x))
            for lo, hi in ((m0, m1), (n0, n1)):
                for x in lv.points_between(lo, hi, exact=False):
                    if 0 < x < 1:
                        c = min(x, 1 - x)
                        out.add(v * math.log1p((1 - 2 * c) / c))
        return sorted(k for k in out if a < k < b)

    def split(self, a, b):
        return math.sqrt(a * b)


def _profile(w, op):
    op = OperatorKind(op)
    return _MaximalProfile(w) if op is OperatorKind.M else _HilbertProfile(w)


# ---------------------------------------------------------------------------
# Level sets


def levelset_measure(w: StepWeight, op, alpha):
    """Measure of ``{x : w(x) |T chi_[0,1]|(x) > alpha}``.

    Exact Fraction for M; ``(value, abs_error)`` floats for H.
    """
    op = OperatorKind(op)
    if op is OperatorKind.M:
        alpha = Fraction(alpha)
        if alpha <= 0:
            raise ValueError("alpha must be positive")
        return _MaximalProfile(w).mu(alpha)
    alpha = float(alpha)
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    return _HilbertProfile(w).mu_err(alpha)


def levelset_pieces(w: StepWeight, alpha, closed: bool = False, limit: int = 100_000):
    """Contributions ``(copy, piece index, lo, hi)`` to ``{w M chi > alpha}`` (exact).

    Returns ``None`` if there are more than ``limit`` of them.
    """
    alpha = Fraction(alpha)
    P = len(w.pieces)
    T = w.period
    out = []

    def add(copy, i, lo, hi):
        if hi > lo:
            out.append((copy, i, lo, hi))

    for i, p in enumerate(w.pieces):
        v = p.value
        if v > alpha or (closed and v == alpha):
            for c in range(math.floor(-p.end / T) + 1, math.ceil((1 - p.start) / T)):
                add(c, i, max(p.start + c * T, Fraction(0)), min(p.end + c * T, Fraction(1)))
        reach = v / alpha
        if reach > 1:
            c_lo = math.floor((1 - p.end) / T)
            c_hi = math.ceil((reach - p.start) / T)
            for c in range(max(c_lo, 0) if T > 0 else c_lo, c_hi + 1):
                add(c, i, max(p.start + c * T, Fraction(1)), min(p.end + c * T, reach))
            left = 1 - reach
            c_lo = math.floor((left - p.end) / T)
            c_hi = math.ceil(-p.start / T)
            for c in range(c_lo, c_hi + 1):
                add(c, i, max(p.start + c * T, left), min(p.end + c * T, Fraction(0)))
        if len(out) > limit:
            return None
    out.sort(key=lambda t: t[2])
    return out


# ---------------------------------------------------------------------------
# Weak-type quasinorm


@dataclass
class WeakNormResult:
    operator: str
    value: object  # Fraction for M, float for H
    alpha_star: object
    limit: str  # "attained", "left" (alpha -> alpha_star-), or "zero" (alpha -> 0+)
    abs_error: float = 0.0
    tail_limit: object = None
    contributions: list | None = field(default=None, repr=False)
    evaluations: int = 0

    def to_dict(self) -> dict:
        if self.operator == "M":
            d = {
                "value": format_rat(self.value),
                "value_float": rat_to_float(self.value),
                "alpha_star": None if self.alpha_star is None else format_rat(self.alpha_star),
                "tail_limit": format_rat(self.tail_limit),
            }
        else:
            d = {"value": self.value, "abs_error": self.abs_error, "alpha_star": self.alpha_star,
                 "tail_limit": self.tail_limit}
        d.update(operator=self.operator, limit=self.limit, strictness="strict")
        if self.contributions is not None:
            d["contributions"] = [
                {"copy": c, "piece": i, "lo": format_rat(lo) if self.operator == "M" else lo,
                 "hi": format_rat(hi) if self.operator == "M" else hi}
                for c, i, lo, hi in self.contributions
            ]
        return d


def tail_limit(w: StepWeight) -> Fraction:
    """``lim_{alpha -> 0} alpha * mu(alpha)``: twice the mean of w, for M and H alike."""
    return 2 * w.mass / w.period


def _mw_range(w: StepWeight):
    """Alpha range to search for M: below it the periodic tail argument applies."""
    period = Fraction(0)
    for v in {p.value for p in w.pieces}:
        t = w.period / v
        period = t if period == 0 else lcm_rat(period, t)
    x1 = 1 / w.min_value
    return 1 / (x1 + period), w.max_value


def weak_norm(w: StepWeight, op, max_kinks: int = 48, max_steps: int = 200_000,
              rel_tol: float = 1e-10, with_contributions: bool = True) -> WeakNormResult:
    """``sup_{alpha > 0} alpha * |{w |T chi_[0,1]| > alpha}|``.

    M: exact over the rationals. H: float, with an absolute error bound that
    covers rounding, unresolved search intervals and the truncated tail.
    """
    op = OperatorKind(op)
    prof = _profile(w, op)
    L0 = tail_limit(w)
    if op is OperatorKind.M:
        lo, hi = _mw_range(w)
        best = (L0, None, "zero")
        tail_gap = 0.0
    else:
        L0f = rat_to_float(L0)
        # phi_H(alpha) <= L0 + alpha * (2T + 1); cut where that excess is negligible
        B0 = 2 * rat_to_float(w.period) + 1
        lo = rel_tol * L0f / B0
        # mu_H(alpha) <= 4 / expm1(alpha / vmax) beyond hi
        vmax = rat_to_float(w.max_value)
        hi = 60 * vmax
        tail_gap = hi * 4 / math.expm1(60)
        best = (L0f, None, "zero")

    def consider(alpha, phi, kind):
        nonlocal best
        if phi > best[0]:
            best = (phi, alpha, kind)

    evals = 0

    def phi_at(alpha):
        nonlocal evals
        evals += 1
        m = prof.mu(alpha)
        consider(alpha, alpha * m, "attained")
        if prof.exact:
            mc = prof.mu(alpha, closed=True)
            if mc != m:
                consider(alpha, alpha * mc, "left")
            return m, mc
        return m, m

    mu_cache = {}

    def mu_pair(alpha):
        if alpha not in mu_cache:
            mu_cache[alpha] = phi_at(alpha)
        return mu_cache[alpha]

    def upper(a, b):
        # closed measure at a dominates mu on (a, b] including one-sided limits
        return b * mu_pair(a)[1]

    heap = [(-_key(upper(lo, hi)), lo, hi)]
    steps = 0
    gap = 0.0
    while heap:
        negub, a, b = heapq.heappop(heap)
        ub = -negub
        if ub <= _key(best[0]) * (1 + (0 if prof.exact else rel_tol)):
            break
        steps += 1
        if steps > max_steps:
            gap = ub - _key(best[0])
            break
        if prof.count_kinks(a, b) <= max_kinks:
            pts = [a] + prof.kinks(a, b) + [b]
            for x in pts:
                mu_pair(x)
            if not prof.exact:
                for x0, x1 in zip(pts, pts[1:]):
                    _golden(lambda t: t * prof.mu(t), x0, x1, consider)
            continue
        m = prof.split(a, b)
        mu_pair(m)
        for x0, x1 in ((a, m), (m, b)):
            u = upper(x0, x1)
            if u > _key(best[0]):
                heapq.heappush(heap, (-_key(u), x0, x1))

    value, alpha_star, kind = best
    res = WeakNormResult(op.value, value, alpha_star, kind, tail_limit=L0 if prof.exact else rat_to_float(L0),
                         evaluations=evals)
    if not prof.exact:
        err = 0.0
        if alpha_star is not None:
            err = alpha_star * prof.mu_err(alpha_star)[1]
        res.abs_error = err + max(gap, 0.0) + tail_gap + rel_tol * abs(value)
    elif with_contributions and alpha_star is not None:
        res.contributions = levelset_pieces(w, alpha_star, closed=(kind == "left"))
    return res


def _key(x):
    return float(x) if not isinstance(x, Fraction) else x


_INVPHI = (math.sqrt(5) - 1) / 2


def _golden(f, a, b, consider, rel=1e-12, max_iter=200):
    """Golden-section search for the max of f on [a, b]; reports every evaluation."""
    if b - a <= rel * b:
        return
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    consider(c, fc, "attained")
    consider(d, fd, "attained")
    for _ in range(max_iter):
        if b - a <= rel * b:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
            consider(c, fc, "attained")
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
            consider(d, fd, "attained")


def hilbert_weak_lower(w: StepWeight) -> Fraction:
    """Exact ``|{x > 1 : w(x) / x > 1}|``, a lower bound for the H quasinorm since
    ``|H chi_[0,1](x)| > 1/x`` on (1, infinity)."""
    from .weight import superlevel_vs_identity

    return superlevel_vs_identity(w)
