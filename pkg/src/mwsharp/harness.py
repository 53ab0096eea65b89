"""N-sweeps, exponent fits and the verification report for the extremal weights."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .a1solver import a1_bruteforce, a1_exact, jump_audit
from .exactnum import format_rat, rat_to_float
from .operators import hilbert_weak_lower, weak_norm
from .weight import (block_mass, block_mass_closed_form, build_weight, expected_piece_count, integral,
                     superlevel_vs_identity)

CSV_COLUMNS = ["N", "pieces", "a1", "a1_float", "lambda_M", "lambda_M_float", "lambda_H", "lambda_H_err",
               "h_lower", "superlevel", "ratio_M", "ratio_H", "ms_build", "ms_a1", "ms_wn"]

ASYMPTOTIC_N = 20  # the extremal properties are stated for N > 20


class ResourceLimit(RuntimeError):
    """Raised when a sweep exceeds its time budget; carries the finished records."""

    def __init__(self, records, at_n):
        super().__init__(f"time budget exhausted before N={at_n}")
        self.records = records
        self.at_n = at_n


@dataclass
class SweepRecord:
    N: int
    piece_count: int
    a1: Fraction
    superlevel: Fraction
    h_lower: Fraction
    lambda_M: Fraction | None = None
    lambda_H: float | None = None
    lambda_H_err: float | None = None
    timings: dict = field(default_factory=dict)

    @property
    def a1_float(self) -> float:
        return rat_to_float(self.a1)

    @property
    def lambda_M_float(self) -> float | None:
        return None if self.lambda_M is None else rat_to_float(self.lambda_M)

    @property
    def ratio_quadratic_M(self) -> float | None:
        return None if self.lambda_M is None else rat_to_float(self.lambda_M / self.a1**2)

    @property
    def ratio_quadratic_H(self) -> float | None:
        return None if self.lambda_H is None else self.lambda_H / self.a1_float**2

    @property
    def asymptotic(self) -> bool:
        return self.N > ASYMPTOTIC_N

    def row(self, timings: bool = True) -> dict:
        def fl(x):
            return "" if x is None else repr(float(x))

        t = self.timings if timings else {}
        return {
            "N": self.N,
            "pieces": self.piece_count,
            "a1": format_rat(self.a1),
            "a1_float": fl(self.a1_float),
            "lambda_M": "" if self.lambda_M is None else format_rat(self.lambda_M),
            "lambda_M_float": fl(self.lambda_M_float),
            "lambda_H": fl(self.lambda_H),
            "lambda_H_err": fl(self.lambda_H_err),
            "h_lower": format_rat(self.h_lower),
            "superlevel": format_rat(self.superlevel),
            "ratio_M": fl(self.ratio_quadratic_M),
            "ratio_H": fl(self.ratio_quadratic_H),
            "ms_build": fl(t.get("build")),
            "ms_a1": fl(t.get("a1")),
            "ms_wn": fl(t.get("wn")),
        }

    def to_dict(self, timings: bool = True) -> dict:
        d = self.row(timings)
        d["asymptotic"] = self.asymptotic
        return d


def _ms(t0):
    return round((time.perf_counter() - t0) * 1000, 3)


def sweep_one(N: int, operators=("M", "H")) -> SweepRecord:
    t0 = time.perf_counter()
    w = build_weight(N)
    tb = _ms(t0)
    t0 = time.perf_counter()
    a1 = a1_exact(w).value
    ta = _ms(t0)
    t0 = time.perf_counter()
    rec = SweepRecord(N, len(w.pieces), a1, superlevel_vs_identity(w), hilbert_weak_lower(w))
    if "M" in operators:
        rec.lambda_M = weak_norm(w, "M", with_contributions=False).value
    if "H" in operators:
        res = weak_norm(w, "H")
        rec.lambda_H, rec.lambda_H_err = res.value, res.abs_error
    rec.timings = {"build": tb, "a1": ta, "wn": _ms(t0)}
    return rec


def sweep(n_min: int, n_max: int, operators=("M", "H"), threads: int = 1,
          time_budget: float | None = None) -> list[SweepRecord]:
    """One record per N in ``[n_min, n_max]``, in N order.

    With a ``time_budget`` (seconds) the sweep stops early and raises
    :class:`ResourceLimit` holding the records finished so far.
    """
    if not 2 <= n_min <= n_max:
        raise ValueError(f"need 2 <= n_min <= n_max, got {n_min}, {n_max}")
    ops = tuple(sorted(set(operators)))
    if not set(ops) <= {"M", "H"}:
        raise ValueError(f"unknown operators {operators}")
    start = time.perf_counter()
    Ns = list(range(n_min, n_max + 1))
    records = []
    if threads <= 1:
        for N in Ns:
            if time_budget is not None and time.perf_counter() - start > time_budget:
                raise ResourceLimit(records, N)
            records.append(sweep_one(N, ops))
        return records
    with ProcessPoolExecutor(max_workers=threads) as pool:
        futures = {N: pool.submit(sweep_one, N, ops) for N in Ns}
        for N in Ns:
            remaining = None if time_budget is None else max(0.0, time_budget - (time.perf_counter() - start))
            try:
                records.append(futures[N].result(timeout=remaining))
            except TimeoutError:
                for f in futures.values():
                    f.cancel()
                raise ResourceLimit(records, N) from None
    return records


def records_to_csv(records, timings: bool = True, truncated_at: int | None = None) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for r in records:
        writer.writerow(r.row(timings))
    if truncated_at is not None:
        buf.write(f"# truncated: time budget exhausted before N={truncated_at}\n")
    return buf.getvalue()


def records_to_json(records, timings: bool = True, truncated_at: int | None = None) -> str:
    doc = {"records": [r.to_dict(timings) for r in records]}
    if truncated_at is not None:
        doc["truncated_at"] = truncated_at
    return json.dumps(doc, indent=1)


def records_from_rows(rows) -> list[SweepRecord]:
    """Rebuild records from CSV/JSON rows (as written by the writers above)."""
    out = []
    for d in rows:
        def opt(key, conv):
            v = d.get(key, "")
            return None if v in ("", None) else conv(v)

        out.append(SweepRecord(
            N=int(d["N"]), piece_count=int(d["pieces"]), a1=Fraction(d["a1"]),
            superlevel=Fraction(d["superlevel"]), h_lower=Fraction(d["h_lower"]),
            lambda_M=opt("lambda_M", Fraction), lambda_H=opt("lambda_H", float),
            lambda_H_err=opt("lambda_H_err", float),
        ))
    return out


def load_records(path) -> list[SweepRecord]:
    with open(path) as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        return records_from_rows(json.loads(text)["records"])
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return records_from_rows(csv.DictReader(lines))


# ---------------------------------------------------------------------------
# Fits and ratios


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    r_squared: float
    x_name: str
    y_name: str
    points: int


def _field(record, name):
    v = getattr(record, name)
    return None if v is None else float(v)


def fit_exponent(records, x_field: str = "a1", y_field: str = "lambda_M") -> FitResult:
    """Least-squares slope of ``log y`` against ``log x``."""
    pts = [(_field(r, x_field), _field(r, y_field)) for r in records]
    if len(pts) < 3:
        raise ValueError("need at least 3 records")
    if any(x is None or y is None or x <= 0 or y <= 0 for x, y in pts):
        raise ValueError("fit values must be positive")
    lx = np.log([p[0] for p in pts])
    ly = np.log([p[1] for p in pts])
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - float(np.sum(resid**2)) / ss_tot
    return FitResult(float(slope), float(intercept), r2, x_field, y_field, len(pts))


def theorem_a_ratio(records, growth_tol: float = 0.25) -> dict:
    """Per-N ratios ``lambda_T / a1^2`` and a flag for growth faster than constant.

    The flag compares the log-log slope of the ratio against ``a1`` with
    ``growth_tol``; this is a consistency check only.
    """
    table = []
    for r in records:
        table.append({"N": r.N, "ratio_M": r.ratio_quadratic_M, "ratio_H": r.ratio_quadratic_H})
    summary = {}
    for key in ("ratio_M", "ratio_H"):
        vals = [row[key] for row in table if row[key] is not None]
        if not vals:
            continue
        entry = {"min": min(vals), "max": max(vals), "spread": max(vals) / min(vals)}
        if len(vals) >= 3:
            xs = np.log([r.a1_float for r in records if getattr(r, "ratio_quadratic_" + key[-1]) is not None])
            entry["log_slope"] = float(np.polyfit(xs, np.log(vals), 1)[0])
            entry["growing"] = entry["log_slope"] > growth_tol
        summary[key] = entry
    return {"table": table, "summary": summary}


def plot_data(records, y_field: str = "lambda_M") -> str:
    """Two whitespace-separated columns ``log a1`` and ``log y``."""
    lines = [f"# log_a1 log_{y_field}"]
    for r in records:
        y = _field(r, y_field)
        if y is not None and y > 0:
            lines.append(f"{math.log(r.a1_float)!r} {math.log(y)!r}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Verification report


def verify_theorem(N: int, oracle_max_n: int = 4, oracle_samples: int = 200, seed: int = 0) -> dict:
    """Check the three properties of the construction plus its internal identities."""
    if not isinstance(N, int) or N < 2:
        raise ValueError(f"N must be an integer >= 2, got {N!r}")
    w = build_weight(N)
    items = {}
    i01 = integral(w, 0, 1)
    items["integral01"] = {"value": format_rat(i01), "pass": i01 == 1}
    pc = len(w.pieces)
    items["piece_count"] = {"value": pc, "expected": expected_piece_count(N), "pass": pc == expected_piece_count(N)}
    cert = a1_exact(w)
    a1 = {"value": format_rat(cert.value), "float": cert.value_float, "over_N": cert.value_float / N,
          "witness": cert.to_dict()["witness"], "pass": cert.value >= 1}
    if N <= oracle_max_n:
        orc = a1_bruteforce(w, oracle_samples, seed)
        a1["oracle_sliver_limit"] = format_rat(orc.sliver_limit)
        a1["oracle_max_interval"] = format_rat(orc.value)
        a1["pass"] = a1["pass"] and orc.sliver_limit == cert.value and orc.value <= cert.value
    items["a1"] = a1
    sl = superlevel_vs_identity(w)
    closed = Fraction(N * (N + 1), 2) - 1
    items["superlevel"] = {"value": format_rat(sl), "closed_form": format_rat(closed), "pass": sl == closed}
    blocks = {}
    ok = True
    for k in range(2, N + 1):
        try:
            blocks[k] = format_rat(block_mass(w, k))
        except AssertionError as exc:
            blocks[k] = str(exc)
            ok = False
    items["blocks"] = {"values": blocks, "closed_form": {k: block_mass_closed_form(k) for k in range(2, N + 1)},
                       "pass": ok}
    audit = jump_audit(w)
    T = w.period
    eights = audit["locations"].get(Fraction(8), [])
    allowed = {Fraction(1), Fraction(2), Fraction(4), Fraction(8)}
    jumps_ok = (set(audit["ratios"]) <= allowed and all(x in (4, T - 4) for x in eights)
                and audit["max_intra_L"] <= 2)
    items["jumps"] = {
        "ratios": [format_rat(r) for r in audit["ratios"]],
        "ratio8_at": [format_rat(x) for x in eights],
        "max_intra_L": format_rat(audit["max_intra_L"]),
        "jump_bound_note": ("adjacent jumps reach 4 between consecutive blocks and 8 at x = 4; "
                         "the 'at most 2' bound holds only inside each L_k"),
        "pass": jumps_ok,
    }
    report = {"N": N, "label": w.label, "asymptotic_regime": N > ASYMPTOTIC_N, "items": items}
    report["pass"] = all(v["pass"] for v in items.values())
    return report

