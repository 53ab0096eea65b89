from fractions import Fraction

import pytest

from conftest import random_dyadic
from mwsharp.a1solver import (a1_bruteforce, a1_exact, certificate_value, interval_ratio, jump_audit,
                              max_adjacent_jump)
from mwsharp.weight import constant_weight, step_weight


def test_interval_ratio_examples(weights):
    w = weights(2)
    assert interval_ratio(w, 0, 8) == Fraction(13, 4)
    assert interval_ratio(w, 4, 6) == 1
    assert interval_ratio(w, 4, Fraction(13, 2)) == Fraction(9, 5)
    with pytest.raises(ValueError):
        interval_ratio(w, 1, 1)


def test_constant_weight():
    for w in (constant_weight(), constant_weight(7, 3)):
        assert a1_exact(w).value == 1
        assert a1_bruteforce(w, 20).value == 1


def test_two_piece_needs_slivers(two_piece):
    cert = a1_exact(two_piece)
    assert cert.value == 2
    assert cert.sliver is not None and cert.sliver[0] in ("left", "right")
    assert two_piece.pieces[cert.witness_range[0] % 2].value == 2
    # the three breakpoint pairs of one period
    no_sliver = a1_bruteforce(two_piece, 0, slivers=False, periods=1)
    assert no_sliver.value == Fraction(3, 2) and no_sliver.intervals == 3
    # over three periods [1, 4) (values 2, 1, 2) does better, still short of 2
    assert a1_bruteforce(two_piece, 0, slivers=False).value == Fraction(5, 3)
    full = a1_bruteforce(two_piece, 0)
    assert full.sliver_limit == 2
    assert full.value < 2


def test_three_piece():
    w = step_weight([0, 1, 2, 3], [1, 2, 1])
    assert a1_exact(w).value == 2
    assert a1_bruteforce(w, 0).sliver_limit == 2


def test_window_too_small(two_piece):
    with pytest.raises(ValueError):
        a1_exact(two_piece, 2)


@pytest.mark.parametrize("N", [2, 3, 4])
def test_matches_bruteforce(weights, N):
    w = weights(N)
    value = a1_exact(w).value
    orc = a1_bruteforce(w, 300, seed=N)
    assert orc.sliver_limit == value
    assert orc.value <= value
    # epsilon-sliver intervals sit within O(2^-40) of the limit
    assert value - orc.value <= value * Fraction(1, 2**30)


@pytest.mark.parametrize("N", [2, 5, 9])
def test_screened_equals_plain_enumeration(weights, N):
    assert a1_exact(weights(N)).value == a1_exact(weights(N), method="exact").value


def test_dominates_random_intervals(weights, rng):
    w = weights(4)
    value = a1_exact(w).value
    for _ in range(10_000):
        a, b = sorted(random_dyadic(rng, 0, 3 * w.period, bits=24) for _ in range(2))
        if a < b:
            assert interval_ratio(w, a, b) <= value


@pytest.mark.parametrize("N", [2, 6, 13])
def test_certificate_recomputes(weights, N):
    w = weights(N)
    cert = a1_exact(w)
    assert certificate_value(w, cert) == cert.value
    d = cert.to_dict()
    assert Fraction(d["value"]) == cert.value and d["window_periods"] == 3


def test_window_stability(weights):
    for N in range(2, 9):
        assert a1_exact(weights(N), 3).value == a1_exact(weights(N), 4).value


def test_scale_invariance(weights, rng):
    w = weights(5)
    base = a1_exact(w).value
    for _ in range(4):
        c = Fraction(rng.randrange(1, 10**6), rng.randrange(1, 10**6))
        assert a1_exact(w.scaled(c)).value == base


def test_growth_in_n(weights):
    vals = [a1_exact(weights(N)).value for N in range(4, 25)]
    drops = [N for N, (a, b) in zip(range(5, 25), zip(vals, vals[1:])) if b < a]
    assert drops == []  # empirical, not a theorem


def test_max_adjacent_jump(weights):
    assert max_adjacent_jump(weights(4)) == (8, 4)
    assert max_adjacent_jump(constant_weight()) == (1, 0)


def test_jumps_inside_l_blocks(weights):
    w = weights(4)
    for k in range(2, 5):
        inside = [p for p in w.pieces if 2**k + k <= p.start and p.end <= 2 ** (k + 1)]
        for p, q in zip(inside, inside[1:]):
            assert max(p.value / q.value, q.value / p.value) <= 2


@pytest.mark.parametrize("N", [2, 5, 12])
def test_jump_audit(weights, N):
    w = weights(N)
    audit = jump_audit(w)
    assert set(audit["ratios"]) <= {1, 2, 4, 8}
    assert set(audit["locations"][8]) == {4, w.period - 4}
    assert audit["max_intra_L"] == 2
    if N >= 3:
        assert 4 in audit["ratios"]  # contradicts "at most 2" across block boundaries
