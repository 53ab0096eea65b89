from fractions import Fraction

import pytest

from conftest import random_dyadic
from mwsharp.weight import (StepWeight, block_mass, block_mass_closed_form, build_weight, constant_weight, essinf,
                            expected_piece_count, integral, superlevel_vs_identity, value_at)


def _table(w, lo, hi):
    return [(p.start, p.end, p.value) for p in w.pieces if lo <= p.start and p.end <= hi]


def scan_superlevel(w):
    """Independent oracle: split (1, max w) at every piece boundary and every
    piece value, and test the condition at each cell's midpoint."""
    top = w.max_value
    cuts = {Fraction(1), top}
    copy = 0
    while copy * w.period < top:
        for p in w.pieces:
            for x in (p.start + copy * w.period, p.end + copy * w.period):
                if 1 < x < top:
                    cuts.add(x)
        copy += 1
    cuts |= {p.value for p in w.pieces if 1 < p.value < top}
    cuts = sorted(cuts)
    total = Fraction(0)
    for a, b in zip(cuts, cuts[1:]):
        mid = (a + b) / 2
        if value_at(w, mid) > mid:
            total += b - a
    return total


def test_block_j4_matches_figure(weights):
    F = Fraction
    got = _table(weights(4), 16, 32)
    expected = [
        (16, 20, 32),
        (F(20), F(83, 4), 16), (F(83, 4), F(43, 2), 8), (F(43, 2), 23, 4), (23, 26, 2),
        (26, 29, 2), (29, F(61, 2), 4), (F(61, 2), F(125, 4), 8), (F(125, 4), 32, 16),
    ]
    assert got == [(F(a), F(b), F(v)) for a, b, v in expected]


def test_n2_first_half_pieces(weights):
    # lengths |(L_2^-)^j| = (2^k - k) / 2^{j+1} for j < k, and (2^k - k) / 2^k for j = k
    k = 2
    l1 = Fraction(2**k - k, 2**2)
    l2 = Fraction(2**k - k, 2**k)
    assert l1 == l2 == Fraction(1, 2)
    F = Fraction
    expected = [(0, 4, 1), (4, 6, 8), (6, F(13, 2), 4), (F(13, 2), 7, 2), (7, F(15, 2), 2), (F(15, 2), 8, 4)]
    assert _table(weights(2), 0, 8) == [(F(a), F(b), F(v)) for a, b, v in expected]


def test_value_at_examples(weights):
    assert value_at(weights(4), Fraction(33, 2)) == 32
    assert value_at(weights(2), Fraction(25, 4)) == 4
    assert value_at(weights(2), Fraction(81, 4)) == value_at(weights(2), Fraction(17, 4)) == 8


def test_mirror_point_value(weights):
    for N in (2, 3, 5, 8):
        assert value_at(weights(N), 2 ** (N + 1)) == 2**N


def test_integral_examples(weights):
    w = weights(2)
    assert integral(w, 0, 8) == 26 == 4 + block_mass_closed_form(2)
    assert integral(w, 0, 16) == 52
    for N in range(2, 12):
        assert integral(weights(N), 0, 1) == 1
    with pytest.raises(ValueError):
        integral(w, 3, 2)


def test_integral_additive(weights, rng):
    w = weights(5)
    for _ in range(200):
        a, b, c = sorted(random_dyadic(rng, -300, 300) for _ in range(3))
        assert integral(w, a, c) == integral(w, a, b) + integral(w, b, c)


def test_essinf_examples(weights):
    w = weights(2)
    assert essinf(w, 5, Fraction(25, 4)) == 4
    assert essinf(w, 0, 16) == 1
    assert essinf(w, 4, 6) == 8
    assert essinf(w, 6, 8) == 2  # touching [4, 6) at an endpoint does not count
    with pytest.raises(ValueError):
        essinf(w, 2, 2)


def test_essinf_brute_force(weights, rng):
    w = weights(4)
    for _ in range(200):
        a, b = sorted(random_dyadic(rng, -200, 200) for _ in range(2))
        cells = [a] + sorted(x for c in range(-5, 6) for x in [p.start + c * w.period for p in w.pieces]
                             if a < x < b) + [b]
        assert essinf(w, a, b) == min(value_at(w, (x + y) / 2) for x, y in zip(cells, cells[1:]))


@pytest.mark.parametrize("N, expected", [(2, 2), (4, 9), (21, 230)])
def test_superlevel_examples(weights, N, expected):
    w = weights(N)
    assert superlevel_vs_identity(w) == expected == Fraction(N * (N + 1), 2) - 1
    assert scan_superlevel(w) == expected


@pytest.mark.parametrize("k, expected", [(2, 22), (3, 68), (4, 188)])
def test_block_mass_examples(weights, k, expected):
    assert block_mass(weights(6), k) == expected


def test_block_mass_detects_corruption(weights):
    w = weights(4)
    pieces = list(w.pieces)
    i = next(i for i, p in enumerate(pieces) if p.start == 16)
    from mwsharp.weight import Piece

    pieces[i] = Piece(pieces[i].start, pieces[i].end, Fraction(31))
    bad = StepWeight(tuple(pieces), w.period, w.label, w.n)
    with pytest.raises(AssertionError):
        block_mass(bad, 4)
    with pytest.raises(ValueError):
        block_mass(w, 5)


def test_build_rejects_small_n():
    for N in (1, 0, -3):
        with pytest.raises(ValueError):
            build_weight(N)


@pytest.mark.parametrize("N", [2, 3, 7, 12])
def test_structure_invariants(weights, N):
    w = weights(N)
    assert w.pieces[0].start == 0 and w.pieces[-1].end == w.period == 2 ** (N + 2)
    assert all(a.end == b.start for a, b in zip(w.pieces, w.pieces[1:]))
    assert sum(p.length for p in w.pieces) == w.period
    assert len(w.pieces) == expected_piece_count(N)
    assert {p.value for p in w.pieces} <= {Fraction(2**j) for j in range(N + 2)}
    assert integral(w, 0, w.period) == 2 * (4 + sum(block_mass(w, k) for k in range(2, N + 1)))
    assert essinf(w, 0, 2 ** (N + 1)) == 1


def test_mirror_symmetry(weights, rng):
    w = weights(6)
    bps = set(w.breakpoints())
    checked = 0
    while checked < 1000:
        x = random_dyadic(rng, 0, w.period, bits=30)
        if x in bps or x == 0:
            continue
        assert value_at(w, x) == value_at(w, w.period - x)
        checked += 1


def test_average_over_half_period_tracks_n(weights):
    # avg over [0, 2^{N+1}] / N stays in [2.69, 2.94] for N = 8..32
    for N in range(8, 33):
        ratio = integral(weights(N), 0, 2 ** (N + 1)) / 2 ** (N + 1) / N
        assert Fraction(269, 100) <= ratio <= Fraction(294, 100)


def test_json_roundtrip(weights, tmp_path):
    w = weights(3)
    d = w.to_dict()
    assert d["period"] == "32/2^0"
    assert d["pieces"][2] == {"start": "6/2^0", "end": "13/2^1", "value": "4"}
    path = tmp_path / "w.json"
    w.dump(path)
    back = StepWeight.load(path)
    assert back == w and back.n == 3


def test_constant_weight_queries():
    w = constant_weight(3, 5)
    assert integral(w, -7, 11) == 54
    assert essinf(w, -1, 100) == 3
    assert value_at(w, Fraction(-17, 3)) == 3
