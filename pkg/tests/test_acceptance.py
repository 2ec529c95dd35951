"""Acceptance criteria, one test per criterion (see the summary printed by pytest)."""

import math

import numpy as np
import pytest

from aifv import samples
from aifv.analysis import (
    balanced_pair_holds,
    conversion_constant,
    conversion_gain_holds,
    f,
    internal_pair_ratio_holds,
    loop_analysis,
    simulate,
    worst_case_curves,
)
from aifv.codec import compile_code, decode, decode_array, encode, encode_array, measure_delay
from aifv.construct import brute_force_optimal, build_aifv2, build_aifvm, huffman_code, random_code
from aifv.core import SourceDistribution, entropy
from aifv.huffman import build_huffman, check_sibling_property, entropy_decomposition
from aifv.markov import average_code_length, redundancy, stationary, transition_matrix

from helpers import random_dist, worst_source

P_GRID = np.linspace(0.5, 0.999, 100)
BRUTE_P = (0.5, 0.55, 0.618, 0.7, 0.8, 0.9, 0.99)
DELTA = 1e-6
P_LIMIT = 1 - 1e-6


def _grid_source(p):
    return worst_source(float(p), delta=min(DELTA, (1 - p) / 2))


def _limit_source():
    # p_max = 1 - 1e-6 with the remaining mass split unevenly
    return worst_source(P_LIMIT, delta=1e-7)


def _low_pmax_sources(n=1000, seed=2024):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        d = random_dist(rng, int(rng.integers(3, 33)), alpha=float(rng.choice([0.3, 1.0, 5.0])))
        if d.p_max < 0.5:
            out.append(d)
    return out


@pytest.mark.criterion(1, "golden encode/decode vectors")
def test_criterion_1_golden_vectors():
    cases = [
        (samples.abcd_two_tree(), "acdbaca", "01111001001101"),
        (samples.abc_root_master(), "aabac", "1000011"),
        (samples.abcd_three_tree(), "acdccbba", "01111000111101100"),
        (samples.abc_three_tree(), "aaabac", "100000011"),
    ]
    for code, seq, bits in cases:
        out, trace = encode(code, seq)
        assert out == bits
        back, trace2 = decode(code, bits, len(seq))
        assert "".join(back) == seq and trace2 == trace


@pytest.mark.criterion(2, "average code lengths")
def test_criterion_2_average_lengths():
    src = samples.abcd_two_tree_source()
    assert abs(average_code_length(samples.abcd_two_tree(), src) - 1.74) <= 1e-12
    L = average_code_length(samples.abcd_three_tree(), samples.abcd_three_tree_source())
    assert abs(L - 168.15 / 111) <= 1e-12
    L = average_code_length(samples.abc_three_tree(), samples.abc_skewed_source())
    assert abs(L - 0.394) <= 5e-4
    assert abs(average_code_length(huffman_code(src), src) - 1.8) <= 1e-12


@pytest.mark.criterion(3, "stationary closed forms")
def test_criterion_3_stationary():
    p = stationary(transition_matrix(samples.abcd_three_tree(), samples.abcd_three_tree_source()))
    assert np.abs(p - np.array([100, 10, 1]) / 111).max() <= 1e-12
    p = stationary(transition_matrix(samples.abc_three_tree(), samples.abc_skewed_source()))
    assert np.abs(p - np.array([2500, 2401, 2450]) / 7351).max() <= 1e-12
    for x in P_GRID:
        d = _grid_source(x)
        q = d.p_max
        p3 = stationary(transition_matrix(build_aifvm(d, 3), d))
        assert np.abs(p3 - np.array([1, q**2, q]) / (1 + q + q**2)).max() <= 1e-12
        s4 = 1 + q + q**2 + q**3
        p4 = stationary(transition_matrix(build_aifvm(d, 4), d))
        assert np.abs(p4 - np.array([1, q**3, q**2, q]) / s4).max() <= 1e-12
        for m in range(5, 9):
            S = sum(q**k for k in range(m))
            expect = np.array([1.0] + [q ** (m - i) for i in range(1, m)]) / S
            pm = stationary(transition_matrix(build_aifvm(d, m), d))
            assert np.abs(pm - expect).max() <= 1e-12


@pytest.mark.criterion(4, "brute-force optimum meets f(p) at worst-case sources")
def test_criterion_4_tightness():
    for p in BRUTE_P:
        d = worst_source(p, delta=DELTA)
        code, L = brute_force_optimal(d, 2)
        assert abs((L - entropy(d)) - f(p)) <= 1e-3, p


@pytest.mark.criterion(5, "bound dominance")
def test_criterion_5_dominance():
    g = worst_case_curves()
    assert np.all(g.f < g.gallager)
    assert np.all(g.min_f_f3 < 1 / 3)
    # f(1/2) = 1/4 exactly, so the strict form holds only away from the left endpoint
    assert np.all(g.min_f_f4[g.p_max > 0.5] < 0.25)
    assert np.all(g.min_f_f4 <= 0.25 + 1e-9)
    for d in _low_pmax_sources():
        assert redundancy(build_aifv2(d), d) <= 0.25


@pytest.mark.criterion(6, "worst-case limits 1/m")
def test_criterion_6_limits():
    d = _limit_source()
    for m in range(2, 9):
        code = build_aifvm(d, m)
        assert abs(redundancy(code, d) - 1 / m) <= 1e-4
        rep = loop_analysis(code, d, 1 - d.p_max)
        assert rep.ok and abs(rep.lower_bound - 1 / m) <= 1e-4


@pytest.mark.criterion(7, "property suites")
def test_criterion_7_properties():
    rng = np.random.default_rng(77)
    pairs = 0
    while pairs < 10_000:
        m = int(rng.integers(1, 5))
        K = int(rng.integers(2, 17))
        code = random_code(K, m, rng)
        cc = compile_code(code)
        for _ in range(4):
            syms = rng.integers(0, K, size=int(rng.integers(0, 120))).astype(np.int32)
            bits, trace = encode_array(cc, syms)
            back, trace2, delay = decode_array(cc, bits, syms.size)
            assert np.array_equal(back, syms) and np.array_equal(trace, trace2)
            assert delay.size == 0 or delay.max() <= m
            pairs += 1
    for m in (2, 3, 4):
        assert measure_delay(build_aifvm(worst_source(0.9), m), "ab") == m
    for _ in range(1000):
        d = random_dist(rng, int(rng.integers(2, 40)), alpha=float(rng.choice([0.1, 1.0, 10.0])))
        h = build_huffman(d)
        assert check_sibling_property(h)
        assert internal_pair_ratio_holds(h)
        assert abs(entropy_decomposition(h) - entropy(d)) <= 1e-10
        w1 = float(rng.uniform(1e-6, 1))
        w2 = w1 * float(rng.uniform(1e-9, 0.5 - 1e-9))
        assert conversion_gain_holds(w1, w2, float(rng.uniform(0, 0.5)))
        b = float(rng.uniform(1e-6, 1))
        assert balanced_pair_holds(b * float(rng.uniform(1, 2)), b)
    c = conversion_constant()
    assert f"{c:.4f}" == "0.7549" and c > 0.5


def _criterion_codes():
    """(name, code, dist) for the codes built in criteria 3-6, one per distinct construction."""
    out = [
        ("three-tree sample", samples.abcd_three_tree(), samples.abcd_three_tree_source()),
        ("skewed sample", samples.abc_three_tree(), samples.abc_skewed_source()),
    ]
    mid = _grid_source(P_GRID[50])
    for m in range(3, 9):
        out.append((f"chain m={m} p={mid.p_max:.4f}", build_aifvm(mid, m), mid))
    for p in BRUTE_P:
        d = worst_source(p, delta=DELTA)
        out.append((f"brute force p={p}", brute_force_optimal(d, 2)[0], d))
    for i, d in enumerate(_low_pmax_sources()[:5]):
        out.append((f"low p_max #{i}", build_aifv2(d), d))
    lim = _limit_source()
    for m in range(2, 9):
        out.append((f"limit chain m={m}", build_aifvm(lim, m), lim))
    return out


@pytest.mark.criterion(8, "Monte-Carlo consistency at 3 standard errors")
def test_criterion_8_monte_carlo():
    failures = []
    for seed, (name, code, d) in enumerate(_criterion_codes()):
        res = simulate(code, d, n=1_000_000, seed=1000 + seed)
        L = average_code_length(code, d)
        if not res.within(L, 3.0):
            z = (res.bits_per_symbol - L) / res.bits_se
            failures.append((name, res.bits_per_symbol, L, z))
    assert not failures, failures
