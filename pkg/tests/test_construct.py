import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aifv.analysis import chain_bound, f
from aifv.codec import decode, encode
from aifv.construct import (
    SearchSpaceError,
    best_code,
    brute_force_optimal,
    build_aifv2,
    build_aifv3,
    build_aifv4,
    build_aifvm,
    huffman_code,
    random_code,
    to_base,
)
from aifv.core import SourceDistribution, binary_entropy
from aifv.huffman import GOLDEN, build_huffman, sibling_sequence
from aifv.markov import average_code_length, redundancy, stationary, transition_matrix
from aifv.tree import average_length, classify, node_at, validate_tree, verify_zero_run

from helpers import instantiate, random_dist, skeletons, worst_source


def _dist(probs):
    return SourceDistribution.from_probs(probs, symbols="abcdefgh"[:len(probs)])


def test_to_base_example():
    d = _dist([0.8, 0.15, 0.03, 0.02])
    base = to_base(build_huffman(d))
    assert base.converted == {2}
    assert base.pair(2)[0].weight == pytest.approx(0.15) and base.pair(2)[1].weight == pytest.approx(0.05)
    # the converted pair: b becomes a degree-1 master, c/d hang below '00'
    assert node_at(base.root, "0").symbol == "a"
    node = node_at(base.root, "1")
    assert node.symbol == "b" and classify(node) == ("master", 1)
    assert {node_at(node, "000").symbol, node_at(node, "001").symbol} == {"c", "d"}


def test_to_base_no_conversion():
    d = _dist([0.25, 0.25, 0.25, 0.25])
    base = to_base(build_huffman(d))
    assert base.converted == frozenset()
    h = huffman_code(d)
    assert average_code_length(h, d) == pytest.approx(2.0)


@settings(max_examples=200)
@given(st.integers(0, 2**32 - 1), st.integers(2, 24))
def test_to_base_length_change(seed, K):
    # each conversion changes the average length by q_{2k} - q_{2k-1}
    rng = np.random.default_rng(seed)
    d = random_dist(rng, K, alpha=0.3)
    h = build_huffman(d)
    base = to_base(h)
    q = base.q
    delta = sum(q[2 * k - 1] - q[2 * k - 2] for k in base.converted)
    assert validate_tree(base.root, 0, 2, d.symbols) == []
    assert average_length(base.root, d) == pytest.approx(h.expected_length() + delta, abs=1e-12)
    for k in base.converted:
        odd, even = base.pair(k)
        assert odd.is_leaf and 2 * even.weight < odd.weight


@pytest.mark.parametrize("p", [0.55, 0.8])
def test_aifv2_near_bound(p):
    d = worst_source(p, delta=1e-3)
    code = build_aifv2(d)
    assert code.m == 2
    assert redundancy(code, d) <= f(p) + 1e-2


@settings(max_examples=200)
@given(st.integers(0, 2**32 - 1), st.integers(2, 24))
def test_aifv2_tree_lengths(seed, K):
    rng = np.random.default_rng(seed)
    d = random_dist(rng, K, alpha=0.4)
    code = build_aifv2(d)
    base = to_base(build_huffman(d))
    q = base.q
    Lb = average_length(base.root, d)
    L0, L1 = code.tree_lengths(d)
    assert L1 == pytest.approx(Lb + q[1], abs=1e-12)
    if d.p_max > GOLDEN:
        assert L0 == pytest.approx(Lb - q[0] + q[1], abs=1e-12)
    else:
        assert L0 == pytest.approx(Lb, abs=1e-12)
        # stationary mass of T_1 is the weight of the converted masters
        p = stationary(transition_matrix(code, d))
        assert p[1] == pytest.approx(sum(q[2 * k - 2] for k in base.converted), abs=1e-12)


def test_two_tree_bound_on_q1_window(rng):
    seen = 0
    while seen < 1000:
        d = random_dist(rng, int(rng.integers(3, 12)), alpha=0.5)
        q1 = sibling_sequence(build_huffman(d))[0].weight
        if not 0.5 <= q1 <= 2 / 3:
            continue
        seen += 1
        bound = q1 * q1 - 2 * q1 + 2 - float(binary_entropy(q1))
        assert redundancy(build_aifv2(d), d) <= bound + 1e-12


def test_low_pmax_quarter_bound(rng):
    seen = 0
    while seen < 1000:
        K = int(rng.integers(3, 33))
        d = random_dist(rng, K, alpha=float(rng.choice([0.2, 1.0, 5.0])))
        if d.p_max >= 0.5:
            continue
        seen += 1
        assert redundancy(build_aifv2(d), d) <= 0.25 + 1e-12


P_GRID = np.linspace(0.5, 0.999, 100)


@pytest.mark.parametrize("m", [3, 4, 5, 7])
def test_chain_stationary_closed_forms(m):
    for p in P_GRID:
        d = worst_source(float(p), delta=1e-4)
        code = build_aifvm(d, m)
        R = transition_matrix(code, d)
        pi = stationary(R)
        pmax = d.p_max
        S = sum(pmax**k for k in range(m))
        expect = [1 / S] + [pmax ** (m - i) / S for i in range(1, m)]
        assert np.allclose(pi, expect, atol=1e-12)
        if m == 3:
            assert np.allclose(R, [[1 - pmax, 0, pmax], [1, 0, 0], [1 - pmax, pmax, 0]], atol=1e-12)
            assert np.allclose(pi, np.array([1, pmax**2, pmax]) / (1 + pmax + pmax**2), atol=1e-12)


@settings(max_examples=150)
@given(st.integers(0, 2**32 - 1), st.integers(2, 16), st.integers(2, 6))
def test_chain_tree_deltas(seed, K, m):
    rng = np.random.default_rng(seed)
    w = rng.dirichlet(np.ones(K - 1)) * float(rng.uniform(0.0, 0.5))
    d = SourceDistribution.from_probs(np.maximum(np.concatenate([[1.0 - w.sum()], w]), 1e-6), normalize=True)
    code = build_aifvm(d, m)
    seq = sibling_sequence(build_huffman(d))
    q1, q2 = seq[0].weight, seq[1].weight
    LH = build_huffman(d).expected_length()
    L = code.tree_lengths(d)
    want = [LH + (m - 1) * q2 - q1, LH + q2] + [LH + i * q2 - q1 for i in range(2, m)]
    assert np.allclose(L, want, atol=1e-12)


def test_aifv3_aifv4_under_bounds():
    for p in np.linspace(0.5, 0.999, 60):
        d = worst_source(float(p))
        assert redundancy(build_aifv3(d), d) <= chain_bound(float(p), 3) + 1e-9
        assert redundancy(build_aifv4(d), d) <= chain_bound(float(p), 4) + 1e-9
    assert build_aifv3(worst_source(0.7)).m == 3 and build_aifv4(worst_source(0.7)).m == 4


def test_chain_fallback_below_half():
    d = _dist([0.4, 0.35, 0.25])
    code = build_aifvm(d, 4)
    assert code.m == 4
    assert average_code_length(code, d) == pytest.approx(average_code_length(build_aifv2(d), d))
    assert build_aifvm(d, 1).m == 1
    with pytest.raises(ValueError):
        build_aifvm(d, 0)
    with pytest.raises(ValueError):
        build_aifv2(d, 1)


def _check(code, d, rng):
    assert code.violations() == []
    assert verify_zero_run(code)
    seq = list(rng.choice(code.alphabet, size=200, p=np.asarray(d.probs)))
    bits, trace = encode(code, seq)
    assert decode(code, bits, len(seq)) == (seq, trace)


@settings(max_examples=80)
@given(st.integers(0, 2**32 - 1), st.integers(2, 32), st.integers(1, 6))
def test_constructions_valid(seed, K, m):
    rng = np.random.default_rng(seed)
    d = random_dist(rng, K, alpha=float(rng.choice([0.1, 1.0])))
    codes = [huffman_code(d), build_aifvm(d, m), best_code(d, m)]
    if m >= 2:
        codes.append(build_aifv2(d, m))
    for code in codes:
        _check(code, d, rng)
    assert best_code(d, m).m <= m
    L = average_code_length(best_code(d, m), d)
    assert all(L <= average_code_length(c, d) + 1e-12 for c in codes if c.m <= m)


@settings(max_examples=200)
@given(st.integers(0, 2**32 - 1), st.integers(1, 16), st.integers(1, 6))
def test_random_code_valid(seed, K, m):
    rng = np.random.default_rng(seed)
    code = random_code(max(K, 2), m, rng)
    assert code.m == m and code.violations() == []
    assert verify_zero_run(code)


def test_random_code_covers_node_kinds(rng):
    kinds = set()
    from aifv.tree import walk

    for _ in range(50):
        code = random_code(6, 3, rng)
        for t in code.trees:
            for path, n in walk(t):
                kind, deg = classify(n)
                kinds.add((kind, deg if kind == "master" else None))
    assert {("master", 0), ("master", 1), ("master", 2), ("complete", None),
            ("slave0", None), ("slave1", None)} <= kinds


def _lazy_limit(R):
    # Cesaro limit from T_0 via powers of the aperiodic lazy chain (no linear solve)
    m = R.shape[-1]
    return np.linalg.matrix_power(0.5 * (R + np.eye(m)), 2**14)[..., 0, :]


def _naive_optimum(d, m, depth):
    """Minimum average length over every labelled valid tree tuple of height <= depth."""
    K = len(d)
    probs = np.asarray(d.probs)
    per_tree = [[] for _ in range(m)]
    for skel in skeletons(K, depth, m):
        for perm in itertools.permutations(range(K)):
            t = instantiate(skel, perm)
            table = None
            for i in range(m):
                if validate_tree(t, i, m, range(K)) == []:
                    if table is None:
                        from aifv.tree import codeword_table

                        table = codeword_table(t)
                        L = float(sum(probs[s] * len(cw) for s, (cw, _) in table.items()))
                        row = np.zeros(m)
                        for s, (_, k) in table.items():
                            row[k] += probs[s]
                    per_tree[i].append((L, row))
    Ls = [np.array([x[0] for x in t]) for t in per_tree]
    rows = [np.array([x[1] for x in t]) for t in per_tree]
    best = np.inf
    # T_0 indexed in chunks to keep memory small
    for i0 in range(len(Ls[0])):
        grids = np.meshgrid(*[np.arange(len(x)) for x in Ls[1:]], indexing="ij")
        idx = [g.ravel() for g in grids]
        n = idx[0].size
        R = np.empty((n, m, m))
        R[:, 0, :] = rows[0][i0]
        for j in range(1, m):
            R[:, j, :] = rows[j][idx[j - 1]]
        P = _lazy_limit(R)
        tot = P[:, 0] * Ls[0][i0] + sum(P[:, j] * Ls[j][idx[j - 1]] for j in range(1, m))
        best = min(best, float(tot.min()))
    return best


@pytest.mark.parametrize("probs,m,depth", [
    ((0.6, 0.4), 2, 4),
    ((0.45, 0.35, 0.2), 2, 3),
    ((0.8, 0.15, 0.05), 2, 3),
    ((0.7, 0.3), 3, 3),
    ((0.95, 0.04, 0.01), 2, 3),
    ((0.9, 0.1), 2, 4),
])
def test_brute_force_matches_naive(probs, m, depth):
    d = _dist(probs)
    _, L = brute_force_optimal(d, m, max_depth=depth)
    assert L == pytest.approx(_naive_optimum(d, m, depth), abs=1e-9)


def test_brute_force_uniform_pair():
    code, L = brute_force_optimal(_dist([0.5, 0.5]), 2)
    assert L == pytest.approx(1.0, abs=1e-12)
    assert code.violations() == []


def test_brute_force_beats_heuristics(rng):
    for _ in range(25):
        K = int(rng.integers(2, 5))
        m = int(rng.integers(1, 4))
        d = random_dist(rng, K, alpha=0.5)
        code, L = brute_force_optimal(d, m)
        assert code.violations() == [] and verify_zero_run(code)
        assert L == pytest.approx(average_code_length(code, d), abs=1e-12)
        heur = [huffman_code(d), build_aifvm(d, m)] + ([build_aifv2(d)] if m >= 2 else [])
        for h in heur:
            if h.m <= m:
                assert L <= average_code_length(h, d) + 1e-12


def test_brute_force_deterministic():
    d = _dist([0.4, 0.3, 0.3])
    a = brute_force_optimal(d, 2)
    b = brute_force_optimal(d, 2)
    assert a[1] == b[1]
    from aifv.tree import serialize_tree

    assert [serialize_tree(t, d.symbols) for t in a[0].trees] == [serialize_tree(t, d.symbols) for t in b[0].trees]


def test_brute_force_guard():
    with pytest.raises(SearchSpaceError):
        brute_force_optimal(_dist([0.2] * 5), 2)
    with pytest.raises(SearchSpaceError):
        brute_force_optimal(_dist([0.5, 0.5]), 4)
    with pytest.raises(SearchSpaceError):
        brute_force_optimal(_dist([0.5, 0.5]), 2, max_depth=5)
    with pytest.raises(SearchSpaceError):
        brute_force_optimal(_dist([0.5, 0.3, 0.2]), 2, max_depth=1)
