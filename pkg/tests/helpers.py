"""Shared generators and independent oracles for the test suite."""

import itertools
from fractions import Fraction
from functools import lru_cache

import numpy as np

from aifv.core import SourceDistribution


def random_dist(rng, K, alpha=1.0):
    w = np.maximum(rng.dirichlet(np.full(K, alpha)), 1e-6)
    return SourceDistribution.from_probs(w, normalize=True)


def worst_source(p, delta=1e-6, symbols="abc"):
    return SourceDistribution(tuple(symbols), (p, 1.0 - p - delta, delta))


def optimal_prefix_length(probs):
    """Minimum expected depth over all full binary trees (Kraft equality), by enumeration."""
    K = len(probs)
    best = None
    ps = sorted(probs, reverse=True)
    # optimal depths are non-decreasing in probability rank
    for depths in itertools.combinations_with_replacement(range(1, K), K):
        if sum(Fraction(1, 2**d) for d in depths) != 1:
            continue
        L = sum(p * d for p, d in zip(ps, depths))
        best = L if best is None or L < best else best
    return best


def cesaro_from_zero(R, n=20000):
    """Long-run occupation from state 0 by averaging matrix powers."""
    m = R.shape[0]
    v = np.zeros(m)
    v[0] = 1.0
    acc = np.zeros(m)
    for _ in range(n):
        acc += v
        v = v @ R
    return acc / n


def exact_stationary(rows):
    """Stationary vector of an irreducible chain in exact rational arithmetic."""
    m = len(rows)
    A = [[Fraction(rows[j][i]) - (1 if i == j else 0) for j in range(m)] for i in range(m)]
    A[-1] = [Fraction(1)] * m
    b = [Fraction(0)] * (m - 1) + [Fraction(1)]
    # Gauss-Jordan
    for c in range(m):
        piv = next(r for r in range(c, m) if A[r][c] != 0)
        A[c], A[piv] = A[piv], A[c]
        b[c], b[piv] = b[piv], b[c]
        for r in range(m):
            if r != c and A[r][c] != 0:
                f = A[r][c] / A[c][c]
                A[r] = [x - f * y for x, y in zip(A[r], A[c])]
                b[r] -= f * b[c]
    return [b[i] / A[i][i] for i in range(m)]


@lru_cache(maxsize=None)
def skeletons(slots, depth, m, no_slave0=False):
    """Every node-kind skeleton with ``slots`` symbol positions and height <= depth."""
    out = []
    if slots == 1:
        out.append(("L",))
    if depth >= 1:
        out += [("S1", x) for x in skeletons(slots, depth - 1, m)]
        if not no_slave0:
            out += [("S0", x) for x in skeletons(slots, depth - 1, m)]
    if slots >= 2:
        for k in range(1, m):
            if depth >= k + 1:
                out += [("M", k, x) for x in skeletons(slots - 1, depth - k - 1, m, True)]
        if depth >= 1:
            for a in range(1, slots):
                for x in skeletons(a, depth - 1, m):
                    for y in skeletons(slots - a, depth - 1, m):
                        out.append(("C", x, y))
    return tuple(out)


def instantiate(skel, symbols):
    """Build a Node tree from a skeleton, filling symbol slots in preorder."""
    from aifv.tree import complete, leaf, master, slave0, slave1

    it = iter(symbols)

    def go(s):
        tag = s[0]
        if tag == "L":
            return leaf(next(it))
        if tag == "S1":
            return slave1(go(s[1]))
        if tag == "S0":
            return slave0(go(s[1]))
        if tag == "M":
            sym = next(it)
            return master(sym, s[1], go(s[2]))
        x = go(s[1])
        return complete(x, go(s[2]))

    return go(skel)
