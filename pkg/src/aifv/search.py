"""Exhaustive optimal-code search for small alphabets.

Every valid tree tuple with depth <= max_depth is covered, but not one by one.
A tree's average length is additive over its nodes and its row of the
transition matrix depends only on each symbol's master degree. So for each
tree index and each degree signature it suffices to know the shortest valid
tree realizing it. That minimum is found by dynamic programming over
(symbol subset, depth budget, position on the 0-path), which walks exactly the
node grammar the validator accepts. The per-tree winners are then combined
through the stationary solve.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np

from .core import SourceDistribution
from .markov import stationary
from .tree import AifvCode, complete, leaf, master, serialize_tree, slave0, slave1

MAX_K = 4
MAX_M = 3
TIE_TOL = 1e-12


class SearchSpaceError(ValueError):
    pass


def _tree_search(probs: tuple, index: int, m: int, depth: int):
    """{signature: (length, node)} of shortest valid trees for one tree index."""
    K = len(probs)
    full = (1 << K) - 1
    weight = [math.fsum(probs[s] for s in range(K) if mask >> s & 1) for mask in range(full + 1)]

    def best(sig):
        @lru_cache(maxsize=None)
        def go(mask, d, spine, no_slave0):
            # spine: depth on the all-zero path from the root, or -1 when off it
            cands = []
            w = weight[mask]
            if spine == index and index >= 1:
                sub = go(mask, d - 1, -1, False) if d >= 1 else None
                if sub is not None:
                    cands.append((w + sub[0], lambda s=sub: slave1(s[1]())))
                return _pick(cands)
            on_spine = spine >= 0 and index >= 1
            nsyms = bin(mask).count("1")
            if nsyms == 1 and not on_spine:
                s = mask.bit_length() - 1
                if sig[s] == 0:
                    cands.append((0.0, lambda s=s: leaf(s)))
            if d >= 1:
                nxt = spine + 1 if on_spine else -1
                if not on_spine:
                    sub = go(mask, d - 1, -1, False)
                    if sub is not None:
                        cands.append((w + sub[0], lambda s=sub: slave1(s[1]())))
                t1_root = spine == 0 and index == 1
                if not no_slave0 and not t1_root:
                    sub = go(mask, d - 1, nxt, False)
                    if sub is not None:
                        cands.append((w + sub[0], lambda s=sub: slave0(s[1]())))
                if nsyms >= 2:
                    parts = [b for b in range(1, mask) if b & mask == b]
                    for a in parts:
                        b = mask ^ a
                        x = go(a, d - 1, nxt, False)
                        y = go(b, d - 1, -1, False)
                        if x is not None and y is not None:
                            cands.append((w + x[0] + y[0],
                                          lambda x=x, y=y: complete(x[1](), y[1]())))
                    if not t1_root:
                        for s in range(K):
                            k = sig[s]
                            if not (mask >> s & 1) or k == 0 or d < k + 1:
                                continue
                            if on_spine and spine + k >= index:
                                continue
                            rest = mask & ~(1 << s)
                            sub = go(rest, d - k - 1, spine + k + 1 if on_spine else -1, True)
                            if sub is not None:
                                cands.append(((k + 1) * weight[rest] + sub[0],
                                              lambda s=s, k=k, sub=sub: master(s, k, sub[1]())))
            return _pick(cands)

        return go(full, depth, 0 if index >= 1 else -1, False)

    out = {}
    for sig in itertools.product(range(m), repeat=K):
        r = best(sig)
        if r is not None:
            out[sig] = (r[0], r[1]())
    return out


def _pick(cands):
    if not cands:
        return None
    lo = min(c[0] for c in cands)
    # first candidate within tolerance keeps enumeration order as the tie-break
    for c in cands:
        if c[0] <= lo + TIE_TOL:
            return c


def _single_class(R: np.ndarray) -> np.ndarray:
    """Batched test that a chain has exactly one recurrent class."""
    n, m, _ = R.shape
    reach = (R > 0) | np.eye(m, dtype=bool)
    for _ in range(m):
        reach = (reach[:, :, :, None] & reach[:, None, :, :]).any(axis=2) | reach
    comm = reach & reach.transpose(0, 2, 1)
    rec = (reach <= comm).all(axis=2)  # i recurrent iff all it reaches reaches back
    pair_ok = ~(rec[:, :, None] & rec[:, None, :]) | comm
    return pair_ok.all(axis=(1, 2))


def _batched_stationary(R: np.ndarray) -> np.ndarray:
    n, m, _ = R.shape
    A = R.transpose(0, 2, 1) - np.eye(m)
    A[:, -1, :] = 1.0
    b = np.zeros((n, m, 1))
    b[:, -1, 0] = 1.0
    return np.linalg.solve(A, b)[:, :, 0]


def brute_force_optimal(dist: SourceDistribution, m: int, max_depth: int | None = None):
    """Optimal AIFV-m code among trees of depth <= max_depth: (code, average length).

    Ties in average length (within 1e-12) go to the smallest canonical
    serialization of the tree tuple.
    """
    K = len(dist)
    if max_depth is None:
        max_depth = K + m
    if K > MAX_K or not 1 <= m <= MAX_M or max_depth > K + m:
        raise SearchSpaceError(
            f"search limited to K <= {MAX_K}, 1 <= m <= {MAX_M}, max_depth <= K + m; "
            f"got K={K}, m={m}, max_depth={max_depth}")
    if max_depth < 1:
        raise SearchSpaceError("max_depth must be >= 1")
    probs = dist.probs
    per_tree = []
    for i in range(m):
        found = _tree_search(probs, i, m, max_depth)
        if not found:
            raise SearchSpaceError(f"no valid tree {i} within depth {max_depth}")
        # same transition row -> keep only the shortest tree
        rows = {}
        for sig, (L, node) in found.items():
            row = np.zeros(m)
            for s, k in enumerate(sig):
                row[k] += probs[s]
            key = tuple(np.round(row, 15))
            if key not in rows or L < rows[key][1] - TIE_TOL:
                rows[key] = (row, L, node)
        per_tree.append(list(rows.values()))

    sizes = [len(t) for t in per_tree]
    idx = np.array(list(itertools.product(*[range(s) for s in sizes])), dtype=np.int64)
    R = np.stack([np.stack([per_tree[i][j][0] for j in idx[:, i]]) for i in range(m)], axis=1)
    Ls = np.stack([np.array([per_tree[i][j][1] for j in idx[:, i]]) for i in range(m)], axis=1)
    single = _single_class(R)
    P = np.zeros_like(Ls)
    if single.any():
        P[single] = _batched_stationary(R[single])
    for n in np.flatnonzero(~single):
        P[n] = stationary(R[n])
    total = (P * Ls).sum(axis=1)
    lo = total.min()
    best, best_key = None, None
    for n in np.flatnonzero(total <= lo + TIE_TOL):
        trees = tuple(_relabel(per_tree[i][idx[n, i]][2], dist.symbols) for i in range(m))
        key = b"".join(serialize_tree(t, dist.symbols) for t in trees)
        if best_key is None or key < best_key:
            best, best_key = trees, key
    code = AifvCode(best, dist.symbols).check()
    from .markov import average_code_length

    return code, average_code_length(code, dist)


def _relabel(node, symbols):
    """Map integer symbol slots back to the alphabet."""
    c0 = _relabel(node.child0, symbols) if node.child0 is not None else None
    c1 = _relabel(node.child1, symbols) if node.child1 is not None else None
    sym = symbols[node.symbol] if node.has_symbol else None
    return type(node)(c0, c1, sym)
