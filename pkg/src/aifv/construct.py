"""Huffman-to-AIFV transformations and a random valid-code generator.

Shapes produced here are checked against the average-length deltas and
transition matrices they are meant to realize; see tests/test_construct.py.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import SourceDistribution
from .huffman import GOLDEN, TOL, HNode, HuffmanTree, build_huffman, sibling_sequence
from .search import SearchSpaceError, brute_force_optimal  # noqa: F401  (re-exported)
from .tree import AifvCode, Node, complete, leaf, master, slave0, slave1, zero_chain


@dataclass(eq=False)
class BaseTransform:
    """Huffman tree with qualifying sibling pairs turned into degree-1 masters."""

    huffman: HuffmanTree
    sequence: list  # sibling-ordered HNodes q_1..q_{2K-2}
    converted: frozenset  # pair indices k (1-based) that were converted
    root: Node

    @property
    def q(self) -> list:
        return [n.weight for n in self.sequence]

    def pair(self, k: int) -> tuple:
        return self.sequence[2 * k - 2], self.sequence[2 * k - 1]

    def side(self, j: int) -> Node:
        """Converted subtree hanging below q_j, j in {1, 2}."""
        return self._convert(self.sequence[j - 1])

    def _convert(self, h: HNode) -> Node:
        return _to_nodes(h, self._pair_of, self.converted)

    @property
    def _pair_of(self) -> dict:
        return {id(self.sequence[2 * k].parent): k + 1 for k in range(len(self.sequence) // 2)}


def _to_nodes(h: HNode, pair_of: dict, converted) -> Node:
    # explicit stack: Huffman trees for skewed sources can be deep
    out = {}
    stack = [(h, False)]
    while stack:
        node, done = stack.pop()
        if node.is_leaf:
            out[id(node)] = leaf(node.symbol)
            continue
        odd, even = _ordered_children(node)
        if not done:
            stack.append((node, True))
            stack.append((odd, False))
            stack.append((even, False))
            continue
        k = pair_of.get(id(node))
        if k is not None and k in converted:
            out[id(node)] = master(odd.symbol, 1, out[id(even)])
        else:
            out[id(node)] = complete(out[id(odd)], out[id(even)])
    return out[id(h)]


def _ordered_children(node: HNode):
    a, b = node.left, node.right
    if a.weight > b.weight + TOL:
        return a, b
    if b.weight > a.weight + TOL:
        return b, a
    if b.is_leaf and not a.is_leaf:
        return b, a
    return a, b


def to_base(huffman: HuffmanTree) -> BaseTransform:
    """Convert pairs (q_{2k-1} leaf, q_{2k}) with 2 q_{2k} < q_{2k-1}, k = 2..K-1."""
    seq = sibling_sequence(huffman)
    K = len(seq) // 2 + 1
    converted = set()
    for k in range(2, K):
        odd, even = seq[2 * k - 2], seq[2 * k - 1]
        if odd.is_leaf and 2.0 * even.weight < odd.weight:
            converted.add(k)
    pair_of = {id(seq[2 * k].parent): k + 1 for k in range(K - 1)}
    root = _to_nodes(huffman.root, pair_of, frozenset(converted))
    return BaseTransform(huffman, seq, frozenset(converted), root)


def huffman_code(dist: SourceDistribution) -> AifvCode:
    """Plain Huffman code as a one-tree AIFV code."""
    h = build_huffman(dist)
    return AifvCode((_to_nodes(h.root, {}, frozenset()),), dist.symbols).check()


def _pad_tree(index: int, sub1: Node, sub2: Node) -> Node:
    # root complete, slave-0 run to depth index-1, slave-1 anchor at 0^index
    return complete(zero_chain(index - 1, slave1(sub2)), sub1)


def _pad(trees: list, m: int, sub1, sub2) -> list:
    return trees + [_pad_tree(i, sub1, sub2) for i in range(len(trees), m)]


def build_aifv2(dist: SourceDistribution, m: int = 2) -> AifvCode:
    """Two-tree code from T_base; unreachable padding trees are appended if m > 2.

    For p_max <= (sqrt(5)-1)/2, T_0 = T_base. Above that, T_0 puts the most
    likely symbol on the root as a degree-1 master. T_1 always moves the q_2
    side below a slave-1 node at '0'.
    """
    if m < 2:
        raise ValueError("AIFV-2 code needs m >= 2")
    base = to_base(build_huffman(dist))
    q1 = base.sequence[0]
    sub1, sub2 = base.side(1), base.side(2)
    t1 = complete(slave1(sub2), sub1)
    if dist.p_max > GOLDEN:
        if not q1.is_leaf:
            raise AssertionError("q_1 must be a leaf when p_max > 1/2")
        t0 = master(q1.symbol, 1, sub2)
    else:
        t0 = complete(sub1, sub2)
    trees = _pad([t0, t1], m, sub1, sub2)
    return AifvCode(tuple(trees), dist.symbols).check()


def build_aifvm(dist: SourceDistribution, m: int) -> AifvCode:
    """m-tree chain code: T_0 -> T_{m-1} -> ... -> T_2 -> T_1 -> T_0 on the likeliest symbol.

    T_0 holds it at the root with degree m-1, T_i (2 <= i <= m-1) at the root
    with degree i-1, and T_1 at the leaf '1'. The q_2 side of the Huffman tree
    sits at 0^m in T_0, at 0^i 1 in T_i and at 01 in T_1.
    Falls back to ``build_aifv2`` when p_max < 1/2.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if m == 1:
        return huffman_code(dist)
    if dist.p_max < 0.5:
        return build_aifv2(dist, m)
    h = build_huffman(dist)
    seq = sibling_sequence(h)
    q1, q2 = seq[0], seq[1]
    if not q1.is_leaf:
        raise AssertionError("q_1 must be a leaf when p_max >= 1/2")
    a = q1.symbol

    def sub2():
        return _to_nodes(q2, {}, frozenset())

    trees = [master(a, m - 1, sub2()), complete(slave1(sub2()), leaf(a))]
    for i in range(2, m):
        trees.append(master(a, i - 1, slave1(sub2())))
    return AifvCode(tuple(trees), dist.symbols).check()


def build_aifv3(dist: SourceDistribution) -> AifvCode:
    return build_aifvm(dist, 3)


def build_aifv4(dist: SourceDistribution) -> AifvCode:
    return build_aifvm(dist, 4)


def best_code(dist: SourceDistribution, m: int) -> AifvCode:
    """Shortest of the Huffman, AIFV-2 and chain constructions that fit in m trees."""
    from .markov import average_code_length

    cands = [huffman_code(dist)]
    if m >= 2:
        cands.append(build_aifv2(dist))
        cands.extend(build_aifvm(dist, j) for j in range(2, m + 1))
    return min(cands, key=lambda c: (average_code_length(c, dist), c.m))


# Random valid codes for property tests.

def random_code(K: int, m: int, rng: np.random.Generator, alphabet=None,
                slave_rate: float = 0.1, master_rate: float = 0.35) -> AifvCode:
    """Random AIFV-m code over K symbols covering all node kinds."""
    if alphabet is None:
        alphabet = tuple(range(K))
    gen = _RandomTrees(m, rng, slave_rate, master_rate)
    trees = [gen.tree(list(alphabet), i) for i in range(m)]
    return AifvCode(tuple(trees), tuple(alphabet)).check()


class _RandomTrees:
    def __init__(self, m, rng, slave_rate, master_rate):
        self.m = m
        self.rng = rng
        self.slave_rate = slave_rate
        self.master_rate = master_rate

    def tree(self, syms, index):
        syms = list(syms)
        self.rng.shuffle(syms)
        if index == 0:
            return self.sub(syms)
        return self.spine(syms, index, 0)

    def sub(self, syms, no_slave0=False):
        rng, n = self.rng, len(syms)
        r = rng.random()
        if r < self.slave_rate:
            if no_slave0 or rng.random() < 0.5:
                return slave1(self.sub(syms))
            return slave0(self.sub(syms))
        if n == 1:
            return leaf(syms[0])
        if self.m >= 2 and rng.random() < self.master_rate:
            k = int(rng.integers(1, self.m))
            return master(syms[0], k, self.sub(syms[1:], no_slave0=True))
        cut = int(rng.integers(1, n))
        return complete(self.sub(syms[:cut]), self.sub(syms[cut:]))

    def spine(self, syms, index, j, no_slave0=False):
        """Node at depth j on the 0-path of T_index; the anchor 0^index is slave-1."""
        rng, n = self.rng, len(syms)
        if j == index:
            return slave1(self.sub(syms))
        options = []
        if n >= 2:
            options.append("complete")
            if index - 1 - j >= 1:
                options.append("master")
        if not no_slave0 and not (j == 0 and index == 1):
            options.append("slave0")
        kind = options[int(rng.integers(len(options)))]
        if kind == "slave0":
            return slave0(self.spine(syms, index, j + 1))
        if kind == "complete":
            cut = int(rng.integers(1, n))
            return complete(self.spine(syms[:cut], index, j + 1), self.sub(syms[cut:]))
        top = index - 1 - j
        if n - 1 >= 2:
            k = int(rng.integers(1, top + 1))
        else:
            k = top
        return master(syms[0], k, self.spine(syms[1:], index, j + k + 1, no_slave0=True))
