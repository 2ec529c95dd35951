"""Huffman trees, sibling sequences and the chain-rule entropy decomposition."""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

from .core import SourceDistribution, binary_entropy

TOL = 1e-12
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(eq=False)
class HNode:
    weight: float
    symbol: object = None
    left: Optional["HNode"] = None
    right: Optional["HNode"] = None
    order: int = 0  # creation order; leaves first, then merges
    parent: Optional["HNode"] = field(default=None, repr=False)

    @property
    def is_leaf(self) -> bool:
        return self.left is None and self.right is None

    def sibling(self) -> Optional["HNode"]:
        if self.parent is None:
            return None
        return self.parent.right if self.parent.left is self else self.parent.left

    def leaves(self):
        if self.is_leaf:
            yield self
        else:
            yield from self.left.leaves()
            yield from self.right.leaves()


@dataclass(eq=False)
class HuffmanTree:
    root: HNode
    dist: SourceDistribution
    merges: list  # (smaller, larger, parent) in merge order

    def depths(self) -> dict:
        out = {}
        stack = [(self.root, 0)]
        while stack:
            node, d = stack.pop()
            if node.is_leaf:
                out[node.symbol] = d
            else:
                stack.append((node.left, d + 1))
                stack.append((node.right, d + 1))
        return out

    def expected_length(self) -> float:
        d = self.depths()
        return math.fsum(p * d[s] for s, p in zip(self.dist.symbols, self.dist.probs))

    def nodes(self):
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            if not node.is_leaf:
                stack.append(node.right)
                stack.append(node.left)


def build_huffman(dist: SourceDistribution) -> HuffmanTree:
    """Huffman merge with stable tie-breaking: earliest-created node wins ties."""
    counter = itertools.count()
    heap = []
    for s, p in zip(dist.symbols, dist.probs):
        node = HNode(p, symbol=s, order=next(counter))
        heap.append((p, node.order, node))
    heapq.heapify(heap)
    merges = []
    while len(heap) > 1:
        w1, _, a = heapq.heappop(heap)
        w2, _, b = heapq.heappop(heap)
        parent = HNode(w1 + w2, left=b, right=a, order=next(counter))
        a.parent = parent
        b.parent = parent
        merges.append((a, b, parent))
        heapq.heappush(heap, (parent.weight, parent.order, parent))
    return HuffmanTree(heap[0][2], dist, merges)


def tree_from_nested(nested, probs: dict) -> HuffmanTree:
    """Weighted full binary tree from nested 2-tuples of symbols (for tests)."""
    counter = itertools.count()

    def make(x):
        if isinstance(x, tuple):
            left, right = make(x[0]), make(x[1])
            node = HNode(left.weight + right.weight, left=left, right=right, order=next(counter))
            left.parent = right.parent = node
            return node
        return HNode(probs[x], symbol=x, order=next(counter))

    root = make(nested)
    symbols = tuple(probs)
    dist = SourceDistribution(symbols, tuple(probs[s] for s in symbols))
    return HuffmanTree(root, dist, [])


class SiblingPropertyError(ValueError):
    pass


def _pair_sorted(a: HNode, b: HNode):
    # larger first; on ties put a leaf in the odd slot
    if a.weight > b.weight + TOL:
        return a, b
    if b.weight > a.weight + TOL:
        return b, a
    if b.is_leaf and not a.is_leaf:
        return b, a
    return a, b


def sibling_sequence(tree: HuffmanTree) -> list:
    """Non-increasing ordering q_1..q_{2K-2} where (q_{2k-1}, q_{2k}) are siblings.

    Returns a list of HNode. Raises SiblingPropertyError if none exists.
    """
    remaining = [n for n in tree.nodes() if n is not tree.root]
    result = _sibling_search(remaining)
    if result is None:
        raise SiblingPropertyError("tree has no sibling-ordered weight sequence")
    return result


def _sibling_search(remaining: list):
    if not remaining:
        return []
    top = max(n.weight for n in remaining)
    ids = {id(n) for n in remaining}
    candidates = sorted((n for n in remaining if n.weight >= top - TOL), key=lambda n: n.order)
    tried = set()
    for a in candidates:
        b = a.sibling()
        if b is None or id(b) not in ids or id(a.parent) in tried:
            continue
        tried.add(id(a.parent))
        rest = [n for n in remaining if n is not a and n is not b]
        rest_max = max((n.weight for n in rest), default=-math.inf)
        if min(a.weight, b.weight) < rest_max - TOL:
            continue
        tail = _sibling_search(rest)
        if tail is not None:
            return list(_pair_sorted(a, b)) + tail
    return None


def check_sibling_property(tree: HuffmanTree) -> bool:
    try:
        sibling_sequence(tree)
    except SiblingPropertyError:
        return False
    return True


def sibling_weights(tree: HuffmanTree) -> list:
    return [n.weight for n in sibling_sequence(tree)]


def entropy_decomposition(tree: HuffmanTree) -> float:
    """Sum over sibling pairs of (q_odd + q_even) * h(q_even / (q_odd + q_even))."""
    seq = sibling_sequence(tree)
    terms = []
    for k in range(0, len(seq), 2):
        a, b = seq[k].weight, seq[k + 1].weight
        s = a + b
        terms.append(s * binary_entropy(b / s))
    return math.fsum(terms)


def gallager_bound(p_max: float) -> float:
    """Worst-case Huffman redundancy for a given most-likely probability >= 1/2."""
    if not 0.5 <= p_max < 1.0:
        raise ValueError(f"bound stated for 1/2 <= p_max < 1, got {p_max!r}")
    return 2.0 - p_max - binary_entropy(p_max)
