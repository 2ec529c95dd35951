"""AIFV-m code trees: node model, classification, validation and codeword tables.

A tree is a plain ``Node`` graph. Master degree is never stored; it is derived
from the run of slave-0 nodes hanging below a symbol-carrying node.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from typing import Iterator, Optional

from .core import SourceDistribution


@dataclass(frozen=True, eq=False)
class Node:
    child0: Optional["Node"] = None
    child1: Optional["Node"] = None
    symbol: object = None

    @property
    def has_symbol(self) -> bool:
        return self.symbol is not None

    @property
    def n_children(self) -> int:
        return (self.child0 is not None) + (self.child1 is not None)

    def __repr__(self):
        return f"Node({describe(self)})"


def leaf(symbol) -> Node:
    return Node(symbol=symbol)


def complete(zero: Node, one: Node) -> Node:
    return Node(zero, one)


def slave0(child: Node) -> Node:
    return Node(child0=child)


def slave1(child: Node) -> Node:
    return Node(child1=child)


def master(symbol, degree: int, below: Node) -> Node:
    """Master of ``degree`` >= 1: symbol node, ``degree`` slave-0 nodes, then ``below``."""
    if degree < 1:
        raise ValueError("internal master needs degree >= 1; use leaf() for degree 0")
    node = below
    for _ in range(degree):
        node = slave0(node)
    return Node(child0=node, symbol=symbol)


def zero_chain(n: int, below: Node) -> Node:
    for _ in range(n):
        below = slave0(below)
    return below


class ClassificationError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"node {path or 'λ'}: {message}")
        self.path = path


# classification kinds
COMPLETE = "complete"
SLAVE0 = "slave0"
SLAVE1 = "slave1"
MASTER = "master"


def classify(node: Node, path: str = "") -> tuple:
    """Return (kind, degree); degree is None except for masters."""
    if node.child0 is not None and node.child1 is not None:
        if node.has_symbol:
            raise ClassificationError(path, "complete internal node carries a symbol")
        return COMPLETE, None
    if node.child0 is None and node.child1 is None:
        if not node.has_symbol:
            raise ClassificationError(path, "leaf without a symbol")
        return MASTER, 0
    if not node.has_symbol:
        return (SLAVE0, None) if node.child0 is not None else (SLAVE1, None)
    # symbol on an incomplete node: must head a slave-0 chain
    if node.child0 is None:
        raise ClassificationError(path, "symbol on a slave-1 position")
    k = 0
    cur = node.child0
    while cur is not None and _is_slave0(cur):
        k += 1
        cur = cur.child0
    if k == 0:
        raise ClassificationError(path, "incomplete node with symbol is not followed by a slave-0 node")
    return MASTER, k


def _is_slave0(node: Node) -> bool:
    return node.child0 is not None and node.child1 is None and not node.has_symbol


def master_degree(node: Node) -> Optional[int]:
    kind, k = classify(node)
    return k if kind == MASTER else None


def describe(node: Node) -> str:
    try:
        kind, k = classify(node)
    except ClassificationError:
        return "invalid"
    if kind == MASTER:
        return f"master[{node.symbol!r}, {k}]"
    return kind


def walk(root: Node) -> Iterator[tuple]:
    """Preorder (path, node) pairs."""
    stack = [("", root)]
    while stack:
        path, node = stack.pop()
        yield path, node
        if node.child1 is not None:
            stack.append((path + "1", node.child1))
        if node.child0 is not None:
            stack.append((path + "0", node.child0))


def node_at(root: Node, path: str) -> Optional[Node]:
    node = root
    for ch in path:
        if node is None:
            return None
        node = node.child0 if ch == "0" else node.child1
    return node


def depth(root: Node) -> int:
    return max(len(p) for p, _ in walk(root))


@dataclass(frozen=True)
class Violation:
    rule: str
    path: str
    message: str

    def __str__(self):
        return f"[{self.rule}] at {self.path or 'λ'}: {self.message}"


def validate_tree(root: Node, index: int, m: int, alphabet=None, strict: bool = True) -> list:
    """List of rule violations for ``root`` used as tree ``index`` of an AIFV-m code.

    Rules: ``node-kind`` (every node is master, slave or complete; symbols on
    masters only), ``degree`` (0 <= k <= m-1), ``alphabet`` (each symbol exactly
    once), ``zero-run`` (for index >= 1 the node at 0^index is slave-1) and
    ``root`` (root of T_1 complete when strict, root degree <= index-1 otherwise).
    An empty list means the tree is valid.
    """
    out = []
    if not 0 <= index < m:
        out.append(Violation("index", "", f"tree index {index} outside [0, {m - 1}]"))
    seen = {}
    for path, node in walk(root):
        try:
            kind, k = classify(node, path)
        except ClassificationError as exc:
            out.append(Violation("node-kind", path, str(exc)))
            continue
        if kind == MASTER:
            if k > m - 1:
                out.append(Violation("degree", path, f"master degree {k} exceeds m-1 = {m - 1}"))
            seen.setdefault(node.symbol, []).append(path)
        elif node.has_symbol:
            out.append(Violation("node-kind", path, "symbol on a non-master node"))
    for sym, paths in seen.items():
        if len(paths) > 1:
            out.append(Violation("alphabet", paths[1], f"symbol {sym!r} assigned {len(paths)} times"))
    if alphabet is not None:
        alpha = set(alphabet)
        for sym in seen:
            if sym not in alpha:
                out.append(Violation("alphabet", seen[sym][0], f"symbol {sym!r} not in alphabet"))
        for sym in alphabet:
            if sym not in seen:
                out.append(Violation("alphabet", "", f"symbol {sym!r} not assigned"))
    if index >= 1:
        anchor = node_at(root, "0" * index)
        if anchor is None:
            out.append(Violation("zero-run", "0" * index, "no node at the zero-run anchor"))
        elif not (anchor.child1 is not None and anchor.child0 is None and not anchor.has_symbol):
            out.append(Violation("zero-run", "0" * index, f"anchor is {describe(anchor)}, not slave-1"))
    try:
        rkind, rk = classify(root)
    except ClassificationError:
        rkind, rk = None, None
    if index == 1:
        if rkind == MASTER:
            out.append(Violation("root", "", "root of T_1 is a master node"))
        elif strict and rkind != COMPLETE:
            out.append(Violation("root", "", "root of T_1 must be a complete internal node"))
    elif index >= 2 and rkind == MASTER and rk > index - 1:
        out.append(Violation("root", "", f"root master degree {rk} exceeds {index - 1}"))
    return out


def codeword_table(root: Node) -> dict:
    """symbol -> (codeword, degree)."""
    table = {}
    for path, node in walk(root):
        if node.has_symbol:
            table[node.symbol] = (path, classify(node, path)[1])
    if len(table) < 2:
        raise ValueError("a code tree must carry at least two symbols")
    return table


def average_length(root: Node, dist: SourceDistribution) -> float:
    table = codeword_table(root)
    return math.fsum(p * len(table[s][0]) for s, p in zip(dist.symbols, dist.probs))


@dataclass(eq=False)
class AifvCode:
    """Tuple of m code trees T_0..T_{m-1} over a shared alphabet."""

    trees: tuple
    alphabet: tuple
    strict: bool = True
    _tables: list = field(default=None, init=False, repr=False)

    def __post_init__(self):
        self.trees = tuple(self.trees)
        self.alphabet = tuple(self.alphabet)
        if not self.trees:
            raise ValueError("an AIFV code needs at least one tree")

    @property
    def m(self) -> int:
        return len(self.trees)

    @property
    def tables(self) -> list:
        if self._tables is None:
            self._tables = [codeword_table(t) for t in self.trees]
        return self._tables

    def violations(self) -> list:
        out = []
        for i, t in enumerate(self.trees):
            out.extend((i, v) for v in validate_tree(t, i, self.m, self.alphabet, self.strict))
        return out

    def check(self) -> "AifvCode":
        bad = self.violations()
        if bad:
            lines = "; ".join(f"T_{i} {v}" for i, v in bad[:5])
            raise ValueError(f"invalid AIFV-{self.m} code: {lines}")
        return self

    def max_codeword_length(self) -> int:
        return max(len(cw) for tab in self.tables for cw, _ in tab.values())

    def tree_lengths(self, dist: SourceDistribution) -> list:
        return [average_length(t, dist) for t in self.trees]


def verify_zero_run(code: AifvCode) -> bool:
    """True iff, starting at T_i (1 <= i <= m-1), no encoding begins with 0^(i+1).

    Explores (tree, zeros emitted so far) states; the bit horizon is
    m * (max codeword length).
    """
    m = code.m
    horizon = m * max(1, code.max_codeword_length())
    for i in range(1, m):
        need = i + 1
        seen = set()
        frontier = [(i, 0)]
        while frontier:
            tree_idx, zeros = frontier.pop()
            if (tree_idx, zeros) in seen or zeros > horizon:
                continue
            seen.add((tree_idx, zeros))
            for cw, deg in code.tables[tree_idx].values():
                lead = len(cw) - len(cw.lstrip("0"))
                if zeros + lead >= need:
                    return False
                if lead == len(cw):
                    frontier.append((deg, zeros + lead))
    return True


# Canonical preorder serialization: tag byte, then u16 symbol index for symbol nodes.
TAG_COMPLETE, TAG_SLAVE0, TAG_SLAVE1, TAG_LEAF, TAG_MASTER = range(5)


def serialize_tree(root: Node, alphabet) -> bytes:
    index = {s: i for i, s in enumerate(alphabet)}
    out = bytearray()
    stack = [root]
    while stack:
        node = stack.pop()
        n0, n1 = node.child0, node.child1
        if node.has_symbol:
            if n1 is not None:
                raise ValueError("cannot serialize symbol node with a '1' child")
            out.append(TAG_LEAF if n0 is None else TAG_MASTER)
            out += struct.pack(">H", index[node.symbol])
            if n0 is not None:
                stack.append(n0)
        elif n0 is not None and n1 is not None:
            out.append(TAG_COMPLETE)
            stack.append(n1)
            stack.append(n0)
        elif n0 is not None:
            out.append(TAG_SLAVE0)
            stack.append(n0)
        elif n1 is not None:
            out.append(TAG_SLAVE1)
            stack.append(n1)
        else:
            raise ValueError("cannot serialize a symbol-less leaf")
    return bytes(out)


def deserialize_tree(data: bytes, alphabet) -> Node:
    # Explicit stack so deep slave chains do not hit the recursion limit.
    pos = 0
    frames = []  # [tag, symbol, children collected, children needed]
    result = None
    while True:
        if pos >= len(data):
            raise ValueError("truncated tree encoding")
        tag = data[pos]
        pos += 1
        sym = None
        if tag in (TAG_LEAF, TAG_MASTER):
            if pos + 2 > len(data):
                raise ValueError("truncated symbol index")
            (idx,) = struct.unpack_from(">H", data, pos)
            pos += 2
            if idx >= len(alphabet):
                raise ValueError(f"symbol index {idx} out of range")
            sym = alphabet[idx]
        need = {TAG_COMPLETE: 2, TAG_SLAVE0: 1, TAG_SLAVE1: 1, TAG_LEAF: 0, TAG_MASTER: 1}.get(tag)
        if need is None:
            raise ValueError(f"unknown node tag {tag}")
        frames.append([tag, sym, [], need])
        while frames and len(frames[-1][2]) == frames[-1][3]:
            tag_, sym_, kids, _ = frames.pop()
            if tag_ == TAG_COMPLETE:
                node = Node(kids[0], kids[1])
            elif tag_ in (TAG_SLAVE0, TAG_MASTER):
                node = Node(child0=kids[0], symbol=sym_)
            elif tag_ == TAG_SLAVE1:
                node = Node(child1=kids[0])
            else:
                node = Node(symbol=sym_)
            if frames:
                frames[-1][2].append(node)
            else:
                result = node
        if result is not None:
            if pos != len(data):
                raise ValueError(f"{len(data) - pos} trailing bytes after tree")
            return result


def tree_from_table(table: dict) -> Node:
    """Rebuild a tree from {symbol: codeword}; missing branch nodes become slaves.

    Only the paths are given, so degrees come out of the slave-0 chains implied
    by the codewords. Used to write small example codes compactly.
    """
    paths = {cw: s for s, cw in table.items()}
    prefixes = {cw[:i] for cw in paths for i in range(len(cw) + 1)}

    def build(path):
        z, o = path + "0", path + "1"
        n0 = build(z) if z in prefixes else None
        n1 = build(o) if o in prefixes else None
        return Node(n0, n1, paths.get(path))

    return build("")
