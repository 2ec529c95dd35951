"""Worst-case redundancy curves, inequality checks, loop analysis and simulation."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from .codec import compile_code
from .core import SourceDistribution, binary_entropy
from .huffman import GOLDEN, TOL, HuffmanTree, sibling_sequence
from .kernels import simulate_chain
from .markov import stationary, transition_matrix
from .tree import AifvCode


def _domain(p):
    arr = np.asarray(p, dtype=float)
    if np.any(~((arr >= 0.5) & (arr < 1.0))):
        raise ValueError(f"defined for 1/2 <= p_max < 1, got {p!r}")
    return arr


def _out(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


def gallager(p):
    """Gallager's Huffman bound 2 - p - h(p), vectorized."""
    x = _domain(p)
    return _out(2.0 - x - binary_entropy(x))


def f(p):
    """Worst-case redundancy of optimal two-tree codes given p_max."""
    x = _domain(p)
    h = binary_entropy(x)
    low = x * x - 2.0 * x + 2.0 - h
    high = (-2.0 * x * x + x + 2.0) / (1.0 + x) - h
    return _out(np.where(x <= GOLDEN, low, high))


def chain_bound(p, m: int):
    """Upper bound on the redundancy of the m-tree chain construction (m >= 2).

    Weights the per-tree Gallager terms by the chain's stationary vector: T_0
    gains (m-1) q_2 - q_1, T_i (i >= 2) gains i q_2 - q_1 and T_1 gains q_2.
    m = 3 and m = 4 reproduce f3 and f4.
    """
    if m < 2:
        raise ValueError("m >= 2")
    x = _domain(p)
    q2 = 1.0 - x
    s = sum(x**k for k in range(m))
    total = 2.0 - x - binary_entropy(x) + ((m - 1) * q2 - x) / s + x ** (m - 1) * q2 / s
    for i in range(2, m):
        total = total + x ** (m - i) / s * (i * q2 - x)
    return _out(total)


def f3(p):
    x = _domain(p)
    s = 1.0 + x + x * x
    val = 2.0 - x - binary_entropy(x) + (1.0 + x) / s * (-x + 2.0 * (1.0 - x)) + x * x / s * (1.0 - x)
    return _out(val)


def f4(p):
    x = _domain(p)
    s = 1.0 + x + x * x + x**3
    val = (2.0 - x - binary_entropy(x)
           + (1.0 + x) / s * (-x + 3.0 * (1.0 - x))
           + x * x / s * (-x + 2.0 * (1.0 - x))
           + x**3 / s * (1.0 - x))
    return _out(val)


# analytic values at p_max -> 1
LIMITS = {"gallager": 1.0, "f": 0.5, "f3": 1.0 / 3.0, "f4": 0.25}
CSV_COLUMNS = ("p_max", "gallager", "f", "f3", "f4", "min_f_f3", "min_f_f4")
LOW_P_BOUND = 0.25  # flat segment for p_max < 1/2


@dataclass(frozen=True)
class CurveGrid:
    p_max: np.ndarray
    gallager: np.ndarray
    f: np.ndarray
    f3: np.ndarray
    f4: np.ndarray
    limits: dict = field(default_factory=lambda: dict(LIMITS))

    @property
    def min_f_f3(self) -> np.ndarray:
        return np.minimum(self.f, self.f3)

    @property
    def min_f_f4(self) -> np.ndarray:
        return np.minimum(self.f, self.f4)

    def __len__(self) -> int:
        return self.p_max.size

    def rows(self):
        cols = [self.p_max, self.gallager, self.f, self.f3, self.f4, self.min_f_f3, self.min_f_f4]
        for vals in zip(*cols):
            yield tuple(float(v) for v in vals)

    def write_csv(self, fh) -> None:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for row in self.rows():
            fh.write(",".join(f"{v:.12g}" for v in row) + "\n")
        lim = self.limits
        fh.write(
            "# limit p_max->1: "
            + ",".join(f"{k}={lim[k]:.12g}" for k in ("gallager", "f", "f3", "f4"))
            + f",min_f_f3={min(lim['f'], lim['f3']):.12g},min_f_f4={min(lim['f'], lim['f4']):.12g}\n"
        )

    def to_csv(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()


def worst_case_curves(n: int = 4096, lo: float = 0.5, hi: float = 1.0 - 1e-6) -> CurveGrid:
    """Tabulate the bound curves on n uniform samples of [lo, hi]."""
    if n < 1:
        raise ValueError("grid needs at least one sample")
    if n == 1:
        p = np.array([lo], dtype=float)
    else:
        if not lo < hi:
            raise ValueError("grid needs lo < hi")
        p = np.linspace(lo, hi, n)
    return CurveGrid(p, gallager(p), f(p), f3(p), f4(p))


def read_csv(text: str) -> dict:
    """Parse a curve CSV back into column arrays (comment lines skipped)."""
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    header = lines[0].split(",")
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]]).reshape(-1, len(header))
    return {name: data[:, i] for i, name in enumerate(header)}


# Numeric forms of the inequalities the bounds rest on.

def internal_pair_ratio_holds(tree: HuffmanTree) -> bool:
    """q_{2k-1} <= 2 q_{2k} whenever q_{2k-1} is internal."""
    seq = sibling_sequence(tree)
    for k in range(0, len(seq), 2):
        a, b = seq[k], seq[k + 1]
        if not a.is_leaf and a.weight > 2.0 * b.weight + TOL:
            return False
    return True


def conversion_gain_holds(w1: float, w2: float, q: float) -> bool:
    """2 w2 - (w1+w2) h(w2/(w1+w2)) + q w1 < q (w1 - w2), for 0 < 2 w2 < w1, 0 <= q <= 1/2."""
    if not (0.0 < 2.0 * w2 < w1 and 0.0 <= q <= 0.5):
        raise ValueError("needs 0 < 2 w2 < w1 and 0 <= q <= 1/2")
    s = w1 + w2
    lhs = 2.0 * w2 - s * binary_entropy(w2 / s) + q * w1
    return lhs < q * (w1 - w2)


def balanced_pair_holds(a: float, b: float) -> bool:
    """(a+b)(1 - h(b/(a+b))) <= (a-b)/4, for b <= a <= 2b."""
    if not (0.0 < b <= a <= 2.0 * b):
        raise ValueError("needs 0 < b <= a <= 2 b")
    s = a + b
    return s * (1.0 - binary_entropy(b / s)) <= (a - b) / 4.0 + 1e-15


def conversion_constant(c_max: float = 1e6, n: int = 200_001) -> float:
    """inf over c in (2, c_max] of (1+c) g(1/(1+c)), g(x) = h(x) - 2x."""
    c = 2.0 + np.geomspace(1e-12, c_max - 2.0, n)
    x = 1.0 / (1.0 + c)
    vals = (1.0 + c) * (binary_entropy(x) - 2.0 * x)
    return float(vals.min())


# Loop structure of the most-likely-symbol transitions.

@dataclass(frozen=True)
class LoopReport:
    symbol: object
    vertices: tuple  # trees reachable from T_0
    edges: dict  # i -> tree used after encoding the symbol with T_i
    loops: tuple  # disjoint cycles, each a tuple of tree indices
    residual: tuple  # reachable trees on no cycle
    off_root: tuple  # per loop: some tree in it puts the symbol below the root
    lower_bound: float

    @property
    def ok(self) -> bool:
        return all(self.off_root)


def length_lower_bound(m: int, delta: float) -> float:
    """(1-d)^(m+1) / sum_{n=1}^m (1-d)^(n-m)."""
    q = 1.0 - delta
    return q ** (m + 1) / math.fsum(q ** (n - m) for n in range(1, m + 1))


def loop_analysis(code: AifvCode, dist: SourceDistribution, delta: float) -> LoopReport:
    if not 0.0 < delta < 0.5:
        raise ValueError("delta must lie in (0, 1/2)")
    a = dist.most_likely
    R = transition_matrix(code, dist)
    reach = {0}
    frontier = [0]
    while frontier:
        i = frontier.pop()
        for j in np.flatnonzero(R[i] > 0):
            if int(j) not in reach:
                reach.add(int(j))
                frontier.append(int(j))
    vertices = tuple(sorted(reach))
    tables = code.tables
    edges = {i: tables[i][a][1] for i in vertices}
    loops, on_loop = [], set()
    for start in vertices:
        path, pos = [], {}
        v = start
        while v not in pos and v not in on_loop:
            pos[v] = len(path)
            path.append(v)
            v = edges[v]
        if v in pos:  # found a new cycle
            cyc = tuple(path[pos[v]:])
            loops.append(cyc)
            on_loop.update(cyc)
    residual = tuple(v for v in vertices if v not in on_loop)
    off_root = tuple(any(tables[i][a][0] != "" for i in cyc) for cyc in loops)
    return LoopReport(a, vertices, edges, tuple(loops), residual, off_root,
                      length_lower_bound(code.m, delta))


# Monte-Carlo check of the stationary model.

def chain_variances(code: AifvCode, dist: SourceDistribution):
    """Asymptotic variances (per symbol) of the bit count and of each tree's visit count.

    Works on the pair chain (tree, symbol) restricted to the recurrent support
    of the stationary vector: sigma^2 = pi . (rbar * (2 Z rbar - rbar)) with
    Z = (I - P + 1 pi^T)^-1, which exists for any irreducible finite chain.
    """
    cc = compile_code(code)
    p_tree = stationary(transition_matrix(code, dist))
    support = [t for t in range(code.m) if p_tree[t] > 0.0]
    col = {t: i for i, t in enumerate(support)}
    probs = np.asarray(dist.probs)
    sidx = [cc.index[s] for s in dist.symbols]
    K = len(sidx)
    n = len(support) * K
    P = np.zeros((n, n))
    pi = np.zeros(n)
    bits = np.zeros(n)
    visit = np.zeros((n, code.m))
    for a, t in enumerate(support):
        for b, s in enumerate(sidx):
            row = a * K + b
            pi[row] = p_tree[t] * probs[b]
            bits[row] = cc.cw_len[t, s]
            visit[row, t] = 1.0
            P[row, col[int(cc.nxt[t, s])] * K:(col[int(cc.nxt[t, s])] + 1) * K] = probs
    Z = np.linalg.inv(np.eye(n) - P + np.outer(np.ones(n), pi))

    def var(r):
        rb = r - pi @ r
        return float(max(pi @ (rb * (2.0 * (Z @ rb) - rb)), 0.0))

    return var(bits), np.array([var(visit[:, j]) for j in range(code.m)])


@dataclass(frozen=True)
class SimulationResult:
    n: int
    bits_per_symbol: float
    bits_se: float  # from the chain's asymptotic variance
    visits: np.ndarray  # empirical tree frequencies
    visits_se: np.ndarray
    batch_bits_se: float  # batch-means estimate, for comparison
    batch_visits_se: np.ndarray

    def within(self, expected: float, sigmas: float = 3.0) -> bool:
        return abs(self.bits_per_symbol - expected) <= sigmas * self.bits_se

    def visits_within(self, expected, sigmas: float = 3.0) -> bool:
        return bool(np.all(np.abs(self.visits - np.asarray(expected)) <= sigmas * self.visits_se))


def simulate(code: AifvCode, dist: SourceDistribution, n: int = 1_000_000,
             seed: int = 0, nbatch: int = 100) -> SimulationResult:
    """Encode an i.i.d. stream of n symbols from T_0 and tally bits and tree visits.

    Standard errors come from ``chain_variances``; batch means are also
    reported but collapse to zero when rare symbols never occur in the run.
    """
    if n < nbatch or nbatch < 2:
        raise ValueError("need n >= nbatch >= 2")
    cc = compile_code(code)
    rng = np.random.default_rng(seed)
    order = np.array([cc.index[s] for s in dist.symbols], dtype=np.int32)
    syms = order[rng.choice(len(order), size=n, p=np.asarray(dist.probs))]
    per = n // nbatch
    bits, visits = simulate_chain(syms, cc.cw_len, cc.nxt, code.m, nbatch)
    rate = bits / per
    freq = visits / per
    root_n = math.sqrt(nbatch)
    total = per * nbatch
    vb, vv = chain_variances(code, dist)
    return SimulationResult(
        total,
        float(rate.mean()),
        math.sqrt(vb / total),
        freq.mean(axis=0),
        np.sqrt(vv / total),
        float(rate.std(ddof=1) / root_n),
        freq.std(axis=0, ddof=1) / root_n,
    )


def expected_model(code: AifvCode, dist: SourceDistribution):
    """(stationary vector, average length) for comparing with ``simulate``."""
    p = stationary(transition_matrix(code, dist))
    L = float(np.dot(p, code.tree_lengths(dist)))
    return p, L
