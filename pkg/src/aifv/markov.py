"""Tree-transition Markov chain, stationary probabilities and average code length."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import SourceDistribution, entropy
from .tree import AifvCode

ROW_TOL = 1e-12


def transition_matrix(code: AifvCode, dist: SourceDistribution) -> np.ndarray:
    """R[i, j] = total probability of symbols whose master in T_i has degree j."""
    m = code.m
    R = np.zeros((m, m))
    for i, table in enumerate(code.tables):
        for s, p in zip(dist.symbols, dist.probs):
            R[i, table[s][1]] += p
    return R


def _reach(R: np.ndarray) -> np.ndarray:
    m = R.shape[0]
    reach = (R > 0) | np.eye(m, dtype=bool)
    for k in range(m):
        reach |= reach[:, [k]] & reach[[k], :]
    return reach


def recurrent_classes(R: np.ndarray, start: int = 0) -> list:
    """Closed communicating classes reachable from ``start`` (sorted index lists)."""
    reach = _reach(R)
    comm = reach & reach.T
    classes, seen = [], set()
    for i in np.flatnonzero(reach[start]):
        if i in seen:
            continue
        cls = [int(j) for j in np.flatnonzero(comm[i])]
        seen.update(cls)
        closed = not (R[np.ix_(cls, [j for j in range(R.shape[0]) if j not in cls])] > 0).any()
        if closed:
            classes.append(cls)
    return sorted(classes)


def _solve_irreducible(P: np.ndarray) -> np.ndarray:
    # (P^T - I) p = 0 with one row replaced by sum(p) = 1
    n = P.shape[0]
    A = P.T - np.eye(n)
    A[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    try:
        return np.linalg.solve(A, b)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(f"singular stationary system: {exc}") from None


def stationary(R: np.ndarray, initial: int = 0) -> np.ndarray:
    """Long-run tree occupation started from ``initial`` (Cesaro limit).

    One reachable recurrent class gives the usual left eigenvector; several are
    weighted by their absorption probabilities from ``initial``.
    """
    R = np.asarray(R, dtype=float)
    m = R.shape[0]
    if R.shape != (m, m) or np.abs(R.sum(axis=1) - 1.0).max() > ROW_TOL:
        raise ValueError("R must be square and row-stochastic")
    classes = recurrent_classes(R, initial)
    recurrent = sorted(j for c in classes for j in c)
    p = np.zeros(m)
    if len(classes) == 1:
        cls = classes[0]
        p[cls] = _solve_irreducible(R[np.ix_(cls, cls)])
        return p
    # transient states reachable from the start; unreachable closed classes stay out
    reach = _reach(R)[initial]
    transient = [j for j in range(m) if reach[j] and j not in recurrent]
    # absorption probabilities B[t, c] from transient states into each class
    if initial in recurrent:
        weights = [1.0 if initial in c else 0.0 for c in classes]
    else:
        Q = R[np.ix_(transient, transient)]
        to_cls = np.stack([R[np.ix_(transient, c)].sum(axis=1) for c in classes], axis=1)
        B = np.linalg.solve(np.eye(len(transient)) - Q, to_cls)
        weights = B[transient.index(initial)]
    for w, cls in zip(weights, classes):
        p[cls] += w * _solve_irreducible(R[np.ix_(cls, cls)])
    return p


@dataclass(frozen=True)
class TransitionModel:
    R: np.ndarray
    p: np.ndarray

    def residual(self) -> float:
        return float(np.abs(self.p @ self.R - self.p).max())


def transition_model(code: AifvCode, dist: SourceDistribution) -> TransitionModel:
    R = transition_matrix(code, dist)
    return TransitionModel(R, stationary(R))


def average_code_length(code: AifvCode, dist: SourceDistribution) -> float:
    p = stationary(transition_matrix(code, dist))
    return math.fsum(float(pi) * L for pi, L in zip(p, code.tree_lengths(dist)))


def redundancy(code: AifvCode, dist: SourceDistribution) -> float:
    return average_code_length(code, dist) - entropy(dist)


@dataclass(frozen=True)
class RedundancyReport:
    tree_lengths: tuple
    stationary: tuple
    average_length: float
    entropy: float
    redundancy: float


def redundancy_report(code: AifvCode, dist: SourceDistribution) -> RedundancyReport:
    lengths = code.tree_lengths(dist)
    p = stationary(transition_matrix(code, dist))
    L = math.fsum(float(pi) * Li for pi, Li in zip(p, lengths))
    H = entropy(dist)
    return RedundancyReport(tuple(lengths), tuple(float(x) for x in p), L, H, L - H)
