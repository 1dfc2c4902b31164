"""Brute-force reference computations for the kernels.

Each oracle uses a different algorithm from the code it checks: full path or
permutation enumeration, central finite differences, exhaustive matching.
"""
from __future__ import annotations

import itertools
from typing import Callable, Sequence

import numpy as np


def ctc_collapse(path: Sequence[int], blank: int = 0) -> tuple[int, ...]:
    out = []
    prev = None
    for sym in path:
        if sym != prev and sym != blank:
            out.append(sym)
        prev = sym
    return tuple(out)


def ctc_loss_enumerate(lp, labels: Sequence[int], blank: int = 0) -> float:
    """-log of the summed probability of every length-T path collapsing to ``labels``."""
    lp = np.asarray(lp, dtype=float)
    T, V = lp.shape
    target = tuple(labels)
    logs = []
    for path in itertools.product(range(V), repeat=T):
        if ctc_collapse(path, blank) == target:
            logs.append(sum(lp[t, k] for t, k in enumerate(path)))
    if not logs:
        return float("inf")
    return float(-np.logaddexp.reduce(logs))


def assignment_enumerate(cost) -> tuple[float, tuple[int, ...]]:
    """Minimum total cost over every injection of rows into columns (row-order sum)."""
    c = np.asarray(cost, dtype=float)
    m, n = c.shape
    best = (float("inf"), ())
    for cols in itertools.permutations(range(n), m):
        total = 0.0
        for i, j in enumerate(cols):
            total += float(c[i, j])
        if total < best[0]:
            best = (total, cols)
    return best


def max_matching_enumerate(adj) -> int:
    """Largest number of disjoint edges in a small bipartite graph, by exhaustive search."""
    adj = np.asarray(adj, dtype=bool)
    m, n = adj.shape
    if m > n:
        adj = adj.T
        m, n = n, m
    best = 0
    for k in range(m, 0, -1):
        for rows in itertools.combinations(range(m), k):
            for cols in itertools.permutations(range(n), k):
                if all(adj[r, c] for r, c in zip(rows, cols)):
                    return k
    return best


def central_difference(f: Callable[[np.ndarray], float], x, h: float = 1e-6) -> np.ndarray:
    x = np.array(x, dtype=float)
    g = np.zeros_like(x)
    flat = x.reshape(-1)
    gflat = g.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        up = f(x)
        flat[i] = orig - h
        down = f(x)
        flat[i] = orig
        gflat[i] = (up - down) / (2 * h)
    return g


def relative_error(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    denom = max(np.linalg.norm(b), np.linalg.norm(a), 1e-12)
    return float(np.linalg.norm(a - b) / denom)
