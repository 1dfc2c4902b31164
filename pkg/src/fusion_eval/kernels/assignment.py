"""Rectangular minimum-cost assignment (Kuhn-Munkres with row potentials)."""
from __future__ import annotations

import numpy as np


class AssignmentError(ValueError):
    pass


def assign(cost) -> list[int]:
    """Return, for each row, the column it is assigned to.

    ``cost`` is an M x N matrix with M <= N. The result is the injection of rows
    into columns with minimal total cost. Runs the shortest-augmenting-path form
    of the Hungarian method, O(M^2 N).
    """
    c = np.asarray(cost, dtype=float)
    if c.ndim != 2:
        raise AssignmentError(f"cost matrix must be 2-D, got shape {c.shape}")
    m, n = c.shape
    if m > n:
        raise AssignmentError(f"more rows than columns ({m} > {n}); cannot assign every row")
    if not np.all(np.isfinite(c)):
        raise AssignmentError("cost matrix contains non-finite entries")
    if m == 0:
        return []

    # 1-based bookkeeping; index 0 is the virtual column used to start each search.
    u = np.zeros(m + 1)
    v = np.zeros(n + 1)
    owner = np.zeros(n + 1, dtype=int)   # owner[j] = row matched to column j (1-based), 0 if free
    way = np.zeros(n + 1, dtype=int)
    for i in range(1, m + 1):
        owner[0] = i
        j0 = 0
        minv = np.full(n + 1, np.inf)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = owner[j0]
            delta = np.inf
            j1 = -1
            for j in range(1, n + 1):
                if used[j]:
                    continue
                cur = c[i0 - 1, j - 1] - u[i0] - v[j]
                if cur < minv[j]:
                    minv[j] = cur
                    way[j] = j0
                if minv[j] < delta:
                    delta = minv[j]
                    j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[owner[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if owner[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            owner[j0] = owner[j1]
            j0 = j1

    result = [0] * m
    for j in range(1, n + 1):
        if owner[j]:
            result[owner[j] - 1] = j - 1
    return result


def assignment_cost(cost, cols) -> float:
    """Total cost of a row->column assignment, summed in row order."""
    c = np.asarray(cost, dtype=float)
    total = 0.0
    for i, j in enumerate(cols):
        total += float(c[i, j])
    return total
