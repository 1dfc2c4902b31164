"""CTC loss by log-space forward-backward, with the exact gradient.

Inputs are time-major log-probabilities ``lp`` of shape (T, V). The gradient is
taken with respect to ``lp`` entries treated as independent variables, which is
what a caller gets when ``lp`` is the output of a log-softmax layer and the
softmax Jacobian is applied afterward.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

NEG_INF = -np.inf


class CTCInfeasibleError(ValueError):
    """The label sequence cannot be emitted in T frames."""


def _logaddexp3(a: float, b: float, c: float) -> float:
    m = max(a, b, c)
    if m == NEG_INF:
        return NEG_INF
    return m + np.log(np.exp(a - m) + np.exp(b - m) + np.exp(c - m))


def min_frames(labels: Sequence[int]) -> int:
    """Fewest frames that can emit ``labels``: one per label plus a blank between repeats."""
    repeats = sum(1 for a, b in zip(labels, labels[1:]) if a == b)
    return len(labels) + repeats


def _extended(labels: Sequence[int], blank: int) -> list[int]:
    ext = [blank]
    for lab in labels:
        ext.extend((lab, blank))
    return ext


def _check(lp: np.ndarray, labels: Sequence[int], blank: int) -> None:
    if lp.ndim != 2:
        raise ValueError(f"log-probabilities must be (T, V), got shape {lp.shape}")
    T, V = lp.shape
    if T < 1:
        raise ValueError("need at least one frame")
    if not 0 <= blank < V:
        raise ValueError(f"blank index {blank} outside vocabulary of size {V}")
    for lab in labels:
        if lab == blank:
            raise ValueError("labels must not contain the blank symbol")
        if not 0 <= lab < V:
            raise ValueError(f"label {lab} outside vocabulary of size {V}")
    need = min_frames(labels)
    if need > T:
        raise CTCInfeasibleError(f"label sequence needs at least {need} frames, got T={T}")


def ctc_forward_backward(lp, labels: Sequence[int], blank: int = 0):
    """Return ``(log_alpha, log_beta, ext)``; both tables are (T, 2L+1).

    ``log_alpha[t, s]`` and ``log_beta[t, s]`` both include the emission at ``t``.
    """
    lp = np.asarray(lp, dtype=float)
    labels = [int(x) for x in labels]
    _check(lp, labels, blank)
    T = lp.shape[0]
    ext = _extended(labels, blank)
    S = len(ext)
    la = np.full((T, S), NEG_INF)
    lb = np.full((T, S), NEG_INF)

    la[0, 0] = lp[0, blank]
    if S > 1:
        la[0, 1] = lp[0, ext[1]]
    for t in range(1, T):
        for s in range(S):
            a = la[t - 1, s]
            b = la[t - 1, s - 1] if s >= 1 else NEG_INF
            c = la[t - 1, s - 2] if s >= 2 and ext[s] != blank and ext[s] != ext[s - 2] else NEG_INF
            acc = _logaddexp3(a, b, c)
            if acc != NEG_INF:
                la[t, s] = acc + lp[t, ext[s]]

    lb[T - 1, S - 1] = lp[T - 1, ext[S - 1]]
    if S > 1:
        lb[T - 1, S - 2] = lp[T - 1, ext[S - 2]]
    for t in range(T - 2, -1, -1):
        for s in range(S):
            a = lb[t + 1, s]
            b = lb[t + 1, s + 1] if s + 1 < S else NEG_INF
            c = lb[t + 1, s + 2] if s + 2 < S and ext[s] != blank and ext[s] != ext[s + 2] else NEG_INF
            acc = _logaddexp3(a, b, c)
            if acc != NEG_INF:
                lb[t, s] = acc + lp[t, ext[s]]
    return la, lb, ext


def ctc_loss(lp, labels: Sequence[int], blank: int = 0) -> tuple[float, np.ndarray]:
    """Negative log-likelihood of ``labels`` and its gradient with respect to ``lp``."""
    lp = np.asarray(lp, dtype=float)
    la, lb, ext = ctc_forward_backward(lp, labels, blank)
    T, V = lp.shape
    S = len(ext)
    tail = [la[T - 1, S - 1]] + ([la[T - 1, S - 2]] if S > 1 else [])
    log_like = np.logaddexp.reduce(tail)
    if log_like == NEG_INF:
        raise CTCInfeasibleError("every alignment has zero probability")

    # Paths through (t, s) have total mass alpha*beta/y; summing per symbol gives the
    # mass of paths emitting k at t, which is dP/dlp[t, k].
    grad = np.zeros((T, V))
    occ = la + lb - lp[:, ext]
    for k in set(ext):
        cols = [s for s, sym in enumerate(ext) if sym == k]
        mass = np.logaddexp.reduce(occ[:, cols], axis=1)
        grad[:, k] = -np.exp(mass - log_like)
    return float(-log_like), grad


def ctc_greedy_decode(lp, blank: int = 0) -> list[int]:
    best = np.argmax(np.asarray(lp), axis=1)
    out = []
    prev = None
    for sym in best:
        sym = int(sym)
        if sym != prev and sym != blank:
            out.append(sym)
        prev = sym
    return out
