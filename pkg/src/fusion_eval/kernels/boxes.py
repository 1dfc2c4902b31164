"""Box-head mathematics: GIoU with gradients, matching cost, and the head loss.

Box predictions are rows ``(cx, cy, w, h, score)`` with coordinates normalised to
[0, 1]. Ground truth uses the same ``(cx, cy, w, h)`` layout. GIoU itself works
on corner boxes ``(x1, y1, x2, y2)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .assignment import assign

NUM_BOX_QUERIES = 12
BCE_EPS = 1e-7


def _span(a1: float, a2: float, b1: float, b2: float):
    """Overlap and enclosing length of two intervals plus their partials.

    Returns ``(overlap, d_overlap, hull, d_hull)`` where the gradients are
    4-vectors over ``(a1, a2, b1, b2)``. Ties pick the first argument, so the
    gradient is a valid one-sided derivative at kinks.
    """
    d_ov = np.zeros(4)
    hi = min(a2, b2)
    lo = max(a1, b1)
    overlap = hi - lo
    if overlap > 0:
        d_ov[1 if a2 <= b2 else 3] += 1.0
        d_ov[0 if a1 >= b1 else 2] -= 1.0
    else:
        overlap = 0.0
    d_hull = np.zeros(4)
    hull = max(a2, b2) - min(a1, b1)
    d_hull[1 if a2 >= b2 else 3] += 1.0
    d_hull[0 if a1 <= b1 else 2] -= 1.0
    return overlap, d_ov, hull, d_hull


def giou(a: Sequence[float], b: Sequence[float]):
    """Generalised IoU of corner boxes and its gradient.

    Returns ``(value, grad_a, grad_b)``. When the enclosing box has zero area the
    value is 0 with zero gradients.
    """
    ax1, ay1, ax2, ay2 = (float(v) for v in a)
    bx1, by1, bx2, by2 = (float(v) for v in b)
    iw, d_iw, cw, d_cw = _span(ax1, ax2, bx1, bx2)
    ih, d_ih, ch, d_ch = _span(ay1, ay2, by1, by2)

    # Parameter order for gradients: (ax1, ay1, ax2, ay2, bx1, by1, bx2, by2).
    def lift(dx, dy):
        g = np.zeros(8)
        g[[0, 2, 4, 6]] += dx
        g[[1, 3, 5, 7]] += dy
        return g

    wa, ha = ax2 - ax1, ay2 - ay1
    wb, hb = bx2 - bx1, by2 - by1
    area_a, area_b = wa * ha, wb * hb
    d_area_a = np.array([-ha, -wa, ha, wa, 0, 0, 0, 0], dtype=float)
    d_area_b = np.array([0, 0, 0, 0, -hb, -wb, hb, wb], dtype=float)

    inter = iw * ih
    d_inter = lift(d_iw * ih, d_ih * iw)
    union = area_a + area_b - inter
    d_union = d_area_a + d_area_b - d_inter
    hull = cw * ch
    d_hull = lift(d_cw * ch, d_ch * cw)

    if hull <= 0:
        return 0.0, np.zeros(4), np.zeros(4)
    if union <= 0:
        # both boxes degenerate: IoU is 0 and the hull term alone remains
        val = -(hull - union) / hull
        g = d_union / hull - union * d_hull / hull ** 2
        return val, g[:4], g[4:]
    # hull >= union holds exactly; containment can round the difference to -1 ulp
    val = inter / union - max(hull - union, 0.0) / hull
    g = (d_inter / union - inter * d_union / union ** 2
         + d_union / hull - union * d_hull / hull ** 2)
    return val, g[:4], g[4:]


def giou_loss(a, b):
    val, ga, gb = giou(a, b)
    return 1.0 - val, -ga, -gb


def cxcywh_to_xyxy(box: Sequence[float]):
    """Convert one ``(cx, cy, w, h)`` box; also returns the 4x4 Jacobian d(xyxy)/d(cxcywh)."""
    cx, cy, w, h = (float(v) for v in box[:4])
    out = np.array([cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2])
    jac = np.array([
        [1, 0, -0.5, 0],
        [0, 1, 0, -0.5],
        [1, 0, 0.5, 0],
        [0, 1, 0, 0.5],
    ], dtype=float)
    return out, jac


def _iou_xyxy(a: np.ndarray, b: np.ndarray) -> float:
    iw = min(a[2], b[2]) - max(a[0], b[0])
    ih = min(a[3], b[3]) - max(a[1], b[1])
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    union = (a[2] - a[0]) * (a[3] - a[1]) + (b[2] - b[0]) * (b[3] - b[1]) - inter
    return inter / union if union > 0 else 0.0


def l1_box(a: Sequence[float], b: Sequence[float]) -> float:
    """Mean absolute difference over the four coordinates."""
    return float(np.mean(np.abs(np.asarray(a[:4], dtype=float) - np.asarray(b[:4], dtype=float))))


def _check_pred(pred) -> np.ndarray:
    p = np.asarray(pred, dtype=float)
    if p.ndim != 2 or p.shape[1] != 5:
        raise ValueError(f"box predictions must be (N, 5), got shape {p.shape}")
    if np.any(p[:, 2:4] < 0):
        raise ValueError("predicted widths and heights must be non-negative")
    return p


def _check_gt(gt) -> np.ndarray:
    g = np.asarray(gt, dtype=float).reshape(-1, 4) if np.size(gt) else np.zeros((0, 4))
    return g


def matching_cost(gt, pred, *, literal_sign: bool = False) -> np.ndarray:
    """Cost of pairing each gt box (rows) with each predicted box (columns).

    ``-IoU - score + L1`` by default. With ``literal_sign`` the overlap term keeps
    a plus sign, which rewards low overlap; kept only for comparison runs.
    """
    g = _check_gt(gt)
    p = _check_pred(pred)
    if g.shape[0] > p.shape[0]:
        raise ValueError(f"{g.shape[0]} ground-truth boxes exceed {p.shape[0]} predictions")
    sign = 1.0 if literal_sign else -1.0
    cost = np.zeros((g.shape[0], p.shape[0]))
    pxy = [cxcywh_to_xyxy(row)[0] for row in p]
    for i, grow in enumerate(g):
        gxy = cxcywh_to_xyxy(grow)[0]
        for j, prow in enumerate(p):
            cost[i, j] = sign * _iou_xyxy(gxy, pxy[j]) - prow[4] + l1_box(grow, prow)
    return cost


@dataclass(frozen=True)
class HeadLoss:
    loss: float
    grad: np.ndarray
    assignment: tuple[int, ...]
    giou_term: float
    l1_term: float
    bce_term: float


def bce(scores: np.ndarray, targets: np.ndarray, eps: float = BCE_EPS):
    """Mean binary cross-entropy with clamped probabilities, plus d/d(scores)."""
    p = np.clip(scores, eps, 1.0 - eps)
    vals = -(targets * np.log(p) + (1 - targets) * np.log(1 - p))
    inside = (scores > eps) & (scores < 1.0 - eps)
    dp = (-(targets / p) + (1 - targets) / (1 - p)) * inside / len(scores)
    return float(vals.mean()), dp


def detection_head_loss(gt, pred, *, assignment: Sequence[int] | None = None,
                        literal_sign: bool = False) -> HeadLoss:
    """Matched GIoU + L1 box losses plus score BCE, with gradient w.r.t. ``pred``.

    The matching is recomputed unless ``assignment`` is supplied; either way the
    gradient treats it as fixed.
    """
    g = _check_gt(gt)
    p = _check_pred(pred)
    if assignment is None:
        assignment = assign(matching_cost(g, p, literal_sign=literal_sign)) if len(g) else []
    assignment = tuple(int(j) for j in assignment)
    if len(assignment) != len(g) or len(set(assignment)) != len(assignment):
        raise ValueError("assignment must map each gt box to a distinct prediction")

    grad = np.zeros_like(p)
    giou_total = 0.0
    l1_total = 0.0
    for i, j in enumerate(assignment):
        gxy, _ = cxcywh_to_xyxy(g[i])
        pxy, jac = cxcywh_to_xyxy(p[j])
        loss, _, d_pxy = giou_loss(gxy, pxy)
        giou_total += loss
        grad[j, :4] += d_pxy @ jac
        diff = p[j, :4] - g[i]
        l1_total += float(np.mean(np.abs(diff)))
        grad[j, :4] += np.sign(diff) / 4.0

    targets = np.zeros(len(p))
    targets[list(assignment)] = 1.0
    bce_val, d_scores = bce(p[:, 4], targets)
    grad[:, 4] += d_scores
    total = giou_total + l1_total + bce_val
    return HeadLoss(total, grad, assignment, giou_total, l1_total, bce_val)
