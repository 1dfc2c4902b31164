"""Zero-shot detection scoring: IoU, per-label TP/FP/FN counting, micro F1."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Iterable, Sequence

import numpy as np

from .core import BBox, EvalError, ScoreReport, TaskKind

MATCHING_MODES = ("one_to_one", "greedy", "literal")


@dataclass(frozen=True)
class DetectionCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    def __add__(self, other: "DetectionCounts") -> "DetectionCounts":
        return DetectionCounts(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn)

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if self.tp else 0.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp else 0.0

    @property
    def f1(self) -> float:
        # 2PR/(P+R) rewritten over counts; exact for the rational inputs and 0 when tp == 0
        if self.tp == 0:
            return 0.0
        return 2 * self.tp / (2 * self.tp + self.fp + self.fn)


@dataclass(frozen=True)
class LabelEvalConfig:
    """Matching rules for one (image, label) pair.

    ``one_to_one`` pairs each gt box with at most one prediction and maximises the
    number of pairs above the threshold (ties broken toward higher total IoU).
    ``greedy`` is the cheaper descending-IoU variant, which can undercount on
    overlapping ground truth. ``literal`` counts every prediction that clears the
    threshold against any gt box, so stacked duplicates all count as hits.
    """

    iou_threshold: float = 0.5
    matching_mode: str = "one_to_one"

    def __post_init__(self) -> None:
        if not (0.0 < self.iou_threshold < 1.0):
            raise ValueError(f"iou_threshold must lie in (0, 1), got {self.iou_threshold}")
        mode = self.matching_mode.replace("-", "_")
        if mode not in MATCHING_MODES:
            raise ValueError(f"matching_mode must be one of {MATCHING_MODES}, got {self.matching_mode!r}")
        object.__setattr__(self, "matching_mode", mode)


def _coords(b: BBox | Sequence[float]) -> tuple[float, float, float, float]:
    return b.as_tuple() if isinstance(b, BBox) else tuple(float(v) for v in b[:4])


def iou(a: BBox | Sequence[float], b: BBox | Sequence[float]) -> float:
    ax1, ay1, ax2, ay2 = _coords(a)
    bx1, by1, bx2, by2 = _coords(b)
    iw = min(ax2, bx2) - max(ax1, bx1)
    ih = min(ay2, by2) - max(ay1, by1)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    union = (ax2 - ax1) * (ay2 - ay1) + (bx2 - bx1) * (by2 - by1) - inter
    if union <= 0:
        return 0.0
    return min(1.0, inter / union)


def iou_matrix(gt: Sequence[BBox], pred: Sequence[BBox]) -> np.ndarray:
    """IoU for every (gt, pred) pair, shape (len(gt), len(pred))."""
    if not gt or not pred:
        return np.zeros((len(gt), len(pred)))
    g = np.array([_coords(b) for b in gt], dtype=float)
    p = np.array([_coords(b) for b in pred], dtype=float)
    iw = np.minimum(g[:, None, 2], p[None, :, 2]) - np.maximum(g[:, None, 0], p[None, :, 0])
    ih = np.minimum(g[:, None, 3], p[None, :, 3]) - np.maximum(g[:, None, 1], p[None, :, 1])
    inter = np.where((iw > 0) & (ih > 0), iw * ih, 0.0)
    ga = (g[:, 2] - g[:, 0]) * (g[:, 3] - g[:, 1])
    pa = (p[:, 2] - p[:, 0]) * (p[:, 3] - p[:, 1])
    union = ga[:, None] + pa[None, :] - inter
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(union > 0, inter / union, 0.0)
    return np.clip(out, 0.0, 1.0)


def _max_matching(adj: np.ndarray, weight: np.ndarray) -> int:
    """Size of a maximum-cardinality matching on the boolean (gt x pred) graph.

    Uses the assignment solver with a big-M reward per edge, so among maximum
    matchings the one with largest total IoU is chosen; only the size is needed here.
    """
    from .kernels.assignment import assign

    m, n = adj.shape
    if m == 0 or n == 0 or not adj.any():
        return 0
    big = float(m + n + 1)
    reward = np.where(adj, big + weight, 0.0)
    if m <= n:
        cols = assign(-reward)
        return int(sum(adj[i, j] for i, j in enumerate(cols)))
    rows = assign(-reward.T)
    return int(sum(adj[i, j] for j, i in enumerate(rows)))


def _greedy_matching(ious: np.ndarray, thr: float) -> int:
    pairs = [(-ious[g, p], p, g) for g in range(ious.shape[0]) for p in range(ious.shape[1])
             if ious[g, p] > thr]
    pairs.sort()
    used_g: set[int] = set()
    used_p: set[int] = set()
    for _, p, g in pairs:
        if g in used_g or p in used_p:
            continue
        used_g.add(g)
        used_p.add(p)
    return len(used_g)


def match_label(gt_boxes: Sequence[BBox], pred_boxes: Sequence[BBox],
                cfg: LabelEvalConfig | None = None) -> DetectionCounts:
    cfg = cfg or LabelEvalConfig()
    if not gt_boxes:
        return DetectionCounts(0, len(pred_boxes), 0)
    if not pred_boxes:
        return DetectionCounts(0, 0, len(gt_boxes))
    ious = iou_matrix(gt_boxes, pred_boxes)
    hits = ious > cfg.iou_threshold
    if cfg.matching_mode == "literal":
        tp = int(hits.any(axis=0).sum())
        covered = int(hits.any(axis=1).sum())
        return DetectionCounts(tp, len(pred_boxes) - tp, len(gt_boxes) - covered)
    if cfg.matching_mode == "greedy":
        tp = _greedy_matching(ious, cfg.iou_threshold)
    else:
        tp = _max_matching(hits, ious)
    return DetectionCounts(tp, len(pred_boxes) - tp, len(gt_boxes) - tp)


def _index_queries(record: dict[str, Any] | None) -> dict[str, list[BBox]]:
    if record is None:
        return {}
    out = {}
    for q in record["queries"]:
        out[q["label"]] = [b if isinstance(b, BBox) else BBox.from_list(b, allow_score=True)
                           for b in q["boxes"]]
    return out


def image_counts(gt_record: dict[str, Any], pred_record: dict[str, Any] | None,
                 cfg: LabelEvalConfig | None = None) -> tuple[DetectionCounts, int]:
    """Counts for one image; second value is the number of predicted labels not queried."""
    gt_q = _index_queries(gt_record)
    pred_q = _index_queries(pred_record)
    total = DetectionCounts()
    for label, gt_boxes in gt_q.items():
        total = total + match_label(gt_boxes, pred_q.get(label, []), cfg)
    return total, len(set(pred_q) - set(gt_q))


def f1_dataset(samples: Iterable[tuple[dict[str, Any], dict[str, Any] | None]],
               cfg: LabelEvalConfig | None = None) -> ScoreReport:
    """Micro-averaged F1 over every (image, label) pair.

    ``samples`` yields ``(gt_record, pred_record)``; a ``None`` prediction means the
    model returned nothing for that image, i.e. empty lists for every label.
    """
    cfg = cfg or LabelEvalConfig()
    total = DetectionCounts()
    per_sample = []
    missing = 0
    unqueried = 0
    for gt_rec, pred_rec in samples:
        if pred_rec is None:
            missing += 1
        counts, extra = image_counts(gt_rec, pred_rec, cfg)
        unqueried += extra
        total = total + counts
        per_sample.append((gt_rec["image_id"], counts.f1))
    if not per_sample:
        raise EvalError("ZsOD dataset is empty")
    per_sample.sort(key=lambda kv: kv[0])
    warnings = []
    if missing:
        warnings.append(f"{missing} image(s) without prediction scored as empty predictions")
    if unqueried:
        warnings.append(f"{unqueried} predicted label(s) not present in the queries ignored")
    details = {"tp": total.tp, "fp": total.fp, "fn": total.fn,
               "precision": total.precision, "recall": total.recall,
               "iou_threshold": cfg.iou_threshold, "matching": cfg.matching_mode}
    return ScoreReport(TaskKind.ZSOD, total.f1, len(per_sample), tuple(per_sample), tuple(warnings), details)
