"""Builders for ground-truth / prediction directories with controlled scores.

Each task's score is fixed by construction: a count of samples that are exactly
right mixed with samples that are exactly wrong, so the expected value is a
ratio of integers known in advance.
"""
from __future__ import annotations

import json
from pathlib import Path

# reference with def-use edges, so an empty hypothesis scores exactly 0 on every component
C2C_REF = "x = 1\ny = x"
C2C_JAVA = "int x = 1; int y = x;"


def write_jsonl(path: Path, rows) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")
    return path


def c2c_rows(hits: int, total: int):
    gt, pred = [], []
    for i in range(total):
        sid = f"c{i:04d}"
        gt.append({"id": sid, "java": C2C_JAVA, "python": [C2C_REF]})
        pred.append({"id": sid, "python": C2C_REF if i < hits else ""})
    return gt, pred


def htr_rows(hits: int, total: int):
    gt, pred = [], []
    for i in range(total):
        sid = f"h{i:04d}"
        gt.append({"id": sid, "text": f"строка {i}"})
        pred.append({"id": sid, "text": f"строка {i}" if i < hits else f"строка {i}x"})
    return gt, pred


def vqa_rows(hits: int, total: int):
    gt, pred = [], []
    for i in range(total):
        sid = f"q{i:04d}"
        gt.append({"id": sid, "question": f"what is {i}?", "answers": [f"thing {i}", f"item {i}"]})
        pred.append({"id": sid, "answer": f"Item {i}!" if i < hits else "nothing"})
    return gt, pred


def zsod_rows(tp: int, fn: int):
    """``tp`` single-box images predicted exactly; ``fn`` missed boxes, two per image."""
    assert fn % 2 == 0
    gt, pred = [], []
    box = [10.0, 10.0, 50.0, 40.0]
    for i in range(tp):
        iid = f"img{i:04d}"
        gt.append({"image_id": iid, "queries": [{"label": "cat", "boxes": [box]}]})
        pred.append({"image_id": iid, "queries": [{"label": "cat", "boxes": [box + [0.9]]}]})
    for i in range(fn // 2):
        iid = f"miss{i:04d}"
        gt.append({"image_id": iid, "queries": [{"label": "dog", "boxes": [box, [60.0, 60.0, 90.0, 95.0]]}]})
        pred.append({"image_id": iid, "queries": [{"label": "dog", "boxes": []}]})
    return gt, pred


def build_dirs(root: Path, c2c: int, htr: int, zsod_tp: int, zsod_fn: int, vqa: int,
               total: int = 1000, skip: tuple[str, ...] = ()) -> tuple[Path, Path]:
    """Write gt/ and pred/ under ``root``; ``skip`` omits those prediction files."""
    gt_dir, pred_dir = root / "gt", root / "pred"
    parts = {
        "c2c": c2c_rows(c2c, total),
        "htr": htr_rows(htr, total),
        "zsod": zsod_rows(zsod_tp, zsod_fn),
        "vqa": vqa_rows(vqa, total),
    }
    for name, (g, p) in parts.items():
        write_jsonl(gt_dir / f"{name}.jsonl", g)
        if name not in skip:
            write_jsonl(pred_dir / f"{name}.jsonl", p)
    pred_dir.mkdir(parents=True, exist_ok=True)
    return gt_dir, pred_dir


# component counts that land exactly on the published per-task scores
FUSION = dict(c2c=132, htr=587, zsod_tp=191, zsod_fn=1618, vqa=327)
SINGLE = dict(c2c=123, htr=533, zsod_tp=193, zsod_fn=1614, vqa=307)
