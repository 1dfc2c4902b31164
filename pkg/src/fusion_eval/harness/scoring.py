"""File-level scoring: one task from a gt/pred JSONL pair, and the four-task total."""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from ..codemetrics import LexError, codebleu, tokenize
from ..core import (TASK_ORDER, EvalError, OverallScore, ScoreReport, TaskKind, load_submission, overall,
                    record_id)
from ..detection_metrics import LabelEvalConfig, f1_dataset
from ..text_metrics import HTR_POLICY, VQA_POLICY, NormalizationPolicy, htr_accuracy, vqa_accuracy

log = logging.getLogger(__name__)

TASK_FILES = {t: f"{t.value}.jsonl" for t in TASK_ORDER}


@dataclass(frozen=True)
class ScoreOptions:
    iou_threshold: float = 0.5
    matching_mode: str = "one_to_one"
    htr_policy: NormalizationPolicy = HTR_POLICY
    vqa_policy: NormalizationPolicy = VQA_POLICY
    detection: LabelEvalConfig = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "detection", LabelEvalConfig(self.iou_threshold, self.matching_mode))


def _c2c(gt: list[dict], pred: list[dict]) -> ScoreReport:
    if not gt:
        raise EvalError("C2C ground truth is empty")
    hyps = {r["id"]: r["python"] for r in pred}
    per_sample = []
    sums = dict.fromkeys(("ngram", "weighted_ngram", "ast", "dataflow"), 0.0)
    missing = 0
    lex_failures = 0
    for rec in sorted(gt, key=lambda r: r["id"]):
        sid = rec["id"]
        if sid not in hyps:
            missing += 1
            per_sample.append((sid, 0.0))
            continue
        try:
            tokenize(hyps[sid], "python")
        except LexError:
            lex_failures += 1
            per_sample.append((sid, 0.0))
            continue
        try:
            res = codebleu(hyps[sid], rec["python"], "python")
        except LexError as exc:
            raise EvalError(f"C2C reference for {sid!r} does not tokenize: {exc}") from None
        for k, v in res.components.items():
            sums[k] += v
        per_sample.append((sid, res.total))
    n = len(per_sample)
    warnings = []
    if missing:
        warnings.append(f"{missing} ground-truth id(s) without prediction scored as 0")
    if lex_failures:
        warnings.append(f"{lex_failures} prediction(s) failed to tokenize and scored 0")
    extra = len(set(hyps) - {r["id"] for r in gt})
    if extra:
        warnings.append(f"{extra} prediction id(s) not in ground truth ignored")
    score = sum(v for _, v in per_sample) / n
    details = {"components": {k: v / n for k, v in sums.items()}, "missing": missing,
               "lex_failures": lex_failures}
    return ScoreReport(TaskKind.C2C, min(max(score, 0.0), 1.0), n, tuple(per_sample), tuple(warnings), details)


def score_records(task: TaskKind | str, gt: list[dict], pred: list[dict],
                  options: ScoreOptions | None = None) -> ScoreReport:
    """Score already-validated records."""
    task = TaskKind.parse(task)
    options = options or ScoreOptions()
    if task is TaskKind.C2C:
        return _c2c(gt, pred)
    if task is TaskKind.HTR:
        return htr_accuracy({r["id"]: r["text"] for r in gt}, {r["id"]: r["text"] for r in pred},
                            options.htr_policy)
    if task is TaskKind.VQA:
        return vqa_accuracy({r["id"]: r["answers"] for r in gt}, {r["id"]: r["answer"] for r in pred},
                            options.vqa_policy)
    by_id = {record_id(task, r): r for r in pred}
    report = f1_dataset(((g, by_id.get(g["image_id"])) for g in gt), options.detection)
    extra = len(set(by_id) - {g["image_id"] for g in gt})
    if extra:
        report = ScoreReport(report.task, report.score, report.sample_count, report.per_sample,
                             report.warnings + (f"{extra} prediction image(s) not in ground truth ignored",),
                             report.details)
    return report


def score_task(task: TaskKind | str, gt_path: str | Path, pred_path: str | Path,
               options: ScoreOptions | None = None) -> ScoreReport:
    task = TaskKind.parse(task)
    gt = load_submission(gt_path, task, "gt")
    pred = load_submission(pred_path, task, "pred")
    log.debug("scoring %s: %d gt, %d pred records", task.value, len(gt), len(pred))
    return score_records(task, gt, pred, options)


def score_overall(gt_dir: str | Path, pred_dir: str | Path, options: ScoreOptions | None = None,
                  *, parallel: bool = True) -> tuple[OverallScore, dict[TaskKind, ScoreReport]]:
    """Score every task found in ``pred_dir``; absent prediction files score 0 and are flagged."""
    gt_dir, pred_dir = Path(gt_dir), Path(pred_dir)
    for t in TASK_ORDER:
        if not (gt_dir / TASK_FILES[t]).is_file():
            raise EvalError(f"ground truth for {t.value} not found at {gt_dir / TASK_FILES[t]}")
    present = [t for t in TASK_ORDER if (pred_dir / TASK_FILES[t]).is_file()]
    missing = [t for t in TASK_ORDER if t not in present]

    def run(t):
        return score_task(t, gt_dir / TASK_FILES[t], pred_dir / TASK_FILES[t], options)

    if parallel and len(present) > 1:
        with ThreadPoolExecutor(max_workers=len(present)) as pool:
            results = list(pool.map(run, present))
    else:
        results = [run(t) for t in present]
    reports = dict(zip(present, results))
    scores = {t.value: (reports[t].score if t in reports else 0.0) for t in TASK_ORDER}
    return overall(missing=missing, **scores), reports
