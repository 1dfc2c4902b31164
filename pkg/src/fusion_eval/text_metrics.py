"""Exact-match accuracy for handwriting transcriptions and VQA answers."""
from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .core import EvalError, ScoreReport, SubmissionError, TaskKind


@dataclass(frozen=True)
class NormalizationPolicy:
    lowercase: bool = False
    strip_punctuation: bool = False
    collapse_whitespace: bool = False

    FLAGS = ("lowercase", "strip_punctuation", "collapse_whitespace")

    def __call__(self, text: str) -> str:
        return normalize(text, self)

    @classmethod
    def parse(cls, text: str) -> "NormalizationPolicy":
        """Build a policy from a comma-separated flag list, e.g. ``"lowercase,collapse_whitespace"``.

        ``"none"`` or an empty string disables every flag.
        """
        parts = [p.strip().replace("-", "_") for p in text.split(",") if p.strip()]
        if parts == ["none"]:
            parts = []
        unknown = [p for p in parts if p not in cls.FLAGS]
        if unknown:
            raise ValueError(f"unknown normalization flag(s) {unknown}; choose from {list(cls.FLAGS)}")
        return cls(**{p: True for p in parts})


HTR_POLICY = NormalizationPolicy(collapse_whitespace=True)
VQA_POLICY = NormalizationPolicy(lowercase=True, strip_punctuation=True, collapse_whitespace=True)


def _strip_punct(text: str) -> str:
    return "".join(ch for ch in text if not unicodedata.category(ch).startswith("P"))


def _one_pass(text: str, policy: NormalizationPolicy) -> str:
    out = unicodedata.normalize("NFC", text)
    if policy.lowercase:
        out = out.lower()
    if policy.strip_punctuation:
        out = _strip_punct(out)
    if policy.collapse_whitespace:
        out = " ".join(out.split())
    return unicodedata.normalize("NFC", out)


def normalize(text: str, policy: NormalizationPolicy) -> str:
    # Recomposition after lower()/punctuation removal can expose new work, so
    # iterate to a fixed point; real text settles after one pass.
    out = _one_pass(text, policy)
    for _ in range(8):
        nxt = _one_pass(out, policy)
        if nxt == out:
            break
        out = nxt
    return out


def _as_mapping(pairs: Mapping[str, str] | Iterable[tuple[str, str]]) -> dict[str, str]:
    return dict(pairs.items()) if isinstance(pairs, Mapping) else dict(pairs)


def htr_accuracy(gt: Mapping[str, str] | Iterable[tuple[str, str]],
                 pred: Mapping[str, str] | Iterable[tuple[str, str]],
                 policy: NormalizationPolicy = HTR_POLICY) -> ScoreReport:
    """String accuracy: fraction of ids whose transcription equals the ground truth."""
    gt_map = _as_mapping(gt)
    pred_map = _as_mapping(pred)
    if not gt_map:
        raise EvalError("HTR ground truth is empty")
    per_sample = []
    warnings = []
    missing = 0
    for sid in sorted(gt_map):
        if sid not in pred_map:
            missing += 1
            per_sample.append((sid, 0.0))
            continue
        hit = normalize(pred_map[sid], policy) == normalize(gt_map[sid], policy)
        per_sample.append((sid, 1.0 if hit else 0.0))
    if missing:
        warnings.append(f"{missing} ground-truth id(s) without prediction scored as wrong")
    extra = len(set(pred_map) - set(gt_map))
    if extra:
        warnings.append(f"{extra} prediction id(s) not in ground truth ignored")
    correct = sum(v for _, v in per_sample)
    return ScoreReport(TaskKind.HTR, correct / len(per_sample), len(per_sample), tuple(per_sample),
                       tuple(warnings), {"correct": int(correct), "missing": missing})


def vqa_accuracy(gt: Mapping[str, Sequence[str]] | Iterable[tuple[str, Sequence[str]]],
                 pred: Mapping[str, str] | Iterable[tuple[str, str]],
                 policy: NormalizationPolicy = VQA_POLICY) -> ScoreReport:
    """A prediction is correct when it matches at least one accepted answer."""
    gt_map = dict(gt.items()) if isinstance(gt, Mapping) else dict(gt)
    pred_map = _as_mapping(pred)
    if not gt_map:
        raise EvalError("VQA ground truth is empty")
    per_sample = []
    missing = 0
    for sid in sorted(gt_map):
        answers = gt_map[sid]
        if not answers:
            raise SubmissionError(f"VQA ground truth {sid!r} has an empty answer list", field="answers")
        if sid not in pred_map:
            missing += 1
            per_sample.append((sid, 0.0))
            continue
        guess = normalize(pred_map[sid], policy)
        hit = any(guess == normalize(a, policy) for a in answers)
        per_sample.append((sid, 1.0 if hit else 0.0))
    warnings = []
    if missing:
        warnings.append(f"{missing} ground-truth id(s) without prediction scored as wrong")
    extra = len(set(pred_map) - set(gt_map))
    if extra:
        warnings.append(f"{extra} prediction id(s) not in ground truth ignored")
    correct = sum(v for _, v in per_sample)
    return ScoreReport(TaskKind.VQA, correct / len(per_sample), len(per_sample), tuple(per_sample),
                       tuple(warnings), {"correct": int(correct), "missing": missing})
