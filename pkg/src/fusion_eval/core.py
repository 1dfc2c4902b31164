"""Shared domain types, submission schemas and score aggregation."""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable


class TaskKind(str, enum.Enum):
    C2C = "c2c"
    HTR = "htr"
    ZSOD = "zsod"
    VQA = "vqa"

    @classmethod
    def parse(cls, value: "str | TaskKind") -> "TaskKind":
        if isinstance(value, TaskKind):
            return value
        key = str(value).strip().lower()
        for member in cls:
            if member.value == key or member.name.lower() == key:
                return member
        raise ValueError(f"unknown task {value!r}; expected one of c2c, htr, zsod, vqa")


class EvalError(Exception):
    """Base class for every error raised while validating or scoring."""


class SubmissionError(EvalError):
    """A submission file violates its schema.

    ``line`` is 1-based when the problem can be pinned to a line, ``field`` names
    the offending key when one is known.
    """

    def __init__(self, message: str, *, path: str | None = None, line: int | None = None,
                 field: str | None = None):
        self.path = path
        self.line = line
        self.field = field
        where = []
        if path is not None:
            where.append(str(path))
        if line is not None:
            where.append(f"line {line}")
        prefix = ":".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class ParseError(SubmissionError):
    pass


class DuplicateIdError(SubmissionError):
    def __init__(self, record_id: str, **kwargs: Any):
        self.record_id = record_id
        super().__init__(f"duplicate id {record_id!r}", **kwargs)


class BoxError(SubmissionError):
    pass


class ScoreRangeError(EvalError, ValueError):
    pass


@dataclass(frozen=True)
class BBox:
    """Axis-aligned box in absolute-pixel corner form."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self) -> None:
        coords = (self.x_min, self.y_min, self.x_max, self.y_max)
        if not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in coords):
            raise BoxError(f"box coordinates must be numbers, got {coords}")
        if not all(math.isfinite(c) for c in coords):
            raise BoxError(f"box coordinates must be finite, got {coords}")
        if min(coords) < 0:
            raise BoxError(f"box coordinates must be non-negative, got {coords}")
        if self.x_min > self.x_max or self.y_min > self.y_max:
            raise BoxError(f"box violates x_min<=x_max, y_min<=y_max: {coords}")

    @property
    def area(self) -> float:
        return (self.x_max - self.x_min) * (self.y_max - self.y_min)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x_min, self.y_min, self.x_max, self.y_max)

    @classmethod
    def from_list(cls, values: Iterable[Any], *, allow_score: bool = False) -> "BBox":
        vals = list(values)
        if len(vals) == 5 and allow_score:
            vals = vals[:4]
        if len(vals) != 4:
            raise BoxError(f"box must have 4 coordinates{' (+ optional score)' if allow_score else ''}, "
                           f"got {len(vals)} values")
        return cls(*vals)


@dataclass(frozen=True)
class ScoreReport:
    task: TaskKind
    score: float
    sample_count: int
    per_sample: tuple[tuple[str, float], ...] = ()
    warnings: tuple[str, ...] = ()
    details: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not (0.0 <= self.score <= 1.0):
            raise ScoreRangeError(f"score {self.score} outside [0, 1]")
        if self.sample_count < 1:
            raise EvalError("a score report needs at least one sample")

    def to_dict(self, digits: int | None = 3) -> dict[str, Any]:
        rnd = (lambda v: round(v, digits)) if digits is not None else (lambda v: v)
        return {
            "task": self.task.value,
            "score": rnd(self.score),
            "sample_count": self.sample_count,
            "warnings": list(self.warnings),
            "details": self.details,
            "per_sample": [[sid, rnd(v)] for sid, v in self.per_sample],
        }


TASK_ORDER = (TaskKind.C2C, TaskKind.HTR, TaskKind.ZSOD, TaskKind.VQA)


@dataclass(frozen=True)
class OverallScore:
    c2c: float
    htr: float
    zsod: float
    vqa: float
    missing: tuple[TaskKind, ...] = ()

    @property
    def total(self) -> float:
        return self.c2c + self.htr + self.zsod + self.vqa

    def component(self, task: TaskKind) -> float:
        return getattr(self, TaskKind.parse(task).value)

    def to_dict(self, digits: int | None = 3) -> dict[str, Any]:
        rnd = (lambda v: round(v, digits)) if digits is not None else (lambda v: v)
        out: dict[str, Any] = {t.value: rnd(self.component(t)) for t in TASK_ORDER}
        out["total"] = rnd(self.total)
        out["missing"] = [t.value for t in self.missing]
        return out


def overall(c2c: float, htr: float, zsod: float, vqa: float,
            missing: Iterable[TaskKind | str] = ()) -> OverallScore:
    """Sum the four unit-interval task scores into the competition total.

    Inputs must already be on the 0-1 scale; percent-scale CodeBLEU is converted
    by the caller (see ``to_unit_scale``).
    """
    for name, value in (("c2c", c2c), ("htr", htr), ("zsod", zsod), ("vqa", vqa)):
        if not isinstance(value, (int, float)) or not (0.0 <= value <= 1.0):
            raise ScoreRangeError(f"{name} score {value!r} outside [0, 1]")
    return OverallScore(float(c2c), float(htr), float(zsod), float(vqa),
                        tuple(TaskKind.parse(m) for m in missing))


def to_unit_scale(percent: float) -> float:
    if not (0.0 <= percent <= 100.0):
        raise ScoreRangeError(f"percent-scale score {percent!r} outside [0, 100]")
    return percent * 0.01


# --- submission loading -----------------------------------------------------

# (key, expected python type, description) per task and side.
_SCHEMAS: dict[tuple[TaskKind, str], dict[str, str]] = {
    (TaskKind.C2C, "gt"): {"id": "str", "java": "str", "python": "str_list"},
    (TaskKind.C2C, "pred"): {"id": "str", "python": "str"},
    (TaskKind.HTR, "gt"): {"id": "str", "text": "str"},
    (TaskKind.HTR, "pred"): {"id": "str", "text": "str"},
    (TaskKind.ZSOD, "gt"): {"image_id": "str", "queries": "queries"},
    (TaskKind.ZSOD, "pred"): {"image_id": "str", "queries": "queries"},
    (TaskKind.VQA, "gt"): {"id": "str", "question": "str", "answers": "str_list"},
    (TaskKind.VQA, "pred"): {"id": "str", "answer": "str"},
}


def record_id(task: TaskKind, record: dict[str, Any]) -> str:
    return record["image_id"] if task is TaskKind.ZSOD else record["id"]


def _check_queries(value: Any, side: str, err) -> list[dict[str, Any]]:
    if not isinstance(value, list):
        raise err("queries", "must be a list")
    out = []
    labels = set()
    for qi, q in enumerate(value):
        if not isinstance(q, dict) or set(q) != {"label", "boxes"}:
            raise err(f"queries[{qi}]", "must be an object with exactly 'label' and 'boxes'")
        if not isinstance(q["label"], str):
            raise err(f"queries[{qi}].label", "must be a string")
        if q["label"] in labels:
            raise err(f"queries[{qi}].label", f"label {q['label']!r} repeated")
        labels.add(q["label"])
        if not isinstance(q["boxes"], list):
            raise err(f"queries[{qi}].boxes", "must be a list")
        boxes = []
        for bi, raw in enumerate(q["boxes"]):
            if not isinstance(raw, list):
                raise err(f"queries[{qi}].boxes[{bi}]", "must be a list of numbers")
            try:
                boxes.append(BBox.from_list(raw, allow_score=(side == "pred")))
            except BoxError as exc:
                raise err(f"queries[{qi}].boxes[{bi}]", str(exc), cls=BoxError) from None
        out.append({"label": q["label"], "boxes": boxes})
    return out


def validate_record(task: TaskKind, side: str, record: Any, *, path: str | None = None,
                    line: int | None = None) -> dict[str, Any]:
    """Check one decoded JSON object against the task schema and normalise it.

    ZsOD boxes come back as ``BBox`` instances; everything else is passed through.
    """
    task = TaskKind.parse(task)
    if side not in ("gt", "pred"):
        raise ValueError("side must be 'gt' or 'pred'")

    def err(fld: str, msg: str, cls=SubmissionError):
        return cls(f"field {fld!r}: {msg}", path=path, line=line, field=fld)

    if not isinstance(record, dict):
        raise SubmissionError("record must be a JSON object", path=path, line=line)
    schema = _SCHEMAS[(task, side)]
    missing = [k for k in schema if k not in record]
    if missing:
        raise err(missing[0], "missing")
    extra = sorted(set(record) - set(schema))
    if extra:
        raise err(extra[0], "unexpected field")
    out = dict(record)
    for key, kind in schema.items():
        value = record[key]
        if kind == "str":
            if not isinstance(value, str):
                raise err(key, "must be a string")
        elif kind == "str_list":
            if not isinstance(value, list) or not value or not all(isinstance(v, str) for v in value):
                raise err(key, "must be a non-empty list of strings")
        elif kind == "queries":
            out[key] = _check_queries(value, side, err)
    return out


def load_submission(path: str | Path, task: TaskKind | str, side: str = "pred") -> list[dict[str, Any]]:
    """Read a JSONL file and validate every record for ``task``.

    Blank lines are skipped. Ids must be unique within the file.
    """
    task = TaskKind.parse(task)
    path = Path(path)
    records: list[dict[str, Any]] = []
    seen: set[str] = set()
    with path.open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            if not raw.strip():
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise ParseError(f"malformed JSON: {exc.msg}", path=str(path), line=lineno) from None
            rec = validate_record(task, side, obj, path=str(path), line=lineno)
            rid = record_id(task, rec)
            if rid in seen:
                raise DuplicateIdError(rid, path=str(path), line=lineno)
            seen.add(rid)
            records.append(rec)
    return records
