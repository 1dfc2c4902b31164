"""Deterministic scoring for a four-task multimodal benchmark, plus baseline head kernels."""
from .core import (TASK_ORDER, BBox, EvalError, OverallScore, ScoreReport, SubmissionError, TaskKind,
                   load_submission, overall, to_unit_scale)

__version__ = "0.1.0"

__all__ = [
    "TASK_ORDER", "BBox", "EvalError", "OverallScore", "ScoreReport", "SubmissionError", "TaskKind",
    "load_submission", "overall", "to_unit_scale", "__version__",
]
