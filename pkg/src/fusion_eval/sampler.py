"""Task-balanced sampling for fused multi-task training.

Each task's weight is its share of the total exposure (batch size times steps)
it received when trained alone, so that fused training passes every task's
data through the model as often as single-task training did.
"""
from __future__ import annotations

import bisect
import itertools
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Mapping

import numpy as np

from .core import TaskKind

STREAM_VERSION = "pcg64-invcdf-v1"
_UNIT = 2.0 ** -53


@dataclass(frozen=True)
class TrainBudget:
    task: TaskKind
    batch_size: int
    steps: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "task", TaskKind.parse(self.task))
        for name in ("batch_size", "steps"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int) or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")

    @property
    def exposure(self) -> int:
        return self.batch_size * self.steps


class TaskWeights(Mapping[TaskKind, float]):
    """Immutable task -> probability map; weights are positive and sum to 1."""

    def __init__(self, weights: Mapping[TaskKind | str, float]):
        items = {TaskKind.parse(k): float(v) for k, v in weights.items()}
        if not items:
            raise ValueError("no task weights")
        if any(not np.isfinite(v) or v <= 0 for v in items.values()):
            raise ValueError("task weights must be positive")
        if abs(sum(items.values()) - 1.0) > 1e-9:
            raise ValueError(f"task weights sum to {sum(items.values())}, expected 1")
        order = {t: i for i, t in enumerate(TaskKind)}
        self._items = dict(sorted(items.items(), key=lambda kv: order[kv[0]]))

    def __getitem__(self, key: TaskKind | str) -> float:
        return self._items[TaskKind.parse(key)]

    def __iter__(self) -> Iterator[TaskKind]:
        return iter(self._items)

    def __len__(self) -> int:
        return len(self._items)

    def __repr__(self) -> str:
        return f"TaskWeights({ {t.value: w for t, w in self._items.items()} })"

    def rounded(self, digits: int = 2) -> dict[str, float]:
        return {t.value: round(w, digits) for t, w in self._items.items()}

    def to_dict(self) -> dict[str, float]:
        return {t.value: w for t, w in self._items.items()}


def derive_weights(budgets: Iterable[TrainBudget]) -> TaskWeights:
    budgets = list(budgets)
    if len(budgets) < 2:
        raise ValueError("at least two task budgets are required")
    tasks = [b.task for b in budgets]
    if len(set(tasks)) != len(tasks):
        dup = next(t for t in tasks if tasks.count(t) > 1)
        raise ValueError(f"duplicate budget for task {dup.value}")
    total = sum(b.exposure for b in budgets)
    weights = {b.task: b.exposure / total for b in budgets}
    # absorb the float residue into the largest weight so the sum is exact enough
    drift = 1.0 - sum(weights.values())
    top = max(weights, key=weights.get)
    weights[top] += drift
    return TaskWeights(weights)


def sample_stream(weights: Mapping[TaskKind | str, float], seed: int, n: int) -> list[TaskKind]:
    """Draw ``n`` i.i.d. task tags.

    Uniforms come from the top 53 bits of PCG64 raw output and are mapped
    through the cumulative weights in task order, so the sequence depends only
    on (weights, seed, n) and the numpy PCG64 bit stream.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    w = weights if isinstance(weights, TaskWeights) else TaskWeights(weights)
    tasks = list(w)
    cdf = list(itertools.accumulate(w[t] for t in tasks))
    cdf[-1] = 1.0
    raw = np.random.PCG64(seed).random_raw(n)
    out = []
    for r in raw.tolist():
        u = (r >> 11) * _UNIT
        out.append(tasks[min(bisect.bisect_right(cdf, u), len(tasks) - 1)])
    return out


def load_budgets(path: str | Path) -> list[TrainBudget]:
    """Budgets from JSON: either a list of objects or a task -> {batch_size, steps} map."""
    data = json.loads(Path(path).read_text("utf-8"))
    if isinstance(data, dict):
        data = [{"task": k, **v} for k, v in data.items()]
    return [TrainBudget(TaskKind.parse(d["task"]), d["batch_size"], d["steps"]) for d in data]


# single-task budgets (batch size, steps) from the published training runs
SINGLE_TASK_BUDGETS = (
    TrainBudget(TaskKind.C2C, 8, 69264),
    TrainBudget(TaskKind.HTR, 32, 70305),
    TrainBudget(TaskKind.ZSOD, 64, 119510),
    TrainBudget(TaskKind.VQA, 64, 32500),
)
