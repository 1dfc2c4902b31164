"""Linear training-emissions estimate: GPUs x power x PUE x grid intensity x hours."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from importlib import resources
from pathlib import Path
from typing import NamedTuple, Sequence


@dataclass(frozen=True)
class HardwareProfile:
    gpu_count: int
    power_per_gpu: float      # kW
    pue: float
    carbon_intensity: float   # kg CO2eq per kWh
    name: str = ""
    version: int = 1

    def __post_init__(self) -> None:
        for field in ("gpu_count", "power_per_gpu", "pue", "carbon_intensity"):
            v = getattr(self, field)
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v) or v <= 0:
                raise ValueError(f"{field} must be positive, got {v!r}")
        if self.pue < 1:
            raise ValueError("pue must be at least 1")

    @property
    def kg_per_hour(self) -> float:
        return self.gpu_count * self.power_per_gpu * self.pue * self.carbon_intensity

    @classmethod
    def load(cls, path: str | Path) -> "HardwareProfile":
        return cls(**json.loads(Path(path).read_text("utf-8")))

    def to_dict(self) -> dict:
        return asdict(self)


def default_profile() -> HardwareProfile:
    """8x A100 profile whose rate matches the reported run table."""
    text = resources.files("fusion_eval").joinpath("data/a100x8.json").read_text("utf-8")
    return HardwareProfile(**json.loads(text))


@dataclass(frozen=True)
class RunRecord:
    label: str
    hours: float
    reported_co2: float | None = None

    def __post_init__(self) -> None:
        if not math.isfinite(self.hours) or self.hours <= 0:
            raise ValueError(f"run {self.label!r}: hours must be positive")


def estimate_co2(hours: float, profile: HardwareProfile) -> float:
    if not math.isfinite(hours) or hours <= 0:
        raise ValueError("hours must be positive")
    return profile.gpu_count * profile.power_per_gpu * profile.pue * profile.carbon_intensity * hours


class CoefficientFit(NamedTuple):
    coefficient: float
    max_relative_residual: float
    residuals: tuple[float, ...]


def fit_coefficient(runs: Sequence[RunRecord]) -> CoefficientFit:
    """Least-squares kg/h rate through the origin over runs with a reported value."""
    pts = [(r.hours, r.reported_co2) for r in runs if r.reported_co2 is not None]
    if len(pts) < 2:
        raise ValueError("need at least two runs with reported emissions")
    k = sum(h * c for h, c in pts) / sum(h * h for h, _ in pts)
    residuals = tuple(c - k * h for h, c in pts)
    rel = max(abs(res) / abs(c) if c else abs(res) for (_, c), res in zip(pts, residuals))
    return CoefficientFit(k, rel, residuals)


def load_runs(path: str | Path) -> list[RunRecord]:
    data = json.loads(Path(path).read_text("utf-8"))
    return [RunRecord(d.get("label", f"run{i}"), float(d["hours"]), d.get("reported_co2"))
            for i, d in enumerate(data)]


# (label, hours, reported kg CO2eq) from the published run table
REPORTED_RUNS = (
    RunRecord("C2C", 8.5, 10.4),
    RunRecord("HTR", 4.5, 5.52),
    RunRecord("ZsOD", 28.5, 34.8),
    RunRecord("VQA", 7.0, 8.56),
    RunRecord("ZsOD+VQA", 32.0, 39.04),
    RunRecord("HTR+ZsOD+VQA", 34.0, 41.44),
    RunRecord("Fusion", 35.0, 42.72),
)
SINGLE_TASK_LABELS = ("C2C", "HTR", "ZsOD", "VQA")
