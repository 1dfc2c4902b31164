"""Append-only leaderboard store.

Every accepted submission is one JSON line in ``submissions.jsonl``; the ranking
is a pure fold over those lines. ``index.json`` caches the id -> sequence map and
is replaced atomically (write temp, fsync, rename) after each append. It can
always be rebuilt from the log.
"""
from __future__ import annotations

import json
import logging
import os
import tempfile
import threading
import uuid
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Iterable, Mapping

from ..core import TASK_ORDER, EvalError, OverallScore, TaskKind, overall
from .scoring import TASK_FILES, ScoreOptions, score_overall

log = logging.getLogger(__name__)

LOG_NAME = "submissions.jsonl"
INDEX_NAME = "index.json"


@dataclass(frozen=True)
class LeaderboardEntry:
    team: str
    scores: Mapping[str, float]
    submitted_at: str
    submission_id: str
    seq: int
    missing: tuple[str, ...] = ()

    @property
    def total(self) -> float:
        # recomputed from the components; a stored total is never trusted
        return overall(**{t.value: self.scores[t.value] for t in TASK_ORDER}).total

    @classmethod
    def from_record(cls, rec: Mapping) -> "LeaderboardEntry":
        scores = {t.value: float(rec["scores"][t.value]) for t in TASK_ORDER}
        return cls(rec["team"], scores, rec["submitted_at"], rec["submission_id"], int(rec["seq"]),
                   tuple(rec.get("missing", ())))

    def to_record(self) -> dict:
        return {"seq": self.seq, "submission_id": self.submission_id, "team": self.team,
                "submitted_at": self.submitted_at, "scores": dict(self.scores), "missing": list(self.missing)}

    def to_dict(self, digits: int | None = 3) -> dict:
        rnd = (lambda v: round(v, digits)) if digits is not None else (lambda v: v)
        out = self.to_record()
        out["scores"] = {k: rnd(v) for k, v in self.scores.items()}
        out["total"] = rnd(self.total)
        return out


def rank_entries(entries: Iterable[LeaderboardEntry], *, best_per_team: bool = True) -> list[LeaderboardEntry]:
    """Total descending; ties go to the earlier submission, then the lower sequence number."""
    ordered = sorted(entries, key=lambda e: (-e.total, e.submitted_at, e.seq))
    if not best_per_team:
        return ordered
    seen: set[str] = set()
    out = []
    for e in ordered:
        if e.team not in seen:
            seen.add(e.team)
            out.append(e)
    return out


def read_log(path: str | Path) -> list[LeaderboardEntry]:
    """Entries in log order. A torn final line (crash mid-append) is skipped."""
    path = Path(path)
    if not path.exists():
        return []
    lines = path.read_text("utf-8").split("\n")
    out = []
    for i, line in enumerate(lines):
        if not line.strip():
            continue
        try:
            out.append(LeaderboardEntry.from_record(json.loads(line)))
        except (json.JSONDecodeError, KeyError) as exc:
            if i == len(lines) - 1:
                log.warning("ignoring incomplete trailing record in %s", path)
                break
            raise EvalError(f"corrupt leaderboard record at {path}:{i + 1}: {exc}") from None
    return out


def replay(path: str | Path, *, best_per_team: bool = True) -> list[LeaderboardEntry]:
    return rank_entries(read_log(path), best_per_team=best_per_team)


def _utc_now() -> datetime:
    return datetime.now(timezone.utc)


class Leaderboard:
    def __init__(self, root: str | Path, *, clock: Callable[[], datetime] = _utc_now,
                 id_factory: Callable[[], str] = lambda: uuid.uuid4().hex):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.log_path = self.root / LOG_NAME
        self.index_path = self.root / INDEX_NAME
        self._clock = clock
        self._new_id = id_factory
        self._lock = threading.Lock()
        self._entries = read_log(self.log_path)
        self._by_id = {e.submission_id: e for e in self._entries}
        self._write_index()

    # -- persistence ------------------------------------------------------------
    def _write_index(self) -> None:
        data = {"count": len(self._entries), "ids": {e.submission_id: e.seq for e in self._entries}}
        fd, tmp = tempfile.mkstemp(dir=self.root, prefix=".index-", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                json.dump(data, fh, sort_keys=True)
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp, self.index_path)
        except BaseException:
            Path(tmp).unlink(missing_ok=True)
            raise

    def _append(self, entry: LeaderboardEntry) -> None:
        line = json.dumps(entry.to_record(), sort_keys=True, ensure_ascii=False) + "\n"
        with self.log_path.open("a", encoding="utf-8") as fh:
            fh.write(line)
            fh.flush()
            os.fsync(fh.fileno())
        self._entries.append(entry)
        self._by_id[entry.submission_id] = entry
        self._write_index()

    # -- operations -------------------------------------------------------------
    def record(self, team: str, score: OverallScore) -> LeaderboardEntry:
        """Append an already-computed score."""
        if not team or not team.strip():
            raise EvalError("team name must be non-empty")
        with self._lock:
            entry = LeaderboardEntry(
                team=team,
                scores={t.value: score.component(t) for t in TASK_ORDER},
                submitted_at=self._clock().isoformat(),
                submission_id=self._new_id(),
                seq=len(self._entries),
                missing=tuple(t.value for t in score.missing),
            )
            self._append(entry)
        return entry

    def submit(self, team: str, files: Mapping[TaskKind | str, bytes | str | Path], gt_dir: str | Path,
               options: ScoreOptions | None = None) -> str:
        """Validate and score prediction files, then append. Nothing is stored on failure."""
        with tempfile.TemporaryDirectory() as tmp:
            for task, payload in files.items():
                target = Path(tmp) / TASK_FILES[TaskKind.parse(task)]
                if isinstance(payload, bytes):
                    target.write_bytes(payload)
                else:
                    target.write_bytes(Path(payload).read_bytes())
            score, _ = score_overall(gt_dir, tmp, options)
        return self.record(team, score).submission_id

    def get(self, submission_id: str) -> LeaderboardEntry | None:
        return self._by_id.get(submission_id)

    def entries(self) -> list[LeaderboardEntry]:
        return list(self._entries)

    def rank(self, *, best_per_team: bool = True) -> list[LeaderboardEntry]:
        return rank_entries(list(self._entries), best_per_team=best_per_team)
