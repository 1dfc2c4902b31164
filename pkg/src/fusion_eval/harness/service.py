"""HTTP front end for the leaderboard.

Team tokens live in a JSON file (``{"team": "token", ...}``) whose path is
read from ``FUSION_EVAL_TOKENS``. Ground truth stays on the server; which
directory is used (public or private split) is server configuration.
"""
from __future__ import annotations

import hmac
import json
import os
from pathlib import Path
from typing import Mapping

from fastapi import FastAPI, File, Form, HTTPException, UploadFile

from ..core import TASK_ORDER, EvalError, SubmissionError
from .leaderboard import Leaderboard
from .scoring import ScoreOptions

TOKENS_ENV = "FUSION_EVAL_TOKENS"


def load_tokens(path: str | Path | None = None) -> dict[str, str]:
    path = path or os.environ.get(TOKENS_ENV)
    if not path:
        raise RuntimeError(f"set {TOKENS_ENV} to the team-token file")
    data = json.loads(Path(path).read_text("utf-8"))
    if not isinstance(data, dict) or not all(isinstance(v, str) for v in data.values()):
        raise RuntimeError("token file must map team names to token strings")
    return data


def create_app(store: str | Path, gt_dir: str | Path, *, tokens: Mapping[str, str] | None = None,
               options: ScoreOptions | None = None, board: Leaderboard | None = None) -> FastAPI:
    board = board or Leaderboard(store)
    tokens = dict(tokens) if tokens is not None else load_tokens()
    gt_dir = Path(gt_dir)
    app = FastAPI(title="fusion-eval leaderboard", version="1")

    @app.post("/api/v1/submissions", status_code=201)
    async def submit(team: str = Form(...), token: str = Form(...),
                     c2c: UploadFile | None = File(None), htr: UploadFile | None = File(None),
                     zsod: UploadFile | None = File(None), vqa: UploadFile | None = File(None)):
        expected = tokens.get(team)
        if expected is None or not hmac.compare_digest(expected.encode(), token.encode()):
            raise HTTPException(401, "unknown team or bad token")
        uploads = {"c2c": c2c, "htr": htr, "zsod": zsod, "vqa": vqa}
        files = {k: await f.read() for k, f in uploads.items() if f is not None}
        if not files:
            raise HTTPException(422, "no prediction files attached")
        try:
            sid = board.submit(team, files, gt_dir, options)
        except SubmissionError as exc:
            raise HTTPException(422, {"error": str(exc), "line": exc.line, "field": exc.field}) from None
        except EvalError as exc:
            raise HTTPException(422, {"error": str(exc)}) from None
        return board.get(sid).to_dict()

    @app.get("/api/v1/leaderboard")
    def leaderboard(all_submissions: bool = False):
        rows = board.rank(best_per_team=not all_submissions)
        return {"entries": [dict(e.to_dict(), rank=i + 1) for i, e in enumerate(rows)],
                "tasks": [t.value for t in TASK_ORDER]}

    @app.get("/api/v1/submissions/{submission_id}")
    def submission(submission_id: str):
        entry = board.get(submission_id)
        if entry is None:
            raise HTTPException(404, "no such submission")
        return entry.to_dict()

    return app
