import json
import threading
from datetime import datetime, timedelta, timezone
from itertools import count

import pytest
from fastapi.testclient import TestClient

from _fixtures import FUSION, build_dirs, c2c_rows, htr_rows, vqa_rows, write_jsonl, zsod_rows
from fusion_eval.cli import main
from fusion_eval.core import EvalError, SubmissionError, TaskKind, overall
from fusion_eval.harness import (INDEX_NAME, LOG_NAME, Leaderboard, ScoreOptions, rank_entries, read_log,
                                 replay, score_overall, score_task)
from fusion_eval.harness.service import create_app


def fake_clock(start=datetime(2021, 11, 1, tzinfo=timezone.utc)):
    ticks = count()
    return lambda: start + timedelta(seconds=next(ticks))


def fake_ids(prefix="s"):
    ticks = count()
    return lambda: f"{prefix}{next(ticks):03d}"


def board(path):
    return Leaderboard(path, clock=fake_clock(), id_factory=fake_ids())


# --- task scoring -------------------------------------------------------------------


def test_htr_perfect(jsonl):
    gt, pred = htr_rows(5, 5)
    assert score_task("htr", jsonl("g.jsonl", gt), jsonl("p.jsonl", pred)).score == 1.0


def test_vqa_normalised_match(jsonl):
    gt, pred = vqa_rows(3, 4)
    assert score_task("vqa", jsonl("g.jsonl", gt), jsonl("p.jsonl", pred)).score == 0.75


def test_zsod_duplicate_prediction(jsonl):
    gt = [{"image_id": "a", "queries": [{"label": "cat", "boxes": [[0, 0, 10, 10]]}]}]
    pred = [{"image_id": "a", "queries": [{"label": "cat", "boxes": [[0, 0, 10, 10, 0.9], [0, 0, 10, 9.5]]}]}]
    rep = score_task("zsod", jsonl("g.jsonl", gt), jsonl("p.jsonl", pred))
    assert rep.score == pytest.approx(2 / 3, abs=1e-15)
    literal = score_task("zsod", jsonl("g2.jsonl", gt), jsonl("p2.jsonl", pred),
                         ScoreOptions(matching_mode="literal"))
    assert literal.score == 1.0


def test_zsod_fixture_counts(jsonl):
    gt, pred = zsod_rows(3, 4)
    rep = score_task("zsod", jsonl("g.jsonl", gt), jsonl("p.jsonl", pred))
    assert (rep.details["tp"], rep.details["fp"], rep.details["fn"]) == (3, 0, 4)


def test_c2c_identical_and_empty(jsonl):
    gt, pred = c2c_rows(1, 2)
    rep = score_task("c2c", jsonl("g.jsonl", gt), jsonl("p.jsonl", pred))
    assert rep.per_sample == (("c0000", 1.0), ("c0001", 0.0))
    assert rep.details["components"] == {"ngram": 0.5, "weighted_ngram": 0.5, "ast": 0.5, "dataflow": 0.5}


def test_c2c_untokenizable_hypothesis_scores_zero(jsonl):
    gt, pred = c2c_rows(2, 2)
    pred[1]["python"] = "x = 'unterminated"
    rep = score_task("c2c", jsonl("g.jsonl", gt), jsonl("p.jsonl", pred))
    assert rep.score == 0.5 and rep.details["lex_failures"] == 1


def test_missing_prediction_id_scores_zero(jsonl):
    gt, pred = htr_rows(4, 4)
    rep = score_task("htr", jsonl("g.jsonl", gt), jsonl("p.jsonl", pred[:2]))
    assert rep.score == 0.5 and rep.warnings


def test_validation_error_has_location(jsonl):
    gt, pred = htr_rows(2, 2)
    bad = jsonl("p.jsonl", pred[:1] + [{"id": "h0001"}])
    with pytest.raises(SubmissionError) as info:
        score_task("htr", jsonl("g.jsonl", gt), bad)
    assert info.value.line == 2 and info.value.field == "text" and "p.jsonl" in str(info.value)


def test_overall_all_perfect(tmp_path):
    gt_dir, pred_dir = build_dirs(tmp_path, 20, 20, 20, 0, 20, total=20)
    score, reports = score_overall(gt_dir, pred_dir)
    assert score.total == 4.0 and set(reports) == set(TaskKind)


def test_overall_missing_task(tmp_path):
    gt_dir, pred_dir = build_dirs(tmp_path, 10, 10, 10, 0, 10, total=10, skip=("vqa",))
    score, _ = score_overall(gt_dir, pred_dir, parallel=False)
    assert score.vqa == 0.0 and score.missing == (TaskKind.VQA,) and score.total == 3.0


def test_overall_requires_ground_truth(tmp_path):
    gt_dir, pred_dir = build_dirs(tmp_path, 1, 1, 1, 0, 1, total=1)
    (gt_dir / "htr.jsonl").unlink()
    with pytest.raises(EvalError):
        score_overall(gt_dir, pred_dir)


def test_parallel_and_serial_agree(tmp_path):
    gt_dir, pred_dir = build_dirs(tmp_path, 3, 5, 4, 6, 7, total=10)
    assert score_overall(gt_dir, pred_dir)[0] == score_overall(gt_dir, pred_dir, parallel=False)[0]


# --- leaderboard --------------------------------------------------------------------

PRIVATE_TOP3 = {"qbic": (0.320, 0.744, 0.250, 0.365), "orzhan": (0.233, 0.314, 0.166, 0.318),
                "Arasaka": (0.218, 0.377, 0.074, 0.237)}


def test_rank_order(tmp_path):
    lb = board(tmp_path)
    for team in ("Arasaka", "qbic", "orzhan"):
        lb.record(team, overall(*PRIVATE_TOP3[team]))
    assert [e.team for e in lb.rank()] == ["qbic", "orzhan", "Arasaka"]


def test_empty_store(tmp_path):
    lb = board(tmp_path / "store")
    assert lb.rank() == [] and replay(tmp_path / "store" / LOG_NAME) == []
    assert json.loads((tmp_path / "store" / INDEX_NAME).read_text()) == {"count": 0, "ids": {}}


def test_tie_goes_to_earlier(tmp_path):
    lb = board(tmp_path)
    lb.record("late", overall(0.5, 0.5, 0.5, 0.5))
    first = lb.entries()[0]
    lb.record("later", overall(0.5, 0.5, 0.5, 0.5))
    assert [e.team for e in lb.rank()] == ["late", "later"]
    assert lb.rank()[0] == first


def test_best_per_team(tmp_path):
    lb = board(tmp_path)
    lb.record("a", overall(0.1, 0.1, 0.1, 0.1))
    lb.record("a", overall(0.3, 0.1, 0.1, 0.1))
    lb.record("b", overall(0.2, 0.1, 0.1, 0.1))
    assert [(e.team, e.seq) for e in lb.rank()] == [("a", 1), ("b", 2)]
    assert len(lb.rank(best_per_team=False)) == 3


def test_replay_equals_live_and_reopen(tmp_path):
    lb = board(tmp_path)
    for i in range(12):
        lb.record(f"t{i % 5}", overall(i / 20, 0.3, (11 - i) / 20, 0.2))
    assert replay(lb.log_path) == lb.rank()
    assert replay(lb.log_path, best_per_team=False) == lb.rank(best_per_team=False)
    reopened = Leaderboard(tmp_path)
    assert reopened.rank() == lb.rank() and reopened.get("s005") == lb.get("s005")


def test_stored_total_is_not_trusted(tmp_path):
    lb = board(tmp_path)
    lb.record("a", overall(0.1, 0.2, 0.3, 0.4))
    rec = json.loads(lb.log_path.read_text())
    rec["total"] = 99.0
    lb.log_path.write_text(json.dumps(rec) + "\n")
    assert read_log(lb.log_path)[0].total == pytest.approx(1.0)


def test_torn_last_line_skipped(tmp_path):
    lb = board(tmp_path)
    lb.record("a", overall(0.1, 0.2, 0.3, 0.4))
    with lb.log_path.open("a") as fh:
        fh.write('{"seq": 1, "team": "b", "sco')
    assert [e.team for e in read_log(lb.log_path)] == ["a"]
    with lb.log_path.open("a") as fh:
        fh.write("\n" + json.dumps(lb.entries()[0].to_record()) + "\n")
    with pytest.raises(EvalError):
        read_log(lb.log_path)


def test_invalid_submission_persists_nothing(tmp_path):
    gt_dir, _ = build_dirs(tmp_path / "data", 2, 2, 2, 0, 2, total=2)
    lb = board(tmp_path / "store")
    with pytest.raises(SubmissionError):
        lb.submit("a", {"htr": b'{"id": "h0000"}\n'}, gt_dir)
    assert lb.entries() == [] and not lb.log_path.exists()


def test_submit_rescore_is_deterministic(tmp_path):
    gt_dir, pred_dir = build_dirs(tmp_path / "data", 1, 2, 1, 2, 1, total=2)
    lb = board(tmp_path / "store")
    files = {t.value: pred_dir / f"{t.value}.jsonl" for t in TaskKind}
    a = lb.get(lb.submit("team", files, gt_dir))
    b = lb.get(lb.submit("team", files, gt_dir))
    assert a.scores == b.scores and a.submission_id != b.submission_id
    assert a.total == score_overall(gt_dir, pred_dir)[0].total


def test_concurrent_records(tmp_path):
    lb = Leaderboard(tmp_path)
    threads = [threading.Thread(target=lb.record, args=(f"t{i}", overall(0.1, 0.1, 0.1, i / 100)))
               for i in range(16)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    entries = read_log(lb.log_path)
    assert sorted(e.seq for e in entries) == list(range(16))
    assert rank_entries(entries) == lb.rank()


# --- service ------------------------------------------------------------------------


@pytest.fixture
def client(tmp_path):
    gt_dir, pred_dir = build_dirs(tmp_path / "data", 2, 2, 2, 0, 1, total=2)
    app = create_app(tmp_path / "store", gt_dir, tokens={"qbic": "s3cret"},
                     board=board(tmp_path / "store"))
    return TestClient(app), pred_dir


def test_service_submit_and_read(client):
    c, pred_dir = client
    files = {t.value: (f"{t.value}.jsonl", (pred_dir / f"{t.value}.jsonl").read_bytes()) for t in TaskKind}
    r = c.post("/api/v1/submissions", data={"team": "qbic", "token": "s3cret"}, files=files)
    assert r.status_code == 201
    body = r.json()
    assert body["total"] == 3.5 and body["scores"]["vqa"] == 0.5
    assert c.get(f"/api/v1/submissions/{body['submission_id']}").json() == body
    board_json = c.get("/api/v1/leaderboard").json()
    assert board_json["tasks"] == ["c2c", "htr", "zsod", "vqa"]
    assert board_json["entries"][0]["rank"] == 1 and board_json["entries"][0]["team"] == "qbic"


def test_service_partial_submission_flags_missing(client):
    c, pred_dir = client
    files = {"htr": ("htr.jsonl", (pred_dir / "htr.jsonl").read_bytes())}
    body = c.post("/api/v1/submissions", data={"team": "qbic", "token": "s3cret"}, files=files).json()
    assert body["missing"] == ["c2c", "zsod", "vqa"] and body["total"] == 1.0


def test_service_rejections(client):
    c, pred_dir = client
    files = {"htr": ("htr.jsonl", (pred_dir / "htr.jsonl").read_bytes())}
    assert c.post("/api/v1/submissions", data={"team": "qbic", "token": "nope"}, files=files).status_code == 401
    assert c.post("/api/v1/submissions", data={"team": "ghost", "token": "s3cret"},
                  files=files).status_code == 401
    assert c.post("/api/v1/submissions", data={"team": "qbic", "token": "s3cret"}).status_code == 422
    bad = {"htr": ("htr.jsonl", b'{"id": 1, "text": "x"}\n')}
    r = c.post("/api/v1/submissions", data={"team": "qbic", "token": "s3cret"}, files=bad)
    assert r.status_code == 422 and r.json()["detail"]["line"] == 1
    assert c.get("/api/v1/leaderboard").json()["entries"] == []
    assert c.get("/api/v1/submissions/missing").status_code == 404


def test_service_reads_token_file(tmp_path, monkeypatch):
    tok = tmp_path / "tokens.json"
    tok.write_text(json.dumps({"a": "b"}))
    monkeypatch.setenv("FUSION_EVAL_TOKENS", str(tok))
    gt_dir, _ = build_dirs(tmp_path / "data", 1, 1, 1, 0, 1, total=1)
    c = TestClient(create_app(tmp_path / "store", gt_dir))
    assert c.post("/api/v1/submissions", data={"team": "a", "token": "x"}).status_code == 401


# --- cli ----------------------------------------------------------------------------


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, (json.loads(out.out) if out.out.strip() else None), out.err


def test_cli_score(tmp_path, capsys):
    gt, pred = htr_rows(3, 4)
    g, p = write_jsonl(tmp_path / "g.jsonl", gt), write_jsonl(tmp_path / "p.jsonl", pred)
    code, out, _ = run_cli(capsys, "score", "--task", "htr", "--gt", str(g), "--pred", str(p),
                           "--out", str(tmp_path / "r.json"))
    assert code == 0 and out["score"] == 0.75
    assert json.loads((tmp_path / "r.json").read_text()) == out


def test_cli_score_reports_bad_file(tmp_path, capsys):
    g = write_jsonl(tmp_path / "g.jsonl", htr_rows(1, 1)[0])
    p = tmp_path / "p.jsonl"
    p.write_text("{not json\n")
    code, _, err = run_cli(capsys, "score", "--task", "htr", "--gt", str(g), "--pred", str(p))
    assert code == 1 and "line 1" in err


def test_cli_overall_and_sum(tmp_path, capsys):
    gt_dir, pred_dir = build_dirs(tmp_path, **FUSION)
    code, out, _ = run_cli(capsys, "overall", "--gt-dir", str(gt_dir), "--pred-dir", str(pred_dir))
    assert code == 0 and out["total"] == 1.237
    code, out, _ = run_cli(capsys, "sum", "13.2", "0.587", "0.191", "0.327", "--c2c-percent")
    assert out["total"] == 1.237
    assert run_cli(capsys, "sum", "1.5", "0", "0", "0")[0] == 1


def test_cli_leaderboard(tmp_path, capsys):
    lb = board(tmp_path)
    for team, scores in PRIVATE_TOP3.items():
        lb.record(team, overall(*scores))
    code, out, _ = run_cli(capsys, "leaderboard", "rank", "--store", str(tmp_path))
    assert [(r["rank"], r["team"]) for r in out] == [(1, "qbic"), (2, "orzhan"), (3, "Arasaka")]


def test_cli_sampler_and_co2(tmp_path, capsys):
    budgets = tmp_path / "b.json"
    budgets.write_text(json.dumps({"zsod": {"batch_size": 64, "steps": 119510},
                                   "vqa": {"batch_size": 64, "steps": 32500}}))
    code, out, _ = run_cli(capsys, "sampler", "derive", "--budgets", str(budgets))
    assert out["rounded"] == {"zsod": 0.79, "vqa": 0.21}
    weights = tmp_path / "w.json"
    weights.write_text(json.dumps(out))
    code, out, _ = run_cli(capsys, "sampler", "stream", "--weights", str(weights), "--seed", "3", "--n", "5")
    assert out["stream"] == "pcg64-invcdf-v1" and len(out["tasks"]) == 5
    code, out, _ = run_cli(capsys, "co2", "estimate", "--hours", "35")
    assert out["kg_co2eq"] == pytest.approx(42.721, abs=1e-3)
    with pytest.raises(SystemExit):
        main(["co2", "fit"])


def test_cli_kernels_check(capsys):
    code, out, _ = run_cli(capsys, "kernels", "check", "--trials", "5")
    assert code == 0 and all(v["ok"] for v in out.values())
