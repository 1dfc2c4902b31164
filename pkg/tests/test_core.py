import json

import pytest

from fusion_eval.core import (BBox, BoxError, DuplicateIdError, EvalError, OverallScore, ParseError,
                              ScoreRangeError, ScoreReport, SubmissionError, TaskKind, load_submission,
                              overall, to_unit_scale, validate_record)


def test_task_kind_parse():
    assert TaskKind.parse("ZsOD") is TaskKind.ZSOD
    assert TaskKind.parse(TaskKind.VQA) is TaskKind.VQA
    with pytest.raises(ValueError):
        TaskKind.parse("ocr")


@pytest.mark.parametrize("coords", [(2, 0, 1, 1), (0, 3, 1, 1), (-1, 0, 1, 1), (0, 0, float("nan"), 1)])
def test_bbox_invariants(coords):
    with pytest.raises(BoxError):
        BBox(*coords)


def test_bbox_area_and_score_column():
    assert BBox(1, 2, 4, 6).area == 12
    assert BBox.from_list([0, 0, 1, 1, 0.3], allow_score=True).as_tuple() == (0, 0, 1, 1)
    with pytest.raises(BoxError):
        BBox.from_list([0, 0, 1, 1, 0.3])


def test_overall_published_rows():
    assert overall(0.132, 0.587, 0.191, 0.327).total == pytest.approx(1.237, abs=1e-12)
    assert overall(0.123, 0.533, 0.193, 0.307).total == pytest.approx(1.156, abs=1e-12)
    assert overall(0, 0, 0, 0).total == 0.0
    assert abs(overall(0.320, 0.744, 0.250, 0.365).total - 1.680) <= 0.002


def test_overall_rejects_out_of_range():
    with pytest.raises(ScoreRangeError):
        overall(32.0, 0.5, 0.5, 0.5)
    with pytest.raises(ScoreRangeError):
        overall(0.1, -0.01, 0.5, 0.5)


def test_percent_scale_conversion():
    assert to_unit_scale(13.2) == pytest.approx(0.132)
    with pytest.raises(ScoreRangeError):
        to_unit_scale(101)


def test_overall_is_monotone():
    base = overall(0.1, 0.2, 0.3, 0.4).total
    assert overall(0.2, 0.2, 0.3, 0.4).total > base


def test_overall_score_dict_flags_missing():
    s = overall(0.5, 0.5, 0.5, 0.0, missing=["vqa"])
    d = s.to_dict()
    assert d["total"] == 1.5 and d["missing"] == ["vqa"]
    assert isinstance(s, OverallScore)


def test_score_report_range():
    with pytest.raises(ScoreRangeError):
        ScoreReport(TaskKind.HTR, 1.5, 1)
    with pytest.raises(EvalError):
        ScoreReport(TaskKind.HTR, 0.5, 0)


def test_load_two_line_htr_file(jsonl):
    path = jsonl("htr.jsonl", [{"id": "a", "text": "x"}, {"id": "b", "text": "y"}])
    assert len(load_submission(path, "htr")) == 2


def test_duplicate_id_named(jsonl):
    path = jsonl("htr.jsonl", [{"id": "q1", "text": "x"}, {"id": "q1", "text": "y"}])
    with pytest.raises(DuplicateIdError) as info:
        load_submission(path, "htr")
    assert info.value.record_id == "q1"
    assert info.value.line == 2
    assert "q1" in str(info.value)


def test_malformed_line_reports_line_number(tmp_path):
    path = tmp_path / "vqa.jsonl"
    path.write_text(json.dumps({"id": "a", "answer": "x"}) + "\n\n{broken\n", encoding="utf-8")
    with pytest.raises(ParseError) as info:
        load_submission(path, "vqa")
    assert info.value.line == 3


def test_inverted_box_rejected(jsonl):
    rec = {"image_id": "i", "queries": [{"label": "cat", "boxes": [[5, 0, 1, 3]]}]}
    with pytest.raises(BoxError) as info:
        load_submission(jsonl("z.jsonl", [rec]), "zsod", "gt")
    assert "boxes[0]" in info.value.field


@pytest.mark.parametrize("record,field", [
    ({"id": "a"}, "text"),
    ({"id": "a", "text": 3}, "text"),
    ({"id": "a", "text": "x", "extra": 1}, "extra"),
])
def test_schema_errors_name_field(record, field):
    with pytest.raises(SubmissionError) as info:
        validate_record("htr", "pred", record)
    assert info.value.field == field


def test_c2c_gt_requires_reference_list():
    with pytest.raises(SubmissionError):
        validate_record("c2c", "gt", {"id": "a", "java": "x", "python": []})
    rec = validate_record("c2c", "gt", {"id": "a", "java": "x", "python": ["y", "z"]})
    assert rec["python"] == ["y", "z"]


def test_zsod_empty_box_list_is_negative_class():
    rec = validate_record("zsod", "gt", {"image_id": "i", "queries": [{"label": "dog", "boxes": []}]})
    assert rec["queries"][0]["boxes"] == []


def test_zsod_repeated_label_rejected():
    q = {"label": "dog", "boxes": []}
    with pytest.raises(SubmissionError):
        validate_record("zsod", "pred", {"image_id": "i", "queries": [q, q]})
