from pathlib import Path
import json
import sys

import numpy as np
import pytest

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent.parent / "src"))

from vessel_affinity.core.base import InvalidValue
from vessel_affinity.core.types import Mask
from vessel_affinity.processors.evaluation import EvaluationOptions, evaluate_pair
from vessel_affinity.utils.report import (
    aggregate,
    render_csv,
    render_json,
    robustness_curve,
    write_curve,
    write_report,
)


def _line_mask():
    canvas = np.zeros((12, 30), dtype=np.uint8)
    canvas[5, 3:23] = 1
    return Mask(canvas)


@pytest.fixture
def records():
    gt = _line_mask()
    perfect = evaluate_pair("a", gt, gt)
    missed = evaluate_pair("b", Mask.empty(12, 30), gt)
    return [perfect, missed]


def test_record_field_order(records):
    out = records[0].to_dict()
    assert list(out) == ["id", "precision", "recall", "f1", "correctness", "completeness", "quality", "flags"]
    assert out["flags"] == []
    assert "precision_undefined" in records[1].to_dict()["flags"]


def test_mean_aggregate(records):
    summary = aggregate(records, "mean")
    assert summary["mode"] == "mean"
    assert summary["count"] == 2
    for name in ("precision", "recall", "f1", "correctness", "completeness", "quality"):
        assert summary[name] == 0.5


def test_pooled_aggregate(records):
    summary = aggregate(records, "pooled")
    assert summary["precision"] == 1.0
    assert summary["recall"] == 0.5
    assert summary["f1"] == round(2.0 / 3.0, 6)
    assert summary["correctness"] == 1.0
    assert summary["completeness"] == 0.5
    assert summary["quality"] == 0.5
    assert summary["flags"] == []


def test_aggregate_rejects_bad_input(records):
    with pytest.raises(InvalidValue):
        aggregate([], "mean")
    with pytest.raises(InvalidValue):
        aggregate(records, "median")


def test_csv_layout(records):
    text = render_csv(records, aggregate(records))
    lines = text.splitlines()
    assert lines[0] == "id,precision,recall,f1,correctness,completeness,quality,flags"
    assert lines[1].startswith("a,1.000000,1.000000,1.000000")
    assert lines[-1].startswith("aggregate,0.500000")
    assert len(lines) == 4


def test_stratified_columns():
    gt = _line_mask()
    record = evaluate_pair("a", gt, gt, EvaluationOptions(stratify=True))
    summary = aggregate([record])
    header = render_csv([record], summary).splitlines()[0].split(",")
    assert "thin_f1" in header and "thick_quality" in header
    assert summary["strata"]["thin"]["count"] == 1
    assert summary["strata"]["thick"]["empty"] is True


def test_json_is_deterministic(records):
    summary = aggregate(records)
    first = render_json(records, summary)
    assert first == render_json(records, summary)
    payload = json.loads(first)
    assert [r["id"] for r in payload["records"]] == ["a", "b"]
    assert payload["aggregate"]["count"] == 2


def test_write_report(tmp_path, records):
    summary = aggregate(records)
    path = write_report(records, summary, tmp_path / "out" / "report.csv", "csv")
    assert path.read_text(encoding="utf-8") == render_csv(records, summary)
    with pytest.raises(InvalidValue):
        write_report([], summary, tmp_path / "empty.json")
    with pytest.raises(InvalidValue):
        write_report(records, summary, tmp_path / "r.xml", "xml")


def test_robustness_curve_keeps_ratio_order(tmp_path, records):
    rows = robustness_curve([(1.7, records), (0.8, records[:1])])
    assert [row["ratio"] for row in rows] == [1.7, 0.8]
    assert rows[1]["quality"] == 1.0
    path = write_curve(rows, tmp_path / "curve.csv", "csv")
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0].startswith("ratio,count,precision")
    assert lines[1].startswith("1.7,2,")
