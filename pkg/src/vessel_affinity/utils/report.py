"""
评估报告

每张图像一条 EvalRecord，外加数据集级汇总（逐图均值或计数合并）。
JSON 与 CSV 使用固定字段顺序和 6 位小数，相同输入的输出逐字节一致。
"""
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple
import csv
import io
import json
import math
import logging

from ..core.base import InvalidValue, ReportWriteError
from ..core.metrics import (
    STRATA,
    Confusion,
    MatchReport,
    PixelMetrics,
    StratumMetrics,
    TopoMetrics,
    metrics_from_confusion,
    topo_metrics,
)
from ..validators.input_validator import validate_output_path

logger = logging.getLogger(__name__)

METRIC_FIELDS = ("precision", "recall", "f1", "correctness", "completeness", "quality")
STRATUM_FIELDS = ("f1", "correctness", "completeness", "quality")
AGGREGATE_MODES = ("mean", "pooled")
REPORT_FORMATS = ("json", "csv")
DECIMALS = 6


@dataclass(frozen=True)
class EvalRecord:
    """单张图像的评估结果"""

    image_id: str
    pixel: PixelMetrics
    topo: TopoMetrics
    match: MatchReport
    strata: Optional[Dict[str, StratumMetrics]] = None

    @property
    def flags(self) -> Tuple[str, ...]:
        return tuple(self.pixel.flags) + tuple(self.topo.flags)

    def metrics(self) -> Dict[str, float]:
        return {
            "precision": self.pixel.precision,
            "recall": self.pixel.recall,
            "f1": self.pixel.f1,
            "correctness": self.topo.correctness,
            "completeness": self.topo.completeness,
            "quality": self.topo.quality,
        }

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {"id": self.image_id}
        out.update({name: round(value, DECIMALS) for name, value in self.metrics().items()})
        out["flags"] = list(self.flags)
        if self.strata is not None:
            out["strata"] = {name: _stratum_dict(self.strata[name]) for name in STRATA}
        return out


def _stratum_dict(stratum: StratumMetrics) -> Dict[str, Any]:
    out: Dict[str, Any] = {name: round(getattr(stratum, name), DECIMALS) for name in STRATUM_FIELDS}
    out["search_range"] = stratum.search_range
    out["empty"] = stratum.empty
    out["flags"] = list(stratum.flags)
    return out


def _mean(values: List[float]) -> float:
    return math.fsum(values) / len(values) if values else 0.0


def _sum_confusion(items: Iterable[Confusion]) -> Confusion:
    tp = fp = fn = tn = 0
    for c in items:
        tp, fp, fn, tn = tp + c.tp, fp + c.fp, fn + c.fn, tn + c.tn
    return Confusion(tp=tp, fp=fp, fn=fn, tn=tn)


def _sum_match(items: List[MatchReport]) -> MatchReport:
    total = items[0]
    for report in items[1:]:
        total = total + report
    return total


def _aggregate_strata(records: Sequence[EvalRecord], mode: str) -> Dict[str, Dict[str, Any]]:
    strata: Dict[str, Dict[str, Any]] = {}
    for name in STRATA:
        present = [r.strata[name] for r in records if r.strata is not None and not r.strata[name].empty]
        if not present:
            block: Dict[str, Any] = {metric: 0.0 for metric in STRATUM_FIELDS}
            block["count"] = 0
            block["empty"] = True
            strata[name] = block
            continue
        if mode == "pooled":
            pixel = metrics_from_confusion(_sum_confusion(s.confusion for s in present))
            topo = topo_metrics(_sum_match([s.match for s in present]))
            values = {"f1": pixel.f1, "correctness": topo.correctness,
                      "completeness": topo.completeness, "quality": topo.quality}
        else:
            values = {metric: _mean([getattr(s, metric) for s in present]) for metric in STRATUM_FIELDS}
        block = {metric: round(values[metric], DECIMALS) for metric in STRATUM_FIELDS}
        block["count"] = len(present)
        block["empty"] = False
        strata[name] = block
    return strata


def aggregate(records: Sequence[EvalRecord], mode: str = "mean") -> Dict[str, Any]:
    """
    数据集级汇总

    Args:
        records: 逐图记录
        mode: "mean" 逐图指标取均值；"pooled" 先合并计数再计算指标

    Returns:
        汇总字典（字段顺序固定）
    """
    if not records:
        raise InvalidValue("没有可汇总的评估记录")
    if mode not in AGGREGATE_MODES:
        raise InvalidValue(f"未知的汇总方式: {mode}（可选: {', '.join(AGGREGATE_MODES)}）")

    flags: List[str] = []
    if mode == "pooled":
        pixel = metrics_from_confusion(_sum_confusion(r.pixel.confusion for r in records))
        topo = topo_metrics(_sum_match([r.match for r in records]))
        values = {
            "precision": pixel.precision,
            "recall": pixel.recall,
            "f1": pixel.f1,
            "correctness": topo.correctness,
            "completeness": topo.completeness,
            "quality": topo.quality,
        }
        flags = list(pixel.flags) + list(topo.flags)
    else:
        per_image = [r.metrics() for r in records]
        values = {name: _mean([m[name] for m in per_image]) for name in METRIC_FIELDS}

    out: Dict[str, Any] = {"mode": mode, "count": len(records)}
    out.update({name: round(values[name], DECIMALS) for name in METRIC_FIELDS})
    out["flags"] = flags
    if any(r.strata is not None for r in records):
        out["strata"] = _aggregate_strata(records, mode)
    return out


def robustness_curve(
    records_by_ratio: Sequence[Tuple[float, Sequence[EvalRecord]]], mode: str = "mean"
) -> List[Dict[str, Any]]:
    """
    对比度鲁棒性曲线：每个比例一行汇总指标

    Args:
        records_by_ratio: [(ratio, 该比例下的逐图记录), ...]，顺序即输出顺序
    """
    rows = []
    for ratio, records in records_by_ratio:
        summary = aggregate(records, mode)
        row: Dict[str, Any] = {"ratio": ratio, "count": summary["count"]}
        row.update({name: summary[name] for name in METRIC_FIELDS})
        rows.append(row)
    return rows


def _fmt(value: float) -> str:
    return f"{value:.{DECIMALS}f}"


def render_json(records: Sequence[EvalRecord], summary: Dict[str, Any]) -> str:
    payload = {"records": [r.to_dict() for r in records], "aggregate": summary}
    return json.dumps(payload, indent=2, ensure_ascii=False) + "\n"


def render_csv(records: Sequence[EvalRecord], summary: Dict[str, Any]) -> str:
    stratified = "strata" in summary
    header = ["id", *METRIC_FIELDS]
    if stratified:
        header += [f"{name}_{metric}" for name in STRATA for metric in STRATUM_FIELDS]
    header.append("flags")

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for record in records:
        row = [record.image_id, *(_fmt(v) for v in record.metrics().values())]
        if stratified:
            for name in STRATA:
                stratum = record.strata[name] if record.strata else None
                row += [_fmt(getattr(stratum, m)) if stratum else _fmt(0.0) for m in STRATUM_FIELDS]
        row.append(";".join(record.flags))
        writer.writerow(row)

    row = ["aggregate", *(_fmt(summary[name]) for name in METRIC_FIELDS)]
    if stratified:
        for name in STRATA:
            row += [_fmt(summary["strata"][name][m]) for m in STRATUM_FIELDS]
    row.append(";".join(summary["flags"]))
    writer.writerow(row)
    return buffer.getvalue()


def _write_text(path: Path, text: str) -> Path:
    path = Path(path)
    validate_output_path(path)
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as e:
        raise ReportWriteError(f"报告写入失败 {path}: {e}")
    logger.info(f"报告已写入: {path}")
    return path


def write_report(
    records: Sequence[EvalRecord],
    summary: Dict[str, Any],
    path: Path,
    fmt: str = "json",
) -> Path:
    """
    写入评估报告

    Raises:
        InvalidValue: 没有记录或未知格式
        ReportWriteError: 写入失败
    """
    if not records:
        raise InvalidValue("没有可写入的评估记录")
    if fmt == "json":
        return _write_text(path, render_json(records, summary))
    if fmt == "csv":
        return _write_text(path, render_csv(records, summary))
    raise InvalidValue(f"未知的报告格式: {fmt}（可选: {', '.join(REPORT_FORMATS)}）")


def write_curve(rows: Sequence[Dict[str, Any]], path: Path, fmt: str = "json") -> Path:
    """写入鲁棒性曲线"""
    if fmt == "json":
        return _write_text(path, json.dumps({"curve": list(rows)}, indent=2) + "\n")
    if fmt == "csv":
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["ratio", "count", *METRIC_FIELDS])
        for row in rows:
            writer.writerow([f"{row['ratio']:g}", row["count"], *(_fmt(row[name]) for name in METRIC_FIELDS)])
        return _write_text(path, buffer.getvalue())
    raise InvalidValue(f"未知的报告格式: {fmt}（可选: {', '.join(REPORT_FORMATS)}）")
