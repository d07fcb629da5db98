"""命令行端到端测试（CliRunner，不依赖外部程序）"""
from pathlib import Path
import json
import os
import sys

import numpy as np
import pytest
from click.testing import CliRunner

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent.parent / "src"))

from cli.main import cli
from vessel_affinity.core.affinity import NeighborhoodSpec, compute_affinity
from vessel_affinity.core.types import AffinityField, FeatureMap, Grayscale, Mask, ScaleWeightMap, rng_new
from vessel_affinity.utils.aff_container import AffKind, read_aff, write_aff
from vessel_affinity.utils.image_io import write_image, write_mask
from vessel_affinity.validators import AFF_SUFFIX


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def synth_dir(runner, tmp_path):
    out = tmp_path / "synth"
    result = runner.invoke(cli, [
        "synth", "-o", str(out), "--seed", "3", "--count", "3",
        "--breaks", "2", "--jobs", "2", "--no-progress",
    ])
    assert result.exit_code == 0, result.output
    return out


def _label(tmp_path):
    canvas = np.zeros((20, 24), dtype=np.uint8)
    canvas[8:12, 2:22] = 1
    return write_mask(tmp_path / "label.pgm", Mask(canvas))


GOLDEN_DIR = Path(__file__).parent / "golden"
HELP_TARGETS = [
    ("vessaff", []),
    ("affinity", ["affinity"]),
    ("loss", ["loss"]),
    ("strengthen", ["strengthen"]),
    ("eval", ["eval"]),
    ("eval-sweep", ["eval-sweep"]),
    ("perturb", ["perturb"]),
    ("synth", ["synth"]),
    ("selfcheck", ["selfcheck"]),
    ("info", ["info"]),
]


def _squash(text):
    # 只比较非空白字符，换行位置随 click 版本的折行规则变化
    return "".join(text.split())


@pytest.mark.parametrize("name,args", HELP_TARGETS, ids=[name for name, _ in HELP_TARGETS])
def test_help_matches_golden(runner, name, args):
    result = runner.invoke(cli, args + ["--help"], prog_name="vessaff", terminal_width=80)
    assert result.exit_code == 0, result.output
    golden = GOLDEN_DIR / f"{name}.txt"
    if os.getenv("VESSAFF_UPDATE_GOLDEN"):
        golden.write_text(result.output, encoding="utf-8")
    assert _squash(result.output) == _squash(golden.read_text(encoding="utf-8"))


def test_synth_layout(synth_dir):
    for sub in ("mask", "skeleton", "image", "pred"):
        assert sorted(p.name for p in (synth_dir / sub).iterdir()) == [
            "tree_0003.pgm", "tree_0004.pgm", "tree_0005.pgm"
        ]
    thickness = read_aff(synth_dir / "thickness" / "tree_0003.aff", AffKind.REAL)
    assert thickness.shape == (64, 64)


def test_eval_identical_directories(runner, synth_dir, tmp_path):
    out = tmp_path / "report"
    result = runner.invoke(cli, [
        "eval", "--pred", str(synth_dir / "mask"), "--gt", str(synth_dir / "mask"),
        "-o", str(out), "--stratify", "--no-progress",
    ])
    assert result.exit_code == 0, result.output
    payload = json.loads((out / "report.json").read_text(encoding="utf-8"))
    summary = payload["aggregate"]
    for name in ("precision", "recall", "f1", "correctness", "completeness", "quality"):
        assert summary[name] == 1.0
    assert [r["id"] for r in payload["records"]] == ["tree_0003", "tree_0004", "tree_0005"]
    assert (out / "report.csv").read_text(encoding="utf-8").startswith("id,precision")


def test_eval_broken_prediction(runner, synth_dir, tmp_path):
    out = tmp_path / "report"
    result = runner.invoke(cli, [
        "eval", "--pred", str(synth_dir / "pred"), "--gt", str(synth_dir / "mask"),
        "-o", str(out), "--aggregate", "pooled", "--preset", "drive", "--no-progress",
    ])
    assert result.exit_code == 0, result.output
    summary = json.loads((out / "report.json").read_text(encoding="utf-8"))["aggregate"]
    assert summary["mode"] == "pooled"
    assert summary["completeness"] < 1.0


def test_eval_reports_identical_across_jobs(runner, synth_dir, tmp_path):
    outputs = []
    for jobs in ("1", "4"):
        out = tmp_path / f"report_j{jobs}"
        result = runner.invoke(cli, [
            "eval", "--pred", str(synth_dir / "pred"), "--gt", str(synth_dir / "mask"),
            "-o", str(out), "--stratify", "--jobs", jobs, "--no-progress",
        ])
        assert result.exit_code == 0, result.output
        outputs.append(((out / "report.json").read_bytes(), (out / "report.csv").read_bytes()))
    assert outputs[0] == outputs[1]


def test_selfcheck_output_is_reproducible(runner):
    first = runner.invoke(cli, ["selfcheck", "--seed", "5", "--jobs", "2"])
    second = runner.invoke(cli, ["selfcheck", "--seed", "5", "--jobs", "2"])
    assert first.exit_code == 0, first.output
    assert first.output == second.output


def test_eval_mismatched_directories(runner, synth_dir, tmp_path):
    other = tmp_path / "other"
    write_mask(other / "unrelated.pgm", Mask.empty(64, 64))
    result = runner.invoke(cli, [
        "eval", "--pred", str(other), "--gt", str(synth_dir / "mask"), "-o", str(tmp_path / "r"), "--no-progress",
    ])
    assert result.exit_code == 1


def test_eval_missing_directory(runner, tmp_path):
    result = runner.invoke(cli, [
        "eval", "--pred", str(tmp_path / "nope"), "--gt", str(tmp_path / "nope"), "--no-progress",
    ])
    assert result.exit_code == 2


def test_usage_error_exit_code(runner):
    result = runner.invoke(cli, ["eval", "--gt", "somewhere"])
    assert result.exit_code == 1


def test_eval_sweep(runner, synth_dir, tmp_path):
    root = tmp_path / "sweep"
    for tag in ("r1.3", "r0.4"):
        for path in (synth_dir / "mask").iterdir():
            target = root / tag / path.name
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_bytes(path.read_bytes())
    out = tmp_path / "curve"
    result = runner.invoke(cli, [
        "eval-sweep", "--pred-root", str(root), "--gt", str(synth_dir / "mask"),
        "--ratios", "1.3,0.4", "-o", str(out), "--no-progress",
    ])
    assert result.exit_code == 0, result.output
    curve = json.loads((out / "curve.json").read_text(encoding="utf-8"))["curve"]
    assert [row["ratio"] for row in curve] == [1.3, 0.4]
    assert all(row["quality"] == 1.0 for row in curve)


def test_affinity_command(runner, tmp_path):
    label = _label(tmp_path)
    result = runner.invoke(cli, ["affinity", str(label)])
    assert result.exit_code == 0, result.output
    field = read_aff(label.with_suffix(AFF_SUFFIX), AffKind.AFFINITY)
    assert field.slots == 24
    assert field.scales == (3, 9, 15)

    result = runner.invoke(cli, ["affinity", str(label), "--preset", "drive", "-o", str(tmp_path / "d.aff")])
    assert result.exit_code == 0, result.output
    assert read_aff(tmp_path / "d.aff").scales == (3, 5, 7)


def test_affinity_invalid_scales(runner, tmp_path):
    result = runner.invoke(cli, ["affinity", str(_label(tmp_path)), "--scales", "3,4"])
    assert result.exit_code == 1


def test_affinity_missing_file(runner, tmp_path):
    result = runner.invoke(cli, ["affinity", str(tmp_path / "missing.pgm")])
    assert result.exit_code == 2


def test_affinity_corrupt_file(runner, tmp_path):
    path = tmp_path / "ascii.pgm"
    path.write_bytes(b"P2\n1 1\n255\n0\n")
    result = runner.invoke(cli, ["affinity", str(path)])
    assert result.exit_code == 2


def test_loss_command(runner, tmp_path):
    gt = Mask((np.arange(20 * 24).reshape(20, 24) % 5 == 0).astype(np.uint8))
    label = write_mask(tmp_path / "label.pgm", gt)
    prob = write_image(tmp_path / "prob.pgm", Grayscale(rng_new(60).integers(20, 236, size=(20, 24)).astype(float)))
    pred_aff = write_aff(
        tmp_path / "pred.aff", AffinityField((3, 5), rng_new(61).uniform(0.05, 0.95, size=(16, 20, 24)))
    )
    result = runner.invoke(cli, [
        "loss", "--pred-seg", str(prob), "--gt-seg", str(label), "--pred-aff", str(pred_aff),
    ])
    assert result.exit_code == 0, result.output
    breakdown = json.loads(result.output)
    assert breakdown["lambda_b"] == 5.0
    expected = breakdown["bce_seg"] + breakdown["bce_aff"] + 5.0 * breakdown["acd"]
    assert breakdown["total"] == pytest.approx(expected, rel=1e-12)


def test_loss_layout_mismatch(runner, tmp_path):
    label = _label(tmp_path)
    prob = write_image(tmp_path / "prob.pgm", Grayscale(np.full((20, 24), 128.0)))
    pred_aff = write_aff(tmp_path / "pred.aff", AffinityField((3,), np.full((8, 20, 24), 0.5)))
    gt_aff = write_aff(tmp_path / "gt.aff", compute_affinity(Mask.empty(20, 24), NeighborhoodSpec((3, 5))))
    result = runner.invoke(cli, [
        "loss", "--pred-seg", str(prob), "--gt-seg", str(label),
        "--pred-aff", str(pred_aff), "--gt-aff", str(gt_aff),
    ])
    assert result.exit_code == 1


def test_strengthen_command(runner, tmp_path):
    rng = rng_new(62)
    features = write_aff(tmp_path / "f.aff", FeatureMap(rng.normal(size=(2, 10, 12))))
    field = write_aff(tmp_path / "a.aff", AffinityField((3, 5), rng.random((16, 10, 12))))
    weights = write_aff(tmp_path / "w.aff", ScaleWeightMap((3, 5), rng.random((2, 10, 12))))
    out = tmp_path / "out.aff"
    result = runner.invoke(cli, [
        "strengthen", "--features", str(features), "--aff", str(field), "--weights", str(weights), "-o", str(out),
    ])
    assert result.exit_code == 0, result.output
    assert read_aff(out, AffKind.FEATURE).channels == 2

    result = runner.invoke(cli, ["strengthen", "--features", str(features), "--aff", str(field), "-o", str(out)])
    assert result.exit_code == 1


def test_perturb_with_preset(runner, tmp_path):
    image = write_image(tmp_path / "in" / "angio.pgm", Grayscale(rng_new(63).uniform(0, 255, size=(16, 16))))
    out = tmp_path / "sweep"
    result = runner.invoke(cli, ["perturb", str(image.parent), "-o", str(out), "--preset", "drive", "--no-progress"])
    assert result.exit_code == 0, result.output
    names = sorted(p.name for p in out.iterdir())
    assert len(names) == 6
    assert "angio_r1.3.pgm" in names and "angio_r0.2.pgm" in names


def test_perturb_invalid_ratio(runner, tmp_path):
    image = write_image(tmp_path / "angio.pgm", Grayscale(np.zeros((4, 4))))
    result = runner.invoke(cli, ["perturb", str(image), "-o", str(tmp_path / "o"), "--ratios", "1.2,-1", "--no-progress"])
    assert result.exit_code == 1


def test_config_file(runner, synth_dir, tmp_path):
    out = tmp_path / "report"
    config = tmp_path / "eval.conf"
    config.write_text(
        f"pred={synth_dir / 'mask'}\ngt={synth_dir / 'mask'}\nout={out}\nno-progress=true\n", encoding="utf-8"
    )
    result = runner.invoke(cli, ["--config", str(config), "eval"])
    assert result.exit_code == 0, result.output
    assert (out / "report.json").exists()


def test_config_unknown_key(runner, tmp_path):
    config = tmp_path / "bad.conf"
    config.write_text("colour=blue\n", encoding="utf-8")
    result = runner.invoke(cli, ["--config", str(config), "eval", "--pred", "a", "--gt", "b"])
    assert result.exit_code == 1


def test_config_missing_file(runner, tmp_path):
    result = runner.invoke(cli, ["--config", str(tmp_path / "none.conf"), "info"])
    assert result.exit_code == 2


def test_selfcheck(runner):
    result = runner.invoke(cli, ["selfcheck", "--seed", "0", "--jobs", "4"])
    assert result.exit_code == 0, result.output
    assert result.output.count("PASS") == 12
    assert "FAIL" not in result.output
