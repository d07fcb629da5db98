"""合成数据 -> 退化 -> 拓扑评估 全流程"""
from pathlib import Path
import sys

import pytest

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent.parent / "src"))

from vessel_affinity.core.metrics import evaluate_topology
from vessel_affinity.core.perturb import ContrastSweep
from vessel_affinity.core.synthgen import TreeParams, degrade, generate_tree
from vessel_affinity.processors import (
    ContrastSweepProcessor,
    DegradeOptions,
    EvaluationProcessor,
    SelfCheckRunner,
    SynthesisProcessor,
)
from vessel_affinity.processors.self_check import CHECKS, check_contrast, check_synthetic_pipeline


def _params(seed):
    return TreeParams(
        seed=seed,
        canvas=(128, 128),
        branch_count=15,
        width_range=(1, 3),
        segment_length_range=(15.0, 30.0),
    )


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_completeness_drops_with_breaks(seed):
    gt = generate_tree(_params(seed)).mask
    perfect, _ = evaluate_topology(gt, gt, 2.0)
    assert (perfect.completeness, perfect.correctness, perfect.quality) == (1.0, 1.0, 1.0)

    completeness = [
        evaluate_topology(degrade(gt, seed, break_count=k), gt, 2.0)[0].completeness for k in (0, 2, 4, 8)
    ]
    assert completeness[0] == 1.0
    assert all(a > b for a, b in zip(completeness, completeness[1:])), completeness


def test_dilation_keeps_completeness_and_lowers_correctness():
    gt = generate_tree(_params(4)).mask
    topo, _ = evaluate_topology(degrade(gt, 4, dilation=2, noise_rate=0.01), gt, 2.0)
    assert topo.completeness > 0.9
    assert topo.correctness < 1.0


def test_synthesis_then_evaluation(tmp_path):
    synth = SynthesisProcessor(
        tmp_path / "synth", _params(10), count=2, degrade_options=DegradeOptions(breaks=4), jobs=2
    )
    synth.process()
    assert synth.fixture_ids == ["tree_0010", "tree_0011"]

    evaluation = EvaluationProcessor(tmp_path / "synth" / "pred", tmp_path / "synth" / "mask", tmp_path / "report")
    progress = []
    evaluation.process(progress_callback=progress.append)
    assert progress[-1] == 1.0
    assert [r.image_id for r in evaluation.records] == synth.fixture_ids
    assert evaluation.summary["completeness"] < 1.0
    assert (tmp_path / "report" / "report.json").exists()


def test_contrast_sweep_over_synthetic_images(tmp_path):
    synth = SynthesisProcessor(tmp_path / "synth", TreeParams(seed=20), count=2, noise_sigma=5.0)
    synth.process()
    sweep = ContrastSweepProcessor(tmp_path / "synth" / "image", tmp_path / "sweep", ContrastSweep((1.5, 0.8)))
    sweep.process()
    assert [p.name for p in sweep.outputs] == [
        "tree_0020_r0.8.pgm", "tree_0020_r1.5.pgm", "tree_0021_r0.8.pgm", "tree_0021_r1.5.pgm",
    ]


def test_self_check_pipeline_entry():
    assert check_synthetic_pipeline(0).passed


def test_self_check_contrast_covers_published_ratios():
    result = check_contrast(0)
    assert result.passed, result.detail
    assert result.detail.startswith("比例列表 OK")


def test_self_check_runner():
    runner = SelfCheckRunner(seed=0, jobs=4)
    results = runner.run()
    assert len(results) == len(CHECKS)
    assert runner.passed, [r.line() for r in results if not r.passed]
