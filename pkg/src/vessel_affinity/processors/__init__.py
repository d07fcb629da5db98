"""
批处理器模块
包含评估、对比度扫描、合成数据生成与自检
"""

from .evaluation import EvaluationOptions, EvaluationProcessor, SweepEvaluationProcessor, evaluate_pair
from .contrast_sweep import ContrastSweepProcessor
from .synthesis import DegradeOptions, SynthesisProcessor
from .self_check import CheckResult, SelfCheckRunner

__all__ = [
    "EvaluationOptions",
    "EvaluationProcessor",
    "SweepEvaluationProcessor",
    "evaluate_pair",
    "ContrastSweepProcessor",
    "DegradeOptions",
    "SynthesisProcessor",
    "CheckResult",
    "SelfCheckRunner",
]
