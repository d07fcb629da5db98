"""
工具函数模块
包含图像与 AFF 容器读写、文件配对、评估报告等通用工具
"""

from .file_utils import (
    ensure_directory,
    find_image_files,
    pair_by_stem,
)
from .image_io import (
    read_image,
    read_mask,
    read_prob_map,
    read_color_channels,
    write_image,
    write_mask,
    write_color,
)
from .aff_container import (
    AffKind,
    read_aff,
    write_aff,
)
from .report import (
    EvalRecord,
    aggregate,
    robustness_curve,
    write_report,
    write_curve,
)

__all__ = [
    "ensure_directory",
    "find_image_files",
    "pair_by_stem",
    "read_image",
    "read_mask",
    "read_prob_map",
    "read_color_channels",
    "write_image",
    "write_mask",
    "write_color",
    "AffKind",
    "read_aff",
    "write_aff",
    "EvalRecord",
    "aggregate",
    "robustness_curve",
    "write_report",
    "write_curve",
]
