"""
输入验证模块
包含尺度、比例、阈值与路径的验证功能
"""

from .input_validator import (
    validate_scales,
    validate_ratios,
    validate_threshold,
    validate_input_file,
    validate_output_path,
    SUPPORTED_IMAGE_FORMATS,
    AFF_SUFFIX,
)

__all__ = [
    "validate_scales",
    "validate_ratios",
    "validate_threshold",
    "validate_input_file",
    "validate_output_path",
    "SUPPORTED_IMAGE_FORMATS",
    "AFF_SUFFIX",
]
