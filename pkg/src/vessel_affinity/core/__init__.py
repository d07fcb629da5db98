"""
核心处理逻辑模块
包含异常体系、批处理器基类与稠密数组类型
"""

from .base import (
    ProcessorBase,
    ProgressCallback,
    VesselAffinityError,
    VesselValidationError,
    VesselIOError,
)

__all__ = [
    "ProcessorBase",
    "ProgressCallback",
    "VesselAffinityError",
    "VesselValidationError",
    "VesselIOError",
]
