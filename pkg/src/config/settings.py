"""配置管理模块"""
import os
from pathlib import Path
from typing import Any, Dict, Optional, Tuple
from dotenv import dotenv_values, load_dotenv

from vessel_affinity.core.perturb import DRIVE_RATIOS, XCAD_RATIOS

# 加载环境变量
load_dotenv()


def _default_jobs() -> int:
    """默认并发数：VESSAFF_JOBS 环境变量，否则为逻辑核心数"""
    value = os.getenv("VESSAFF_JOBS")
    if value:
        try:
            return max(1, int(value))
        except ValueError:
            pass
    return os.cpu_count() or 1


class Settings:
    """应用配置类"""

    # 项目根目录
    PROJECT_ROOT: Path = Path(__file__).parent.parent.parent

    # 默认输出目录
    DEFAULT_OUTPUT_DIR: Path = PROJECT_ROOT / "output"

    # 日志配置
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO")

    # 并发配置（eval / perturb）
    DEFAULT_JOBS: int = _default_jobs()

    # 亲和场配置：XCAD 使用 [3, 9, 15]
    DEFAULT_SCALES: Tuple[int, ...] = (3, 9, 15)

    # 损失函数配置
    LAMBDA_B: float = 5.0
    LOSS_EPSILON: float = 1e-7

    # 拓扑评估配置
    BUFFER_THRESHOLD: float = 2.0        # DRIVE 为 1，其余数据集为 2
    THICKNESS_THRESHOLD: float = 7.0     # 细血管 / 粗血管分界（像素）
    THIN_SEARCH_RANGE: float = 5.0
    THICK_SEARCH_RANGE: float = 10.0
    BINARIZE_THRESHOLD: float = 0.5

    # 数据集预设：尺度列表、缓冲区阈值、对比度比例
    DATASET_PRESETS: Dict[str, Dict[str, Any]] = {
        "xcad": {
            "scales": (3, 9, 15),
            "threshold": 2.0,
            "ratios": XCAD_RATIOS,
        },
        "drive": {
            "scales": (3, 5, 7),
            "threshold": 1.0,
            "ratios": DRIVE_RATIOS,
        },
        # PV / DSA 未给出尺度，沿用 XCAD 的配置
        "pv": {
            "scales": (3, 9, 15),
            "threshold": 2.0,
            "ratios": XCAD_RATIOS,
        },
        "dsa": {
            "scales": (3, 9, 15),
            "threshold": 2.0,
            "ratios": XCAD_RATIOS,
        },
    }

    @classmethod
    def preset(cls, name: Optional[str]) -> Dict[str, Any]:
        """
        获取数据集预设

        Args:
            name: 预设名称（xcad/drive/pv/dsa），None 时返回空字典

        Returns:
            预设参数字典
        """
        if not name:
            return {}
        key = name.lower()
        if key not in cls.DATASET_PRESETS:
            from vessel_affinity.core.base import ConfigError
            raise ConfigError(
                f"未知的数据集预设: {name}。可选值: {', '.join(sorted(cls.DATASET_PRESETS))}"
            )
        return dict(cls.DATASET_PRESETS[key])


def load_flat_config(path: Path) -> Dict[str, str]:
    """
    读取扁平 key=value 配置文件（与命令行参数一一对应）

    键名允许使用 '-' 或 '_'，统一转换为 click 参数名（下划线）。

    Args:
        path: 配置文件路径

    Returns:
        参数名 -> 字符串值
    """
    values = dotenv_values(path)
    config: Dict[str, str] = {}
    for key, value in values.items():
        if value is None:
            continue
        config[key.strip().lstrip("-").replace("-", "_").lower()] = value.strip()
    return config


# 全局配置实例
settings = Settings()
