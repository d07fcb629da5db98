"""基础处理器抽象类与异常体系"""
from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor, as_completed
from pathlib import Path
from typing import Callable, List, Optional, Sequence, TypeVar
import logging

logger = logging.getLogger(__name__)

ProgressCallback = Callable[[float], None]

T = TypeVar("T")
R = TypeVar("R")


class ProcessorBase(ABC):
    """目录级批处理器基类（eval / perturb / synth）"""

    def __init__(self, input_path: Optional[Path], output_path: Optional[Path] = None):
        """
        初始化批处理器

        Args:
            input_path: 输入文件或目录路径（synth 无输入时为 None）
            output_path: 输出文件或目录路径（可选）
        """
        self.input_path = Path(input_path) if input_path else None
        self.output_path = Path(output_path) if output_path else None
        self._validate_input()

    def _validate_input(self) -> None:
        """验证输入路径"""
        if self.input_path is not None and not self.input_path.exists():
            raise VesselIOError(f"输入路径不存在: {self.input_path}")

    @abstractmethod
    def process(self, progress_callback: Optional[ProgressCallback] = None, **kwargs) -> Path:
        """
        执行处理

        Args:
            progress_callback: 进度回调函数，参数为 0.0-1.0 的进度值
            **kwargs: 处理参数

        Returns:
            输出路径
        """
        pass

    def _ensure_output_dir(self) -> None:
        """确保输出目录存在"""
        if self.output_path:
            self.output_path.mkdir(parents=True, exist_ok=True)

    @staticmethod
    def _run_jobs(
        tasks: Sequence[T],
        worker: Callable[[T], R],
        jobs: int = 1,
        progress_callback: Optional[ProgressCallback] = None,
    ) -> List[R]:
        """
        并发执行任务

        Args:
            tasks: 任务列表
            worker: 单个任务的处理函数
            jobs: 最大线程数
            progress_callback: 进度回调（按完成数量）

        Returns:
            与 tasks 顺序一致的结果列表（与完成顺序无关）
        """
        results: List[Optional[R]] = [None] * len(tasks)
        if not tasks:
            return []
        with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
            futures = {pool.submit(worker, task): index for index, task in enumerate(tasks)}
            for done, future in enumerate(as_completed(futures), start=1):
                results[futures[future]] = future.result()
                if progress_callback:
                    progress_callback(done / len(tasks))
        return results


class VesselAffinityError(Exception):
    """工具库错误基类"""
    pass


class VesselValidationError(VesselAffinityError):
    """输入验证错误（CLI 退出码 1）"""
    pass


class VesselIOError(VesselAffinityError):
    """文件读写错误（CLI 退出码 2）"""
    pass


class ShapeMismatch(VesselValidationError):
    """两个网格的宽高不一致"""

    def __init__(self, shape_a, shape_b, what: str = "grid"):
        self.shape_a = tuple(shape_a)
        self.shape_b = tuple(shape_b)
        super().__init__(f"{what} 尺寸不一致: {self.shape_a} vs {self.shape_b}")


class LayoutMismatch(VesselValidationError):
    """亲和场槽位布局不一致"""
    pass


class ScaleMismatch(VesselValidationError):
    """权重图尺度列表与亲和场尺度列表不一致"""
    pass


class InvalidScale(VesselValidationError):
    """尺度必须为 >= 3 的奇数且严格递增"""
    pass


class InvalidRatio(VesselValidationError):
    """对比度比例必须为正数"""
    pass


class CanvasTooSmall(VesselValidationError):
    """合成画布小于 32x32"""
    pass


class InvalidValue(VesselValidationError):
    """数据包含非有限值或超出定义域"""
    pass


class DatasetMismatch(VesselValidationError):
    """预测目录与真值目录的文件名（stem）不匹配"""
    pass


class ConfigError(VesselValidationError):
    """配置文件或预设错误"""
    pass


class UnsupportedFormat(VesselIOError):
    """不支持的图像格式（例如 ASCII PGM、16 位 PGM）"""
    pass


class CorruptFile(VesselIOError):
    """文件损坏或魔数错误"""
    pass


class VersionMismatch(VesselIOError):
    """AFF 容器版本不匹配"""
    pass


class TruncatedPayload(VesselIOError):
    """AFF 容器数据长度不足"""
    pass


class ReportWriteError(VesselIOError):
    """评估报告写入失败"""
    pass
