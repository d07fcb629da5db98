"""对比度扫描处理器 - 每个比例输出一张扰动图像"""
from pathlib import Path
from typing import List, Optional
import logging

from ..core.base import InvalidValue, ProcessorBase, ProgressCallback
from ..core.perturb import CHANNEL_MODES, ContrastSweep, adjust_contrast, adjust_contrast_channels, ratio_tag
from ..utils.file_utils import find_image_files
from ..utils.image_io import read_color_channels, read_image, write_color, write_image

logger = logging.getLogger(__name__)


class ContrastSweepProcessor(ProcessorBase):
    """
    对比度扫描

    输入可以是单个图像文件或目录；输出文件名为 <stem>_r<ratio><suffix>，
    写文件时截断到 [0, 255]。
    """

    def __init__(
        self,
        input_path: Path,
        output_path: Path,
        contrast_sweep: ContrastSweep,
        channel_mode: str = "luminance",
        jobs: int = 1,
    ):
        super().__init__(input_path, output_path)
        if channel_mode not in CHANNEL_MODES:
            raise InvalidValue(f"未知的通道模式: {channel_mode}（可选: {', '.join(CHANNEL_MODES)}）")
        self.contrast_sweep = contrast_sweep
        self.channel_mode = channel_mode
        self.jobs = jobs
        self.outputs: List[Path] = []

    def _inputs(self) -> List[Path]:
        if self.input_path.is_dir():
            return find_image_files(self.input_path)
        return [self.input_path]

    def _output_name(self, source: Path, ratio: float) -> Path:
        suffix = source.suffix.lower()
        if self.channel_mode == "per-channel":
            suffix = ".png"
        return self.output_path / f"{source.stem}_{ratio_tag(ratio)}{suffix}"

    def _perturb_file(self, source: Path) -> List[Path]:
        written = []
        if self.channel_mode == "per-channel":
            channels = read_color_channels(source)
            for ratio in self.contrast_sweep.ratios:
                adjusted = adjust_contrast_channels(channels, ratio, clamp=True)
                written.append(write_color(self._output_name(source, ratio), adjusted))
        else:
            image = read_image(source)
            for ratio in self.contrast_sweep.ratios:
                adjusted = adjust_contrast(image, ratio, clamp=True)
                written.append(write_image(self._output_name(source, ratio), adjusted))
        logger.debug(f"{source.name}: 写出 {len(written)} 张扰动图像")
        return written

    def process(self, progress_callback: Optional[ProgressCallback] = None, **kwargs) -> Path:
        sources = self._inputs()
        if not sources:
            raise InvalidValue(f"没有可处理的图像: {self.input_path}")
        self._ensure_output_dir()
        logger.info(f"对比度扫描: {len(sources)} 张图像 x {len(self.contrast_sweep)} 个比例")
        results = self._run_jobs(sources, self._perturb_file, self.jobs, progress_callback)
        self.outputs = sorted(path for batch in results for path in batch)
        return self.output_path
