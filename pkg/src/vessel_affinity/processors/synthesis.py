"""合成数据处理器 - 批量生成血管树测试数据"""
from dataclasses import dataclass, replace
from pathlib import Path
from typing import List, Optional
import logging

from ..core.base import InvalidValue, ProcessorBase, ProgressCallback
from ..core.synthgen import TreeParams, degrade, generate_tree, render_intensity
from ..utils.aff_container import write_aff
from ..utils.image_io import write_image, write_mask

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DegradeOptions:
    """伪预测的退化参数；全部为 0 时不输出伪预测"""

    breaks: int = 0
    dilation: int = 0
    noise_rate: float = 0.0

    @property
    def enabled(self) -> bool:
        return bool(self.breaks or self.dilation or self.noise_rate)


class SynthesisProcessor(ProcessorBase):
    """
    合成数据生成

    输出目录结构（<id> = tree_<seed>）:
        mask/<id>.pgm       血管标签
        skeleton/<id>.pgm   生成器中心线
        thickness/<id>.aff  厚度图（RealMap）
        image/<id>.pgm      伪造影图像
        pred/<id>.pgm       退化后的伪预测（仅在给出退化参数时）
    """

    def __init__(
        self,
        output_path: Path,
        params: TreeParams,
        count: int = 1,
        contrast: float = 0.5,
        noise_sigma: float = 0.0,
        degrade_options: Optional[DegradeOptions] = None,
        jobs: int = 1,
    ):
        super().__init__(None, output_path)
        if count < 1:
            raise InvalidValue(f"count 必须 >= 1: {count}")
        self.params = params
        self.count = count
        self.contrast = contrast
        self.noise_sigma = noise_sigma
        self.degrade_options = degrade_options or DegradeOptions()
        self.jobs = jobs
        self.fixture_ids: List[str] = []

    def _write_fixture(self, seed: int) -> str:
        params = replace(self.params, seed=seed)
        fixture_id = f"tree_{seed:04d}"
        tree = generate_tree(params)
        image = render_intensity(tree.mask, seed, self.contrast, self.noise_sigma)

        write_mask(self.output_path / "mask" / f"{fixture_id}.pgm", tree.mask)
        write_mask(self.output_path / "skeleton" / f"{fixture_id}.pgm", tree.skeleton)
        write_aff(self.output_path / "thickness" / f"{fixture_id}.aff", tree.thickness)
        write_image(self.output_path / "image" / f"{fixture_id}.pgm", image)

        options = self.degrade_options
        if options.enabled:
            pred = degrade(tree.mask, seed, options.breaks, options.dilation, options.noise_rate)
            write_mask(self.output_path / "pred" / f"{fixture_id}.pgm", pred)
        return fixture_id

    def process(self, progress_callback: Optional[ProgressCallback] = None, **kwargs) -> Path:
        self._ensure_output_dir()
        seeds = [self.params.seed + offset for offset in range(self.count)]
        logger.info(f"生成 {len(seeds)} 个合成样本 -> {self.output_path}")
        self.fixture_ids = self._run_jobs(seeds, self._write_fixture, self.jobs, progress_callback)
        return self.output_path
