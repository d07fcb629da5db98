"""文件操作工具"""
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from ..core.base import DatasetMismatch, VesselIOError
from ..validators.input_validator import SUPPORTED_IMAGE_FORMATS


def ensure_directory(path: Path) -> Path:
    """
    确保目录存在，如果不存在则创建

    Args:
        path: 目录路径

    Returns:
        目录路径
    """
    path.mkdir(parents=True, exist_ok=True)
    return path


def find_image_files(directory: Path, extensions: Optional[List[str]] = None) -> List[Path]:
    """
    查找目录中的图像文件

    Args:
        directory: 目录路径
        extensions: 文件扩展名列表，默认为 PGM / PNG

    Returns:
        按文件名排序的图像路径列表
    """
    if not directory.is_dir():
        raise VesselIOError(f"不是目录: {directory}")
    if extensions is None:
        extensions = SUPPORTED_IMAGE_FORMATS

    wanted = {ext.lower() for ext in extensions}
    return sorted(p for p in directory.iterdir() if p.is_file() and p.suffix.lower() in wanted)


def _index_by_stem(files: List[Path], label: str) -> Dict[str, Path]:
    index: Dict[str, Path] = {}
    for path in files:
        if path.stem in index:
            raise DatasetMismatch(f"{label} 目录中存在同名文件: {index[path.stem].name}, {path.name}")
        index[path.stem] = path
    return index


def pair_by_stem(pred_dir: Path, gt_dir: Path) -> List[Tuple[str, Path, Path]]:
    """
    按文件名（stem）配对预测与真值

    Returns:
        [(image_id, pred_path, gt_path), ...]，按 image_id 排序

    Raises:
        DatasetMismatch: 两个目录的 stem 集合不一致或目录为空
    """
    preds = _index_by_stem(find_image_files(pred_dir), "预测")
    gts = _index_by_stem(find_image_files(gt_dir), "真值")

    missing_gt = sorted(set(preds) - set(gts))
    missing_pred = sorted(set(gts) - set(preds))
    if missing_gt or missing_pred:
        details = []
        if missing_gt:
            details.append(f"缺少真值: {', '.join(missing_gt[:5])}")
        if missing_pred:
            details.append(f"缺少预测: {', '.join(missing_pred[:5])}")
        raise DatasetMismatch(f"{pred_dir} 与 {gt_dir} 文件不匹配（{'; '.join(details)}）")
    if not preds:
        raise DatasetMismatch(f"目录中没有图像文件: {pred_dir}")

    return [(stem, preds[stem], gts[stem]) for stem in sorted(preds)]
