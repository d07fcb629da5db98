"""
图像读写

PGM（P5，8 位）由本模块直接解析；PNG 通过 OpenCV 读写。
标签图落盘为 {0, 255}，内存中为 {0, 1}。
"""
from pathlib import Path
from typing import Tuple, Union
import logging

import cv2
import numpy as np

from ..core.base import CorruptFile, InvalidValue, UnsupportedFormat, VesselIOError
from ..core.types import Grayscale, Mask, ProbMap
from ..validators.input_validator import SUPPORTED_IMAGE_FORMATS, validate_input_file, validate_output_path

logger = logging.getLogger(__name__)

_WHITESPACE = b" \t\n\r\v\f"


def _read_token(raw: bytes, pos: int, path: Path) -> Tuple[bytes, int]:
    # 跳过空白与 '#' 注释，返回下一个头部字段
    while pos < len(raw):
        if raw[pos:pos + 1] == b"#":
            end = raw.find(b"\n", pos)
            pos = len(raw) if end < 0 else end + 1
        elif raw[pos] in _WHITESPACE:
            pos += 1
        else:
            break
    start = pos
    while pos < len(raw) and raw[pos] not in _WHITESPACE and raw[pos:pos + 1] != b"#":
        pos += 1
    if start == pos:
        raise CorruptFile(f"PGM 头部不完整: {path}")
    return raw[start:pos], pos


def _parse_pgm(raw: bytes, path: Path) -> np.ndarray:
    magic = raw[:2]
    if magic == b"P2":
        raise UnsupportedFormat(f"不支持 ASCII PGM (P2): {path}")
    if magic != b"P5":
        if magic[:1] == b"P":
            raise UnsupportedFormat(f"不支持的 Netpbm 格式 {magic.decode(errors='replace')}: {path}")
        raise CorruptFile(f"不是 PGM 文件: {path}")

    pos = 2
    fields = []
    for _ in range(3):
        token, pos = _read_token(raw, pos, path)
        try:
            fields.append(int(token))
        except ValueError:
            raise CorruptFile(f"PGM 头部字段无效 '{token.decode(errors='replace')}': {path}")
    width, height, maxval = fields
    if width <= 0 or height <= 0 or maxval <= 0:
        raise CorruptFile(f"PGM 头部数值无效 ({width}x{height}, maxval={maxval}): {path}")
    if maxval > 255:
        raise UnsupportedFormat(f"只支持 8 位 PGM，maxval={maxval}: {path}")
    if pos >= len(raw) or raw[pos] not in _WHITESPACE:
        raise CorruptFile(f"PGM 头部缺少分隔符: {path}")
    pos += 1

    expected = width * height
    payload = raw[pos:pos + expected]
    if len(payload) < expected:
        raise CorruptFile(f"PGM 数据不完整（{len(payload)}/{expected} 字节）: {path}")
    data = np.frombuffer(payload, dtype=np.uint8).reshape(height, width).astype(np.float64)
    if maxval != 255:
        data = data * (255.0 / maxval)
    return data


def _read_png(path: Path) -> np.ndarray:
    image = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if image is None:
        raise CorruptFile(f"无法解码 PNG: {path}")
    if image.dtype != np.uint8:
        raise UnsupportedFormat(f"只支持 8 位 PNG，实际为 {image.dtype}: {path}")
    return image


def _read_raw(path: Path) -> np.ndarray:
    path = Path(path)
    validate_input_file(path)
    suffix = path.suffix.lower()
    if suffix not in SUPPORTED_IMAGE_FORMATS:
        raise UnsupportedFormat(f"不支持的图像格式 {suffix}（支持: {', '.join(SUPPORTED_IMAGE_FORMATS)}）: {path}")
    if suffix == ".pgm":
        try:
            raw = path.read_bytes()
        except OSError as e:
            raise VesselIOError(f"读取失败 {path}: {e}")
        return _parse_pgm(raw, path)
    return _read_png(path)


def read_image(path: Union[str, Path]) -> Grayscale:
    """
    读取灰度图像（彩色 PNG 按亮度转换）

    Raises:
        UnsupportedFormat: P2 / 16 位 / 未知扩展名
        CorruptFile: 头部或数据损坏
    """
    image = _read_raw(Path(path))
    if image.ndim == 3:
        code = cv2.COLOR_BGRA2GRAY if image.shape[2] == 4 else cv2.COLOR_BGR2GRAY
        image = cv2.cvtColor(image, code)
    return Grayscale(image.astype(np.float64))


def read_color_channels(path: Union[str, Path]) -> Tuple[Grayscale, ...]:
    """读取彩色图像，按 R, G, B 顺序返回各通道；灰度图返回单通道"""
    image = _read_raw(Path(path))
    if image.ndim == 2:
        return (Grayscale(image.astype(np.float64)),)
    rgb = cv2.cvtColor(image[:, :, :3], cv2.COLOR_BGR2RGB)
    return tuple(Grayscale(rgb[:, :, i].astype(np.float64)) for i in range(3))


def read_mask(path: Union[str, Path], threshold: float = 0.5) -> Mask:
    """读取标签图：value / 255 >= threshold 视为血管"""
    image = read_image(path)
    return Mask(image.data / 255.0 >= threshold)


def read_prob_map(path: Union[str, Path]) -> ProbMap:
    """读取 8 位概率图（value / 255）"""
    return ProbMap(read_image(path).data / 255.0)


def _to_bytes(img: Union[Grayscale, Mask]) -> np.ndarray:
    if isinstance(img, Mask):
        return (img.data * 255).astype(np.uint8)
    if not img.in_display_range():
        raise InvalidValue("图像取值超出 [0, 255]，写文件前需要截断")
    return np.rint(img.data).astype(np.uint8)


def _write_encoded(path: Path, pixels: np.ndarray) -> Path:
    validate_output_path(path)
    suffix = path.suffix.lower()
    if suffix == ".pgm":
        if pixels.ndim != 2:
            raise UnsupportedFormat(f"PGM 只能保存单通道图像: {path}")
        height, width = pixels.shape
        header = f"P5\n{width} {height}\n255\n".encode("ascii")
        try:
            path.write_bytes(header + pixels.tobytes())
        except OSError as e:
            raise VesselIOError(f"写入失败 {path}: {e}")
        return path
    if suffix == ".png":
        if not cv2.imwrite(str(path), pixels):
            raise VesselIOError(f"写入失败: {path}")
        return path
    raise UnsupportedFormat(f"不支持的输出格式 {suffix}: {path}")


def write_image(path: Union[str, Path], img: Union[Grayscale, Mask]) -> Path:
    """
    写入灰度图像或标签图（按扩展名选择 PGM / PNG）

    Grayscale 取整到 8 位；Mask 写为 {0, 255}。
    """
    path = Path(path)
    logger.debug(f"写入图像: {path}")
    return _write_encoded(path, _to_bytes(img))


def write_mask(path: Union[str, Path], mask: Mask) -> Path:
    return write_image(path, mask)


def write_color(path: Union[str, Path], channels: Tuple[Grayscale, ...]) -> Path:
    """按 R, G, B 通道写入彩色 PNG"""
    path = Path(path)
    if len(channels) == 1:
        return write_image(path, channels[0])
    rgb = np.stack([_to_bytes(channel) for channel in channels], axis=-1)
    return _write_encoded(path, cv2.cvtColor(rgb, cv2.COLOR_RGB2BGR))
