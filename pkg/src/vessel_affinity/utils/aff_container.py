"""
AFF 二进制容器

布局（全部小端）:
    magic      4 字节  b"VAFF"
    version    u16
    kind       u8      0=AffinityField 1=FeatureMap 2=ScaleWeightMap 3=RealMap
    dims       3 x u32 (通道/槽位数, height, width)
    scales     u16 个数 + 每个尺度一个 u16（方向顺序隐含为 L, R, T, B, LT, LB, RT, RB）
    payload    float32，槽位/通道优先，行优先
"""
from enum import IntEnum
from pathlib import Path
from typing import Optional, Union
import struct
import logging

import numpy as np

from ..core.base import CorruptFile, TruncatedPayload, UnsupportedFormat, VersionMismatch, VesselIOError
from ..core.types import AffinityField, FeatureMap, RealMap, ScaleWeightMap
from ..validators.input_validator import validate_input_file, validate_output_path

logger = logging.getLogger(__name__)

MAGIC = b"VAFF"
AFF_VERSION = 1
_FIXED = struct.Struct("<4sHB3I")
_COUNT = struct.Struct("<H")

AffPayload = Union[AffinityField, FeatureMap, ScaleWeightMap, RealMap]


class AffKind(IntEnum):
    AFFINITY = 0
    FEATURE = 1
    WEIGHT = 2
    REAL = 3


def _kind_of(obj: AffPayload) -> AffKind:
    if isinstance(obj, AffinityField):
        return AffKind.AFFINITY
    if isinstance(obj, FeatureMap):
        return AffKind.FEATURE
    if isinstance(obj, ScaleWeightMap):
        return AffKind.WEIGHT
    if isinstance(obj, RealMap):
        return AffKind.REAL
    raise UnsupportedFormat(f"无法写入 AFF 容器的类型: {type(obj).__name__}")


def encode_aff(obj: AffPayload) -> bytes:
    """编码为 AFF 字节串"""
    kind = _kind_of(obj)
    data = obj.data if obj.data.ndim == 3 else obj.data[np.newaxis]
    scales = tuple(getattr(obj, "scales", ()))
    header = _FIXED.pack(MAGIC, AFF_VERSION, int(kind), *data.shape)
    layout = _COUNT.pack(len(scales)) + struct.pack(f"<{len(scales)}H", *scales)
    return header + layout + data.astype("<f4").tobytes()


def decode_aff(raw: bytes, source: str = "<bytes>") -> AffPayload:
    """
    解码 AFF 字节串

    Raises:
        CorruptFile: 魔数错误、未知类型或布局不一致
        VersionMismatch: 版本不一致
        TruncatedPayload: 数据长度不足
    """
    if len(raw) < 4 or raw[:4] != MAGIC:
        raise CorruptFile(f"AFF 魔数错误: {source}")
    if len(raw) < _FIXED.size + _COUNT.size:
        raise TruncatedPayload(f"AFF 头部不完整: {source}")
    _, version, kind, channels, height, width = _FIXED.unpack_from(raw, 0)
    if version != AFF_VERSION:
        raise VersionMismatch(f"AFF 版本 {version} 与支持的版本 {AFF_VERSION} 不一致: {source}")
    try:
        kind = AffKind(kind)
    except ValueError:
        raise CorruptFile(f"未知的 AFF 类型 {kind}: {source}")

    offset = _FIXED.size
    (count,) = _COUNT.unpack_from(raw, offset)
    offset += _COUNT.size
    if len(raw) < offset + 2 * count:
        raise TruncatedPayload(f"AFF 尺度列表不完整: {source}")
    scales = struct.unpack_from(f"<{count}H", raw, offset)
    offset += 2 * count

    expected = channels * height * width * 4
    payload = raw[offset:]
    if len(payload) < expected:
        raise TruncatedPayload(f"AFF 数据不完整（{len(payload)}/{expected} 字节）: {source}")
    if len(payload) > expected:
        raise CorruptFile(f"AFF 数据末尾有多余字节: {source}")

    data = np.frombuffer(payload, dtype="<f4").astype(np.float64).reshape(channels, height, width)
    if kind is AffKind.AFFINITY:
        if channels != 8 * count:
            raise CorruptFile(f"AFF 槽位数 {channels} 与尺度列表 {list(scales)} 不一致: {source}")
        return AffinityField(scales, data)
    if kind is AffKind.WEIGHT:
        if channels != count:
            raise CorruptFile(f"AFF 权重平面数 {channels} 与尺度列表 {list(scales)} 不一致: {source}")
        return ScaleWeightMap(scales, data)
    if kind is AffKind.FEATURE:
        return FeatureMap(data)
    if channels != 1:
        raise CorruptFile(f"RealMap 只能有 1 个平面，实际为 {channels}: {source}")
    return RealMap(data[0])


def write_aff(path: Union[str, Path], obj: AffPayload) -> Path:
    """写入 AFF 容器"""
    path = Path(path)
    validate_output_path(path)
    try:
        path.write_bytes(encode_aff(obj))
    except OSError as e:
        raise VesselIOError(f"写入失败 {path}: {e}")
    logger.debug(f"写入 AFF: {path} ({type(obj).__name__}, {obj.data.shape})")
    return path


def read_aff(path: Union[str, Path], expected: Optional[AffKind] = None) -> AffPayload:
    """
    读取 AFF 容器

    Args:
        path: 文件路径
        expected: 期望的数据类型（可选），不一致时报错
    """
    path = Path(path)
    validate_input_file(path)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise VesselIOError(f"读取失败 {path}: {e}")
    obj = decode_aff(raw, str(path))
    if expected is not None and _kind_of(obj) != expected:
        raise UnsupportedFormat(f"{path} 中是 {_kind_of(obj).name}，期望 {AffKind(expected).name}")
    return obj
