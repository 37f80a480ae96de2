"""
权重文件读写（TQWT 格式）

INPUT:  DenseNetClassifier / 权重文件路径
OUTPUT: save_model(), load_model(), read_model_config() 函数, WEIGHTS_MAGIC, WEIGHTS_VERSION 常量
POS:    classifier 的持久化层，被 CLI train / classify / quantify 调用

文件布局（全部小端）：
    b"TQWT" | u32 版本 | u32 配置长度 | 配置 JSON (UTF-8)
    | u32 张量数 | 每个张量: u32 名称长度, 名称, u32 维数, u32×维数 形状, float32 数据
    | 32 字节 SHA-256（覆盖此前全部字节）

⚠️ 一旦我被更新，务必更新我的开头注释，以及所属文件夹的 README.md
"""

import hashlib
import json
import logging
import struct
from pathlib import Path
from typing import Dict, Tuple, Union

import numpy as np
import torch

from lungtex.classifier.config import ModelConfig
from lungtex.classifier.network import DenseNetClassifier
from lungtex.errors import ModelFileError

logger = logging.getLogger(__name__)

WEIGHTS_MAGIC = b"TQWT"
WEIGHTS_VERSION = 1
_DIGEST_SIZE = 32


def _u32(value: int) -> bytes:
    return struct.pack("<I", value)


def save_model(model: DenseNetClassifier, path: Union[str, Path]) -> Path:
    """
    写出配置与全部参数 / 缓冲区。

    Args:
        model: 模型（float32 参数可逐位还原）
        path: 目标文件

    Returns:
        写入的路径
    """
    path = Path(path)
    config_blob = json.dumps(model.config.to_dict(), sort_keys=True).encode("utf-8")
    state = model.state_dict()

    parts = [WEIGHTS_MAGIC, _u32(WEIGHTS_VERSION), _u32(len(config_blob)), config_blob, _u32(len(state))]
    for name, tensor in state.items():
        encoded = name.encode("utf-8")
        data = tensor.detach().cpu().numpy().astype("<f4")
        parts.append(_u32(len(encoded)))
        parts.append(encoded)
        parts.append(_u32(data.ndim))
        parts.extend(_u32(d) for d in data.shape)
        parts.append(data.tobytes(order="C"))

    body = b"".join(parts)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(body + hashlib.sha256(body).digest())
    logger.info(f"已保存模型权重: {path} ({len(state)} 个张量)")
    return path


class _Reader:
    def __init__(self, body: bytes):
        self.body = body
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.body):
            raise ModelFileError("权重文件内容不完整")
        chunk = self.body[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]


def _parse(path: Union[str, Path]) -> Tuple[ModelConfig, Dict[str, np.ndarray]]:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise ModelFileError(f"无法读取权重文件 {path}: {e}") from e

    if len(raw) < 8 or raw[:4] != WEIGHTS_MAGIC:
        raise ModelFileError(f"不是 TQWT 权重文件: {path}")
    version = struct.unpack("<I", raw[4:8])[0]
    if version != WEIGHTS_VERSION:
        raise ModelFileError(f"不支持的权重文件版本 {version}（期望 {WEIGHTS_VERSION}）")
    body, digest = raw[:-_DIGEST_SIZE], raw[-_DIGEST_SIZE:]
    if len(raw) < 8 + _DIGEST_SIZE or hashlib.sha256(body).digest() != digest:
        raise ModelFileError(f"权重文件校验和不匹配（文件损坏或被截断）: {path}")

    reader = _Reader(body)
    reader.take(8)
    try:
        config = ModelConfig.from_dict(json.loads(reader.take(reader.u32()).decode("utf-8")))
    except (ValueError, TypeError) as e:
        raise ModelFileError(f"权重文件中的模型配置无效: {e}") from e

    tensors: Dict[str, np.ndarray] = {}
    for _ in range(reader.u32()):
        name = reader.take(reader.u32()).decode("utf-8")
        shape = tuple(reader.u32() for _ in range(reader.u32()))
        count = int(np.prod(shape, dtype=np.int64))
        tensors[name] = np.frombuffer(reader.take(4 * count), dtype="<f4").reshape(shape)
    if reader.pos != len(body):
        raise ModelFileError("权重文件末尾存在多余数据")
    return config, tensors


def read_model_config(path: Union[str, Path]) -> ModelConfig:
    """只读取权重文件中的模型配置（同样校验文件完整性）"""
    return _parse(path)[0]


def load_model(path: Union[str, Path]) -> DenseNetClassifier:
    """
    读取权重文件并重建模型（推理模式）。

    Raises:
        ModelFileError: 魔数 / 版本 / 校验和错误，或张量与配置不符
    """
    config, tensors = _parse(path)
    model = DenseNetClassifier(config)
    expected = model.state_dict()
    if set(expected) != set(tensors):
        missing = sorted(set(expected) - set(tensors))
        extra = sorted(set(tensors) - set(expected))
        raise ModelFileError(f"权重张量与模型配置不符: 缺少 {missing[:3]}, 多余 {extra[:3]}")

    state = {}
    for name, reference in expected.items():
        array = tensors[name]
        if tuple(array.shape) != tuple(reference.shape):
            raise ModelFileError(f"张量 {name} 形状 {array.shape} 与配置 {tuple(reference.shape)} 不符")
        state[name] = torch.from_numpy(array.copy()).to(reference.dtype)
    model.load_state_dict(state)
    model.eval()
    logger.info(f"已加载模型权重: {path}")
    return model
