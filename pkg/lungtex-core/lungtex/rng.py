"""
命名随机流

INPUT:  整数种子, 用途名称 (purpose) 及可选的扫描 ID / 类别名
OUTPUT: derive_key(), stream(), torch_generator() 函数, RNG_NAME 常量
POS:    所有随机性的唯一来源；采样、初始化、增强、Monte Carlo 均经由此处派生

生成器为 numpy Philox4x64-10（基于计数器）。流的密钥为
BLAKE2b(seed 的 8 字节小端表示 || 用途名称以 NUL 连接) 的前 16 字节，
解释为 128 位小端整数。相同 (seed, 名称) 总是得到相同的流，
与线程数和调用顺序无关。
"""

import hashlib
from typing import Union

import numpy as np

RNG_NAME = "philox4x64-10"

_MASK64 = (1 << 64) - 1


def derive_key(seed: int, *names: Union[str, int]) -> int:
    """
    从种子和用途名称派生 128 位流密钥。

    Args:
        seed: 运行种子（按 u64 取模）
        *names: 用途名称，例如 ("sample", scan_id, "GG")

    Returns:
        128 位非负整数密钥
    """
    h = hashlib.blake2b(digest_size=16)
    h.update((int(seed) & _MASK64).to_bytes(8, "little"))
    h.update(b"\x00".join(str(n).encode("utf-8") for n in names))
    return int.from_bytes(h.digest(), "little")


def stream(seed: int, *names: Union[str, int]) -> np.random.Generator:
    """返回由 (seed, names) 命名的独立 Philox 随机流"""
    key = derive_key(seed, *names)
    return np.random.Generator(np.random.Philox(key=key))


def torch_generator(seed: int, *names: Union[str, int]):
    """返回以派生密钥低 63 位为种子的 torch.Generator"""
    import torch

    gen = torch.Generator()
    gen.manual_seed(derive_key(seed, *names) & ((1 << 63) - 1))
    return gen
