"""
phantom: 程序化纹理体模

INPUT:  PhantomSpec
OUTPUT: Phantom, generate_phantom(), generate_cohort()
POS:    桌面规模实验的数据来源
"""

from lungtex.phantom.spec import PhantomSpec, TextureParams, DEFAULT_TEXTURES
from lungtex.phantom.generator import Phantom, generate_phantom, generate_cohort

__all__ = [
    "PhantomSpec",
    "TextureParams",
    "DEFAULT_TEXTURES",
    "Phantom",
    "generate_phantom",
    "generate_cohort",
]
