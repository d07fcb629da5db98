"""
血管亲和场工具库
提供亲和场计算、损失函数、特征增强算子以及像素级/拓扑级评估协议
"""

__version__ = "0.1.0"
