"""
SoDELab 模块 - 多量子比特态的解纠缠速度 (SoDE) 计算工具
"""

__version__ = "1.0.0"
__author__ = "SoDELab Team"
