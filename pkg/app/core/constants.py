"""
物理常量
光速取SI精确值，内部长度单位为毫米、频率单位为吉赫兹
"""
from scipy.constants import c as SPEED_OF_LIGHT_M_S, inch as INCH_M

# c 以 GHz·mm 表示：299 792 458 m/s = 299.792458 GHz·mm
SPEED_OF_LIGHT_GHZ_MM = SPEED_OF_LIGHT_M_S * 1e-6

MM_PER_M = 1000.0
MM_PER_INCH = INCH_M * MM_PER_M

__all__ = ["SPEED_OF_LIGHT_M_S", "SPEED_OF_LIGHT_GHZ_MM", "MM_PER_M", "MM_PER_INCH"]
