"""
单位与分贝换算
Dbsm / Dbi / Db 是三个语义不同的标量类型，仅用于类型标注，不可混用
"""
import math
from typing import NewType, Union

import numpy as np
from pydantic import BaseModel, Field, model_validator

from app.core.constants import SPEED_OF_LIGHT_GHZ_MM, MM_PER_INCH, MM_PER_M
from app.core.exceptions import DomainException

Dbsm = NewType("Dbsm", float)
Dbi = NewType("Dbi", float)
Db = NewType("Db", float)

ArrayOrFloat = Union[float, np.ndarray]


def wavelength_of(frequency_ghz: float) -> float:
    """
    由频率计算波长
    
    Args:
        frequency_ghz: 频率（GHz）
    
    Returns:
        波长（mm），λ = c/f
    
    Raises:
        DomainException: 频率非正
    """
    if not frequency_ghz > 0 or not math.isfinite(frequency_ghz):
        raise DomainException(f"频率必须为正数（当前值: {frequency_ghz}）")
    return SPEED_OF_LIGHT_GHZ_MM / frequency_ghz


def frequency_of(wavelength_mm: float) -> float:
    """由波长（mm）计算频率（GHz）"""
    if not wavelength_mm > 0 or not math.isfinite(wavelength_mm):
        raise DomainException(f"波长必须为正数（当前值: {wavelength_mm}）")
    return SPEED_OF_LIGHT_GHZ_MM / wavelength_mm


class Carrier(BaseModel):
    """频率/波长对，构造后不可变"""
    frequency_ghz: float = Field(..., gt=0, description="频率（GHz）")
    wavelength_mm: float = Field(0.0, description="波长（mm），由频率推导")
    
    class Config:
        frozen = True
    
    @model_validator(mode="before")
    @classmethod
    def _derive_wavelength(cls, values):
        if isinstance(values, dict) and values.get("frequency_ghz") is not None:
            values = dict(values)
            values["wavelength_mm"] = wavelength_of(float(values["frequency_ghz"]))
        return values
    
    @property
    def wavelength_m(self) -> float:
        return self.wavelength_mm / MM_PER_M
    
    @property
    def wavenumber_per_mm(self) -> float:
        """k = 2π/λ（rad/mm）"""
        return 2.0 * math.pi / self.wavelength_mm


# ==================== 分贝换算 ====================

def db_from_power(ratio: ArrayOrFloat) -> ArrayOrFloat:
    """功率比 → dB"""
    return 10.0 * np.log10(ratio)


def power_from_db(value_db: ArrayOrFloat) -> ArrayOrFloat:
    """dB → 功率比"""
    return np.power(10.0, value_db / 10.0)


def db_from_amplitude(ratio: ArrayOrFloat) -> ArrayOrFloat:
    """幅度比 → dB（20·log10）"""
    return 20.0 * np.log10(ratio)


def amplitude_from_db(value_db: ArrayOrFloat) -> ArrayOrFloat:
    """dB → 幅度比"""
    return np.power(10.0, value_db / 20.0)


def to_dbsm(sigma_m2: float) -> Dbsm:
    """RCS（m²）→ dBsm"""
    return Dbsm(10.0 * math.log10(sigma_m2))


def from_dbsm(value: Dbsm) -> float:
    """dBsm → RCS（m²）"""
    return 10.0 ** (value / 10.0)


def to_dbi(gain_linear: float) -> Dbi:
    """线性增益 → dBi"""
    return Dbi(10.0 * math.log10(gain_linear))


def from_dbi(value: Dbi) -> float:
    """dBi → 线性增益"""
    return 10.0 ** (value / 10.0)


def mm_from_inch(value_inch: float) -> float:
    """英寸 → 毫米"""
    return value_inch * MM_PER_INCH
