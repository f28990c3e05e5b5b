"""
网格容器
FieldGrid：均匀二维网格上的复标量场（入射平面波归一化为单位幅度）
样本数组按 [y, x] 存储，网格中心对应 origin
"""
from typing import Tuple

import numpy as np
from pydantic import BaseModel, Field, field_validator

from app.core.exceptions import DomainException


class FieldGrid(BaseModel):
    """固定波长下的复标量场采样"""
    samples: np.ndarray = Field(..., description="复幅度样本，形状 (ny, nx)")
    pitch_mm: float = Field(..., gt=0, description="x、y方向采样间距（mm）")
    wavelength_mm: float = Field(..., gt=0, description="波长（mm）")
    origin_mm: Tuple[float, float] = Field((0.0, 0.0), description="网格中心的物理坐标 (x, y)（mm）")
    
    class Config:
        frozen = True
        arbitrary_types_allowed = True
    
    @field_validator("samples", mode="before")
    @classmethod
    def _as_complex_grid(cls, value):
        array = np.array(value, dtype=np.complex128, copy=True)
        if array.ndim != 2 or array.shape[0] == 0 or array.shape[1] == 0:
            raise ValueError(f"samples 必须是非空二维数组（当前形状: {array.shape}）")
        array.flags.writeable = False
        return array
    
    @property
    def shape(self) -> Tuple[int, int]:
        return self.samples.shape
    
    @property
    def extent_mm(self) -> Tuple[float, float]:
        """网格物理尺寸 (x, y)"""
        ny, nx = self.shape
        return nx * self.pitch_mm, ny * self.pitch_mm
    
    @property
    def nyquist_ok(self) -> bool:
        """pitch ≤ λ/2（传播谱不混叠）"""
        return self.pitch_mm <= self.wavelength_mm / 2.0
    
    def require_nyquist(self) -> None:
        if not self.nyquist_ok:
            raise DomainException(
                f"采样间距 {self.pitch_mm:.4f} mm 超过 λ/2 = {self.wavelength_mm / 2.0:.4f} mm"
            )
    
    def axis_x(self) -> np.ndarray:
        nx = self.shape[1]
        return self.origin_mm[0] + (np.arange(nx) - (nx - 1) / 2.0) * self.pitch_mm
    
    def axis_y(self) -> np.ndarray:
        ny = self.shape[0]
        return self.origin_mm[1] + (np.arange(ny) - (ny - 1) / 2.0) * self.pitch_mm
    
    def coordinates(self) -> Tuple[np.ndarray, np.ndarray]:
        """返回 (X, Y) 坐标网格（mm），形状与 samples 相同"""
        return np.meshgrid(self.axis_x(), self.axis_y())
    
    def total_power(self) -> float:
        """Σ|u|²·pitch²"""
        return float(np.sum(np.abs(self.samples) ** 2) * self.pitch_mm ** 2)
    
    def intensity(self) -> np.ndarray:
        return np.abs(self.samples) ** 2
    
    def center_intensity(self) -> float:
        """
        光轴处强度
        
        奇数尺寸取中心样本；偶数尺寸时光轴落在样本之间，取关于光轴对称的相邻样本平均
        """
        ny, nx = self.shape
        rows = [ny // 2] if ny % 2 else [ny // 2 - 1, ny // 2]
        cols = [nx // 2] if nx % 2 else [nx // 2 - 1, nx // 2]
        return float(np.mean(self.intensity()[np.ix_(rows, cols)]))
    
    def with_samples(self, samples: np.ndarray) -> "FieldGrid":
        """保持几何不变，替换样本"""
        return FieldGrid(
            samples=samples,
            pitch_mm=self.pitch_mm,
            wavelength_mm=self.wavelength_mm,
            origin_mm=self.origin_mm,
        )


# 口径掩模与场网格共享同一容器：样本为复透射（或反射）系数
ApertureMask = FieldGrid


def uniform_grid(extent_mm: float, count: int, wavelength_mm: float, value: complex = 1.0) -> FieldGrid:
    """
    构造 count×count 的均匀场，间距 extent/count（物理面积恰为 extent²）
    
    Args:
        extent_mm: 边长（mm）
        count: 每边样本数
        wavelength_mm: 波长（mm）
        value: 常数值
    """
    if count < 1 or extent_mm <= 0:
        raise DomainException("均匀网格需要正的尺寸和样本数")
    return FieldGrid(
        samples=np.full((count, count), value, dtype=np.complex128),
        pitch_mm=extent_mm / count,
        wavelength_mm=wavelength_mm,
    )
