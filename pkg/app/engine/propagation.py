"""
标量傅里叶光学引擎
角谱法平行平面间传播、远场方向图、焦点扫描
时间约定 e^{+jωt}，前向传播平面波相位 e^{−jkz}
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.fft
from pydantic import BaseModel, Field, model_validator

from app.core.exceptions import DomainException, NumericalException
from app.core.grid import ApertureMask, FieldGrid

logger = logging.getLogger(__name__)


class PropagationPlan(BaseModel):
    """角谱传播的离散化方案"""
    shape: Tuple[int, int] = Field(..., description="网格尺寸 (ny, nx)")
    pitch_mm: float = Field(..., gt=0, description="采样间距（mm）")
    wavelength_mm: float = Field(..., gt=0, description="波长（mm）")
    padding_factor: int = Field(2, ge=1, description="补零倍数")
    
    class Config:
        frozen = True
    
    @model_validator(mode="after")
    def _check_nyquist(self):
        if self.pitch_mm > self.wavelength_mm / 2.0:
            raise ValueError(
                f"采样间距 {self.pitch_mm:.4f} mm 超过 λ/2 = {self.wavelength_mm / 2.0:.4f} mm"
            )
        return self
    
    @property
    def padded_shape(self) -> Tuple[int, int]:
        return self.shape[0] * self.padding_factor, self.shape[1] * self.padding_factor
    
    @property
    def offset(self) -> Tuple[int, int]:
        """原网格在补零网格中的起始位置"""
        return (
            (self.padded_shape[0] - self.shape[0]) // 2,
            (self.padded_shape[1] - self.shape[1]) // 2,
        )
    
    def matches(self, field: FieldGrid) -> bool:
        return (
            field.shape == self.shape
            and math.isclose(field.pitch_mm, self.pitch_mm, rel_tol=1e-12)
            and math.isclose(field.wavelength_mm, self.wavelength_mm, rel_tol=1e-12)
        )


def plan_for(field: FieldGrid, padding_factor: int = 2) -> PropagationPlan:
    """按场的几何生成传播方案"""
    return PropagationPlan(
        shape=field.shape,
        pitch_mm=field.pitch_mm,
        wavelength_mm=field.wavelength_mm,
        padding_factor=padding_factor,
    )


@lru_cache(maxsize=32)
def _axial_wavenumber(padded_shape: Tuple[int, int], pitch_mm: float, wavelength_mm: float):
    """返回 (kz², 传播分量掩码)，kz² = k² − kx² − ky²"""
    ny, nx = padded_shape
    kx = 2.0 * np.pi * scipy.fft.fftfreq(nx, d=pitch_mm)
    ky = 2.0 * np.pi * scipy.fft.fftfreq(ny, d=pitch_mm)
    k = 2.0 * np.pi / wavelength_mm
    kz2 = k ** 2 - (ky[:, np.newaxis] ** 2 + kx[np.newaxis, :] ** 2)
    propagating = kz2 >= 0.0
    kz2.flags.writeable = False
    propagating.flags.writeable = False
    return kz2, propagating


def transfer_function(plan: PropagationPlan, dz_mm: float) -> np.ndarray:
    """
    自由空间传递函数
    
    传播分量 e^{−j·dz·kz}；倏逝分量在 dz > 0 时按 e^{−dz·|kz|} 衰减，dz ≤ 0 时置零
    """
    kz2, propagating = _axial_wavenumber(plan.padded_shape, plan.pitch_mm, plan.wavelength_mm)
    transfer = np.zeros(kz2.shape, dtype=np.complex128)
    kz = np.sqrt(np.where(propagating, kz2, 0.0))
    transfer[propagating] = np.exp(-1j * dz_mm * kz[propagating])
    if dz_mm > 0:
        decay = np.sqrt(np.where(propagating, 0.0, -kz2))
        transfer[~propagating] = np.exp(-dz_mm * decay[~propagating])
    return transfer


def propagate(field: FieldGrid, dz_mm: float, plan: Optional[PropagationPlan] = None) -> FieldGrid:
    """
    角谱法传播到 z + dz 平面
    
    Args:
        field: 输入场
        dz_mm: 传播距离（mm），负值为反向传播
        plan: 离散化方案，缺省时按场几何以2倍补零生成
    
    Returns:
        与输入同几何的输出场
    
    Raises:
        NumericalException: 场与方案几何不匹配
    """
    if plan is None:
        plan = plan_for(field)
    if not plan.matches(field):
        raise NumericalException(
            f"场几何 {field.shape}/{field.pitch_mm} 与传播方案 {plan.shape}/{plan.pitch_mm} 不匹配"
        )
    if dz_mm == 0:
        return field
    
    ny, nx = plan.shape
    oy, ox = plan.offset
    padded = np.zeros(plan.padded_shape, dtype=np.complex128)
    padded[oy:oy + ny, ox:ox + nx] = field.samples
    spectrum = scipy.fft.fft2(padded)
    spectrum *= transfer_function(plan, dz_mm)
    out = scipy.fft.ifft2(spectrum)[oy:oy + ny, ox:ox + nx]
    if not np.all(np.isfinite(out)):
        raise NumericalException("传播结果包含非有限值")
    return field.with_samples(out)


def propagating_spectrum_power(field: FieldGrid, plan: Optional[PropagationPlan] = None) -> float:
    """补零网格上传播分量的谱功率 Σ|U|²"""
    if plan is None:
        plan = plan_for(field)
    ny, nx = plan.shape
    oy, ox = plan.offset
    padded = np.zeros(plan.padded_shape, dtype=np.complex128)
    padded[oy:oy + ny, ox:ox + nx] = field.samples
    _, propagating = _axial_wavenumber(plan.padded_shape, plan.pitch_mm, plan.wavelength_mm)
    spectrum = scipy.fft.fft2(padded)
    return float(np.sum(np.abs(spectrum[propagating]) ** 2))


def plane_wave(like: FieldGrid, theta_deg: float) -> FieldGrid:
    """
    与 like 同几何的倾斜单位平面波 e^{−jk·sinθ·x}
    """
    if abs(theta_deg) >= 90.0:
        raise DomainException(f"入射角必须满足 |θ| < 90°（当前值: {theta_deg}）")
    k = 2.0 * np.pi / like.wavelength_mm
    x = like.axis_x()
    row = np.exp(-1j * k * np.sin(np.deg2rad(theta_deg)) * x)
    return like.with_samples(np.broadcast_to(row, like.shape))


# ==================== 远场 ====================

def _check_angles(angles_deg: np.ndarray) -> None:
    if np.any(np.abs(angles_deg) >= 90.0):
        raise DomainException("远场角度必须满足 |θ| < 90°")


def far_field(field: FieldGrid, angles_deg: Sequence[float]) -> np.ndarray:
    """
    方位切面远场 F(θ) = Σ u(x,y)·e^{+jk·sinθ·x}·pitch²（沿 y 积分）
    
    Args:
        field: 口径场
        angles_deg: 方位角列表（度）
    
    Returns:
        每个角度的复方向图值（mm²）
    """
    field.require_nyquist()
    angles = np.atleast_1d(np.asarray(angles_deg, dtype=float))
    _check_angles(angles)
    k = 2.0 * np.pi / field.wavelength_mm
    line = field.samples.sum(axis=0)
    kernel = np.exp(1j * k * np.outer(np.sin(np.deg2rad(angles)), field.axis_x()))
    return kernel @ line * field.pitch_mm ** 2


def far_field_2d(field: FieldGrid, theta_deg: Sequence[float], phi_deg: Sequence[float]) -> np.ndarray:
    """
    二维远场 F(θ, φ)，方向余弦 u = sinθ·cosφ, v = sinθ·sinφ
    
    Returns:
        形状 (len(theta), len(phi)) 的复方向图
    """
    field.require_nyquist()
    theta = np.atleast_1d(np.asarray(theta_deg, dtype=float))
    phi = np.deg2rad(np.atleast_1d(np.asarray(phi_deg, dtype=float)))
    _check_angles(theta)
    k = 2.0 * np.pi / field.wavelength_mm
    sin_theta = np.sin(np.deg2rad(theta))
    u = np.outer(sin_theta, np.cos(phi))
    v = np.outer(sin_theta, np.sin(phi))
    x = field.axis_x()
    y = field.axis_y()
    # F = Σ_y e^{jkvy} Σ_x u(x,y) e^{jkux}
    ex = np.exp(1j * k * u[..., np.newaxis] * x)
    ey = np.exp(1j * k * v[..., np.newaxis] * y)
    inner = np.einsum("tpx,yx->tpy", ex, field.samples)
    return np.einsum("tpy,tpy->tp", inner, ey) * field.pitch_mm ** 2


# ==================== 焦点扫描 ====================

class FocalScanResult(BaseModel):
    """轴上强度扫描结果（相对入射强度）"""
    z_mm: List[float]
    intensity: List[float]
    peak_z_mm: float
    peak_intensity: float


def _z_positions(z_start_mm: float, z_stop_mm: float, steps: int) -> np.ndarray:
    if steps < 2:
        raise DomainException(f"扫描步数必须 ≥ 2（当前值: {steps}）")
    if not (0 < z_start_mm < z_stop_mm):
        raise DomainException(f"扫描区间必须为正且递增（当前: {z_start_mm} → {z_stop_mm}）")
    return np.linspace(z_start_mm, z_stop_mm, steps)


def focal_scan(
    mask: ApertureMask,
    z_start_mm: float,
    z_stop_mm: float,
    steps: int,
    padding_factor: int = 2,
    threads: int = 1,
) -> FocalScanResult:
    """
    单位幅度正入射平面波经掩模后传播到各 z，记录轴上强度
    
    各 z 独立计算，结果按 z 的顺序组装
    """
    z = _z_positions(z_start_mm, z_stop_mm, steps)
    plan = plan_for(mask, padding_factor)
    
    def on_axis(dz: float) -> float:
        return propagate(mask, float(dz), plan).center_intensity()
    
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            intensity = np.array(list(pool.map(on_axis, z)))
    else:
        intensity = np.array([on_axis(dz) for dz in z])
    
    peak = int(np.argmax(intensity))
    logger.debug("焦点扫描: %d 点, 峰值 z=%.3f mm", steps, z[peak])
    return FocalScanResult(
        z_mm=[float(v) for v in z],
        intensity=[float(v) for v in intensity],
        peak_z_mm=float(z[peak]),
        peak_intensity=float(intensity[peak]),
    )


def field_slice(
    mask: ApertureMask,
    z_start_mm: float,
    z_stop_mm: float,
    steps: int,
    padding_factor: int = 2,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    y = 0 处的 x–z 强度切片
    
    Returns:
        (z_mm, x_mm, intensity)，intensity 形状 (len(z), nx)
    """
    z = _z_positions(z_start_mm, z_stop_mm, steps)
    plan = plan_for(mask, padding_factor)
    ny = mask.shape[0]
    rows = [ny // 2] if ny % 2 else [ny // 2 - 1, ny // 2]
    intensity = np.empty((len(z), mask.shape[1]))
    for k, dz in enumerate(z):
        intensity[k] = propagate(mask, float(dz), plan).intensity()[rows].mean(axis=0)
    return z, mask.axis_x(), intensity
