"""
雷达方程分析
球体定标、RCS 与增益换算、实测增益提取、SNR–距离规律、探测距离与距离扩展倍数

距离一律以米为单位，单站点目标 R⁻⁴ 规律固定
"""
import logging
import math
from typing import Dict, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field, field_validator

from app.config import settings
from app.core.constants import MM_PER_INCH, MM_PER_M
from app.core.exceptions import DomainException
from app.core.units import Db, Dbi, Dbsm, to_dbsm

logger = logging.getLogger(__name__)

# R⁻⁴：距离加倍损失 40·log10(2) ≈ 12.0412 dB
RANGE_EXPONENT_DB = 40.0


# ==================== 数据类型 ====================

class CalibrationFactor(BaseModel):
    """定标因子，仅在参考距离下有效"""
    factor_db: float = Field(..., description="接收功率（dB）→ dBsm 的加性修正")
    reference_range_m: float = Field(..., gt=0, description="定标距离（m）")
    sphere_diameter_mm: Optional[float] = Field(None, gt=0, description="定标球直径（mm）")
    
    class Config:
        frozen = True


class SnrSample(BaseModel):
    """某一距离下的 SNR"""
    range_m: float = Field(..., gt=0, description="距离（m）")
    snr_db: float = Field(..., description="信噪比（dB）")
    
    class Config:
        frozen = True
    
    @field_validator("snr_db")
    @classmethod
    def _finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("SNR必须为有限值")
        return value


class DetectionRange(BaseModel):
    """探测距离结果"""
    range_m: float
    threshold_db: float
    anchor: SnrSample
    extrapolated: bool = Field(False, description="超过锚点距离的外推上限")


class FocalGainScan(BaseModel):
    """间距扫描的实测增益"""
    distances_mm: List[float]
    gains_dbi: List[float]
    best_distance_mm: float
    best_gain_dbi: float


class LinkRow(BaseModel):
    quantity: str
    value: float
    unit: str


# ==================== 定标 ====================

def sphere_rcs(diameter: float, unit: str = "in") -> Dbsm:
    """
    金属球理论 RCS σ = πa²
    
    Args:
        diameter: 直径
        unit: "in"、"mm" 或 "m"
    
    Returns:
        dBsm
    """
    if not diameter > 0:
        raise DomainException(f"球直径必须为正数（当前值: {diameter}）")
    scale = {"in": MM_PER_INCH / MM_PER_M, "mm": 1.0 / MM_PER_M, "m": 1.0}
    if unit not in scale:
        raise DomainException(f"不支持的长度单位: {unit}")
    radius_m = diameter * scale[unit] / 2.0
    return to_dbsm(math.pi * radius_m ** 2)


def calibrate(
    received_power_db: float,
    known_rcs_dbsm: float,
    range_m: float,
    sphere_diameter_mm: Optional[float] = None,
) -> CalibrationFactor:
    """由已知 RCS 目标的回波功率求定标因子"""
    if not range_m > 0:
        raise DomainException(f"定标距离必须为正数（当前值: {range_m}）")
    factor = known_rcs_dbsm - received_power_db
    logger.debug("定标因子 %.3f dB @ %.3f m", factor, range_m)
    return CalibrationFactor(factor_db=factor, reference_range_m=range_m, sphere_diameter_mm=sphere_diameter_mm)


def apply_calibration(
    factor: CalibrationFactor,
    received_power_db: float,
    range_m: Optional[float] = None,
    correct_range: bool = False,
) -> Dbsm:
    """
    将接收功率换算为 dBsm
    
    Raises:
        DomainException: 查询距离不同于定标距离且未要求距离修正
    """
    rcs = received_power_db + factor.factor_db
    if range_m is None or math.isclose(range_m, factor.reference_range_m, rel_tol=1e-12):
        return rcs
    if not range_m > 0:
        raise DomainException(f"距离必须为正数（当前值: {range_m}）")
    if not correct_range:
        raise DomainException(
            f"定标因子仅在 {factor.reference_range_m} m 有效，查询距离 {range_m} m 需要显式距离修正"
        )
    return rcs + RANGE_EXPONENT_DB * math.log10(range_m / factor.reference_range_m)


# ==================== RCS 与增益 ====================

def gain_from_rcs(rcs_dbsm: float, wavelength_m: float) -> Dbi:
    """单站 RCS–增益关系 G = (σ − 20·log10 λ + 10·log10 4π) / 2"""
    if not wavelength_m > 0:
        raise DomainException(f"波长必须为正数（当前值: {wavelength_m}）")
    return (rcs_dbsm - 20.0 * math.log10(wavelength_m) + 10.0 * math.log10(4.0 * math.pi)) / 2.0


def rcs_from_gain(gain_dbi: float, wavelength_m: float) -> Dbsm:
    if not wavelength_m > 0:
        raise DomainException(f"波长必须为正数（当前值: {wavelength_m}）")
    return 2.0 * gain_dbi + 20.0 * math.log10(wavelength_m) - 10.0 * math.log10(4.0 * math.pi)


def gain_delta_from_rcs_delta(delta_db: float) -> Db:
    return delta_db / 2.0


def realized_gain(loaded_s21_db: float, reference_s21_db: float, receive_antenna_gain_dbi: Optional[float] = None) -> Dbi:
    """加载 S21 − 参考 S21 + 接收天线增益（默认 PATCH_ANTENNA_GAIN_DBI）"""
    if receive_antenna_gain_dbi is None:
        receive_antenna_gain_dbi = settings.PATCH_ANTENNA_GAIN_DBI
    return loaded_s21_db - reference_s21_db + receive_antenna_gain_dbi


def focal_gain_scan(
    distances_mm: Sequence[float],
    loaded_s21_db: Sequence[float],
    reference_s21_db: float,
    receive_antenna_gain_dbi: Optional[float] = None,
) -> FocalGainScan:
    """逐间距提取实测增益，返回最佳间距"""
    if len(distances_mm) == 0 or len(distances_mm) != len(loaded_s21_db):
        raise DomainException("间距与S21数量不一致或为空")
    gains = [realized_gain(s21, reference_s21_db, receive_antenna_gain_dbi) for s21 in loaded_s21_db]
    best = int(np.argmax(gains))
    return FocalGainScan(
        distances_mm=[float(d) for d in distances_mm],
        gains_dbi=gains,
        best_distance_mm=float(distances_mm[best]),
        best_gain_dbi=gains[best],
    )


# ==================== SNR 与距离 ====================

def snr_at_range(anchor: SnrSample, range_m: float) -> Db:
    if not range_m > 0:
        raise DomainException(f"距离必须为正数（当前值: {range_m}）")
    return anchor.snr_db - RANGE_EXPONENT_DB * math.log10(range_m / anchor.range_m)


def snr_curve(anchor: SnrSample, ranges_m: Sequence[float]) -> List[SnrSample]:
    return [SnrSample(range_m=r, snr_db=snr_at_range(anchor, r)) for r in ranges_m]


def detection_range(anchor: SnrSample, threshold_db: Optional[float] = None) -> DetectionRange:
    """
    SNR 降到门限时的距离 R = R₀·10^((SNR₀ − 门限)/40)
    
    超过 EXTRAPOLATION_LIMIT 倍锚点距离时标记为外推
    """
    if threshold_db is None:
        threshold_db = settings.DETECTION_THRESHOLD_DB
    if not math.isfinite(threshold_db):
        raise DomainException(f"门限必须为有限值（当前值: {threshold_db}）")
    range_m = anchor.range_m * math.pow(10.0, (anchor.snr_db - threshold_db) / RANGE_EXPONENT_DB)
    extrapolated = range_m > settings.EXTRAPOLATION_LIMIT * anchor.range_m
    if extrapolated:
        logger.warning("探测距离 %.2f m 超出锚点距离 %.2f m 的 %.1f 倍", range_m, anchor.range_m, settings.EXTRAPOLATION_LIMIT)
    return DetectionRange(range_m=range_m, threshold_db=threshold_db, anchor=anchor, extrapolated=extrapolated)


def range_factor(delta_db: float) -> float:
    """功率提升 Δ 对应的探测距离倍数 10^(Δ/40)"""
    return math.pow(10.0, delta_db / RANGE_EXPONENT_DB)


def fit_range_slope(samples: Sequence[SnrSample]) -> float:
    """SNR 对 log10(R) 的最小二乘斜率（dB/十倍程，点目标应为 −40）"""
    if len(samples) < 2:
        raise DomainException("拟合至少需要两个样本")
    log_r = np.log10([s.range_m for s in samples])
    if np.ptp(log_r) == 0:
        raise DomainException("拟合样本距离必须不同")
    slope, _ = np.polyfit(log_r, [s.snr_db for s in samples], 1)
    return float(slope)


# ==================== 报告 ====================

def link_report(
    anchor: SnrSample,
    threshold_db: Optional[float] = None,
    wavelength_m: Optional[float] = None,
    tag_rcs_dbsm: Optional[float] = None,
    reference_rcs_dbsm: Optional[float] = None,
    marker_delta_db: Optional[float] = None,
) -> List[LinkRow]:
    """
    链路预算报告，每行 quantity,value,unit
    
    Args:
        anchor: 实测 SNR 锚点
        threshold_db: 探测门限
        wavelength_m: 波长，提供时给出 RCS 对应增益
        tag_rcs_dbsm / reference_rcs_dbsm: 标签与参照物 RCS
        marker_delta_db: 加装标签后的功率提升，提供时给出距离扩展
    """
    detection = detection_range(anchor, threshold_db)
    rows = [
        LinkRow(quantity="anchor_range", value=anchor.range_m, unit="m"),
        LinkRow(quantity="anchor_snr", value=anchor.snr_db, unit="dB"),
        LinkRow(quantity="threshold", value=detection.threshold_db, unit="dB"),
        LinkRow(quantity="detection_range", value=detection.range_m, unit="m"),
        LinkRow(quantity="extrapolated", value=float(detection.extrapolated), unit="bool"),
    ]
    if wavelength_m is not None:
        for name, rcs in (("tag", tag_rcs_dbsm), ("reference", reference_rcs_dbsm)):
            if rcs is not None:
                rows.append(LinkRow(quantity=f"{name}_rcs", value=rcs, unit="dBsm"))
                rows.append(LinkRow(quantity=f"{name}_gain", value=gain_from_rcs(rcs, wavelength_m), unit="dBi"))
    if tag_rcs_dbsm is not None and reference_rcs_dbsm is not None:
        delta = tag_rcs_dbsm - reference_rcs_dbsm
        rows.append(LinkRow(quantity="rcs_delta", value=delta, unit="dB"))
        rows.append(LinkRow(quantity="gain_delta", value=gain_delta_from_rcs_delta(delta), unit="dB"))
    if marker_delta_db is not None:
        factor = range_factor(marker_delta_db)
        rows.append(LinkRow(quantity="marker_delta", value=marker_delta_db, unit="dB"))
        rows.append(LinkRow(quantity="range_factor", value=factor, unit="ratio"))
        rows.append(LinkRow(quantity="extended_detection_range", value=detection.range_m * factor, unit="m"))
    return rows


def report_dict(rows: Sequence[LinkRow]) -> Dict[str, float]:
    return {row.quantity: row.value for row in rows}
