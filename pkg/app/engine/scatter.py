"""
单站散射仿真
两层猫眼标签（透镜 → 贴片层 → 透镜）与单独贴片层的 RCS–方位扫描、布拉格波瓣预测和稳定性统计

回程在反射坐标系 z' = −z 中描述：反射场沿 +z' 用同一前向传播算子传播，
朝向雷达的分量为 Σ u·e^{−jk·sinθ·x}，即 far_field(·, −θ)
"""
import csv
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

from app.config import settings
from app.core.exceptions import DataFormatException, DomainException, NotFoundException
from app.core.grid import ApertureMask, FieldGrid
from app.core.units import frequency_of
from app.engine.propagation import PropagationPlan, far_field, plan_for, plane_wave, propagate

logger = logging.getLogger(__name__)

ComplexPair = Tuple[float, float]


# ==================== 数据类型 ====================

class PatchPlaneSpec(BaseModel):
    """
    贴片层规格
    
    长度沿 y（E面，垂直极化），宽度沿 x（方位方向）
    反射系数以 (实部, 虚部) 给出；默认贴片 +1、理想导体地 −1
    """
    patch_length_mm: float = Field(0.84, gt=0, description="贴片长度（E面，mm）")
    patch_width_mm: float = Field(1.28, gt=0, description="贴片宽度（mm）")
    period_mm: float = Field(2.48, gt=0, description="中心间距 d（mm）")
    extent_mm: Tuple[float, float] = Field((53.0, 53.0), description="贴片层尺寸 (x, y)（mm）")
    patch_reflection: ComplexPair = Field((1.0, 0.0), description="贴片反射系数")
    ground_reflection: ComplexPair = Field((-1.0, 0.0), description="地面反射系数")
    
    class Config:
        frozen = True
    
    @model_validator(mode="after")
    def _check_geometry(self):
        if self.period_mm <= max(self.patch_length_mm, self.patch_width_mm):
            raise ValueError("贴片周期必须大于贴片尺寸")
        if min(self.extent_mm) <= 0:
            raise ValueError("贴片层尺寸必须为正")
        return self
    
    @property
    def patch_gamma(self) -> complex:
        return complex(*self.patch_reflection)
    
    @property
    def ground_gamma(self) -> complex:
        return complex(*self.ground_reflection)
    
    @classmethod
    def full_mirror(cls, extent_mm: float = 53.0) -> "PatchPlaneSpec":
        """全反射镜：贴片与地反射系数均为 1"""
        return cls(extent_mm=(extent_mm, extent_mm), patch_reflection=(1.0, 0.0), ground_reflection=(1.0, 0.0))


class TagAssembly(BaseModel):
    """两层标签装配"""
    lens_mask: ApertureMask = Field(..., description="透镜透射掩模")
    patch_plane: PatchPlaneSpec = Field(default_factory=PatchPlaneSpec)
    separation_mm: float = Field(20.0, gt=0, description="透镜与贴片层间距（mm）")
    board_extent_mm: float = Field(53.0, gt=0, description="板尺寸（mm）")
    padding_factor: int = Field(2, ge=1, description="角谱传播补零倍数")
    surround_transmission: float = Field(0.0, ge=0.0, le=1.0, description="透镜掩模以外区域的透射幅度，1 表示无孔径光阑")
    angle_multiplier: Optional[Tuple[Tuple[float, float], ...]] = Field(
        None, description="可选的透射幅度-入射角表 ((θ°, |t|), ...)"
    )
    
    class Config:
        frozen = True
        arbitrary_types_allowed = True
    
    @model_validator(mode="after")
    def _lens_fits(self):
        lens_x, lens_y = self.lens_mask.extent_mm
        if max(lens_x, lens_y) > self.board_extent_mm + 1e-9:
            raise ValueError(f"透镜口径 {max(lens_x, lens_y):.3f} mm 超出板尺寸 {self.board_extent_mm} mm")
        return self


class RcsSweep(BaseModel):
    """RCS–方位扫描"""
    angles_deg: List[float]
    rcs_dbsm: List[float]
    frequency_ghz: float
    step_deg: float
    label: str = ""
    
    @model_validator(mode="after")
    def _check(self):
        if len(self.angles_deg) != len(self.rcs_dbsm):
            raise ValueError("角度与RCS数量不一致")
        if any(b <= a for a, b in zip(self.angles_deg, self.angles_deg[1:])):
            raise ValueError("角度必须严格递增")
        if not all(math.isfinite(v) for v in self.rcs_dbsm):
            raise ValueError("RCS必须为有限值")
        return self


class BraggResult(BaseModel):
    """布拉格波瓣预测"""
    orders: List[int]
    angles_deg: List[float]
    omitted: int = Field(0, description="|mλ/(2d)| > 1 被略去的阶数个数")


class SweepStats(BaseModel):
    """扫描统计（对覆盖角内 dBsm 值）"""
    coverage_deg: float
    count: int
    peak_dbsm: float
    median_dbsm: float
    mean_dbsm: float
    variation_db: float


# ==================== 贴片层掩模 ====================

def _overlap_fraction(axis: np.ndarray, pitch: float, centers: np.ndarray, half_width: float) -> np.ndarray:
    """每个采样单元 [x−pitch/2, x+pitch/2] 被区间集合覆盖的比例"""
    lo = axis[:, np.newaxis] - pitch / 2.0
    hi = axis[:, np.newaxis] + pitch / 2.0
    overlap = np.minimum(hi, centers + half_width) - np.maximum(lo, centers - half_width)
    return np.clip(np.clip(overlap, 0.0, None).sum(axis=1) / pitch, 0.0, 1.0)


def _patch_centers(period: float, width: float, extent: float) -> np.ndarray:
    count = int(math.floor((extent / 2.0 - width / 2.0) / period + 1e-9))
    return np.arange(-count, count + 1) * period


def patch_plane_mask(spec: PatchPlaneSpec, like: FieldGrid) -> ApertureMask:
    """
    将贴片层栅格化为反射掩模（按面积覆盖比例加权）
    
    板外为 0，板内地面取 ground 系数，贴片处取 patch 系数
    """
    x = like.axis_x()
    y = like.axis_y()
    pitch = like.pitch_mm
    ext_x, ext_y = spec.extent_mm
    
    board_x = _overlap_fraction(x, pitch, np.array([0.0]), ext_x / 2.0)
    board_y = _overlap_fraction(y, pitch, np.array([0.0]), ext_y / 2.0)
    patch_x = _overlap_fraction(x, pitch, _patch_centers(spec.period_mm, spec.patch_width_mm, ext_x), spec.patch_width_mm / 2.0)
    patch_y = _overlap_fraction(y, pitch, _patch_centers(spec.period_mm, spec.patch_length_mm, ext_y), spec.patch_length_mm / 2.0)
    
    board = np.outer(board_y, board_x)
    patches = np.minimum(np.outer(patch_y, patch_x), board)
    reflection = spec.ground_gamma * (board - patches) + spec.patch_gamma * patches
    return like.with_samples(reflection)


# ==================== 单站幅度 ====================

class _PreparedTag:
    """扫描期间复用的板级网格、工作网格、掩模和传播方案"""
    
    def __init__(self, tag: TagAssembly):
        self.tag = tag
        lens = tag.lens_mask
        pitch = lens.pitch_mm
        ny, nx = lens.shape
        count = int(math.ceil(tag.board_extent_mm / pitch - 1e-9))
        # 板网格与透镜网格奇偶一致，保证透镜居中
        if count % 2 != nx % 2:
            count += 1
        count = max(count, nx, ny)
        if count % 2 != nx % 2 or count % 2 != ny % 2:
            count += 1
        oy, ox = (count - ny) // 2, (count - nx) // 2
        board = np.zeros((count, count), dtype=np.complex128)
        board[oy:oy + ny, ox:ox + nx] = lens.samples
        self.lens = FieldGrid(samples=board, pitch_mm=pitch, wavelength_mm=lens.wavelength_mm)
        # 往返全程在外扩的工作网格上计算，两次传播之间不裁剪
        work = count * tag.padding_factor
        if (work - count) % 2:
            work += 1
        oy, ox = (work - ny) // 2, (work - nx) // 2
        plane = np.full((work, work), tag.surround_transmission, dtype=np.complex128)
        plane[oy:oy + ny, ox:ox + nx] = lens.samples
        self.work = FieldGrid(samples=plane, pitch_mm=pitch, wavelength_mm=lens.wavelength_mm)
        self.reflection = patch_plane_mask(tag.patch_plane, self.work)
        self.plan: PropagationPlan = plan_for(self.work, padding_factor=1)
        logger.debug("标签网格 %s, 工作网格 %s, 间距 %.4f mm", self.lens.shape, self.work.shape, pitch)
    
    def multiplier(self, theta_deg: float) -> float:
        table = self.tag.angle_multiplier
        if not table:
            return 1.0
        angles = np.array([row[0] for row in table])
        values = np.array([row[1] for row in table])
        return float(np.interp(theta_deg, angles, values))
    
    def return_field(self, theta_deg: float) -> FieldGrid:
        """透镜 → 传播 → 贴片层反射 → 回程传播 → 透镜，返回出射口径场（工作网格）"""
        gain = self.multiplier(theta_deg)
        incident = plane_wave(self.work, theta_deg)
        at_lens = incident.with_samples(incident.samples * self.work.samples * gain)
        at_patch = propagate(at_lens, self.tag.separation_mm, self.plan)
        reflected = at_patch.with_samples(at_patch.samples * self.reflection.samples)
        back = propagate(reflected, self.tag.separation_mm, self.plan)
        return back.with_samples(back.samples * self.work.samples * gain)


def board_grid(tag: TagAssembly) -> FieldGrid:
    """嵌入透镜掩模的板级网格（透镜口径外不透射）"""
    return _PreparedTag(tag).lens


def _check_theta(theta_deg: float) -> None:
    if not abs(theta_deg) < 90.0:
        raise DomainException(f"入射角必须满足 |θ| < 90°（当前值: {theta_deg}）")


def _obliquity(theta_deg: float) -> float:
    # 物理光学投影面积因子 cosθ
    return math.cos(math.radians(theta_deg))


def monostatic_amplitude(tag: Union[TagAssembly, _PreparedTag], theta_deg: float) -> complex:
    """
    标签在入射方向的后向散射复幅度（mm²）
    
    Raises:
        DomainException: |θ| ≥ 90°
    """
    _check_theta(theta_deg)
    prepared = tag if isinstance(tag, _PreparedTag) else _PreparedTag(tag)
    out = prepared.return_field(theta_deg)
    return complex(far_field(out, [-theta_deg])[0]) * _obliquity(theta_deg)


def patch_only_amplitude(spec: PatchPlaneSpec, like: FieldGrid, theta_deg: float) -> complex:
    """单独贴片层（无透镜）的后向散射复幅度（mm²）"""
    _check_theta(theta_deg)
    return _patch_amplitude(patch_plane_mask(spec, like), theta_deg)


def _patch_amplitude(reflection: FieldGrid, theta_deg: float) -> complex:
    incident = plane_wave(reflection, theta_deg)
    out = incident.with_samples(incident.samples * reflection.samples)
    return complex(far_field(out, [-theta_deg])[0]) * _obliquity(theta_deg)


def backscatter_pattern(tag: TagAssembly, theta_deg: float, observe_deg: Sequence[float]) -> np.ndarray:
    """固定入射角 θ 时回程场在各观察方向上的幅度 |F|，用于验证逆向反射"""
    _check_theta(theta_deg)
    out = _PreparedTag(tag).return_field(theta_deg)
    return np.abs(far_field(out, [-float(a) for a in observe_deg]))


def rcs_from_amplitude(amplitude_mm2: complex, wavelength_mm: float) -> float:
    """
    σ = 4π|A|²/λ²（A 换算为 m²，λ 换算为 m），返回 dBsm
    
    幅度为零时返回下限值 RCS_FLOOR_DBSM
    """
    if not wavelength_mm > 0:
        raise DomainException(f"波长必须为正数（当前值: {wavelength_mm}）")
    magnitude_m2 = abs(amplitude_mm2) * 1e-6
    wavelength_m = wavelength_mm * 1e-3
    sigma = 4.0 * math.pi * magnitude_m2 ** 2 / wavelength_m ** 2
    if sigma <= 0.0:
        return settings.RCS_FLOOR_DBSM
    return max(10.0 * math.log10(sigma), settings.RCS_FLOOR_DBSM)


# ==================== 扫描 ====================

def sweep_angles(start_deg: float = -90.0, stop_deg: float = 90.0, step_deg: float = 1.0) -> np.ndarray:
    """闭区间等步长角度序列"""
    if step_deg <= 0 or stop_deg < start_deg:
        raise DomainException(f"扫描区间无效: {start_deg} → {stop_deg}, 步长 {step_deg}")
    if start_deg < -90.0 or stop_deg > 90.0:
        raise DomainException("扫描角度必须在 [−90°, 90°] 内")
    count = int(round((stop_deg - start_deg) / step_deg)) + 1
    return start_deg + step_deg * np.arange(count)


def sweep_rcs(
    target: Union[TagAssembly, PatchPlaneSpec],
    start_deg: float = -90.0,
    stop_deg: float = 90.0,
    step_deg: float = 1.0,
    like: Optional[FieldGrid] = None,
    threads: int = 1,
    label: str = "",
) -> RcsSweep:
    """
    逐角度计算单站 RCS
    
    ±90° 为掠入射，投影面积为零，记为下限值
    
    Args:
        target: 标签装配，或单独贴片层规格（此时需提供网格 like）
        start_deg, stop_deg, step_deg: 扫描区间与步长（度）
        like: 贴片层栅格化所用网格
        threads: 并行线程数，结果按角度索引组装
        label: 扫描标签
    """
    angles = sweep_angles(start_deg, stop_deg, step_deg)
    if isinstance(target, TagAssembly):
        prepared = _PreparedTag(target)
        wavelength = prepared.lens.wavelength_mm
        amplitude = lambda theta: monostatic_amplitude(prepared, theta)
    else:
        if like is None:
            raise DomainException("单独贴片层扫描需要提供网格")
        reflection = patch_plane_mask(target, like)
        wavelength = like.wavelength_mm
        amplitude = lambda theta: _patch_amplitude(reflection, theta)
    
    def rcs_at(theta: float) -> float:
        if abs(theta) >= 90.0:
            return settings.RCS_FLOOR_DBSM
        return rcs_from_amplitude(amplitude(float(theta)), wavelength)
    
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            values = list(pool.map(rcs_at, angles))
    else:
        values = [rcs_at(theta) for theta in angles]
    
    frequency = frequency_of(wavelength)
    logger.info("RCS扫描 %s: %d 个角度, 峰值 %.2f dBsm", label or "-", len(angles), max(values))
    return RcsSweep(
        angles_deg=[float(a) for a in angles],
        rcs_dbsm=[float(v) for v in values],
        frequency_ghz=frequency,
        step_deg=step_deg,
        label=label,
    )


def bragg_angles(period_mm: float, wavelength_mm: float, orders: Sequence[int] = (1,)) -> BraggResult:
    """
    周期结构单站布拉格方向 2d·sinθ = mλ
    
    |mλ/(2d)| > 1 的阶数被略去并计数
    """
    if not period_mm > 0:
        raise DomainException(f"周期必须为正数（当前值: {period_mm}）")
    kept_orders, angles = [], []
    for m in orders:
        s = m * wavelength_mm / (2.0 * period_mm)
        if abs(s) <= 1.0:
            kept_orders.append(int(m))
            angles.append(math.degrees(math.asin(s)))
    return BraggResult(orders=kept_orders, angles_deg=angles, omitted=len(orders) - len(kept_orders))


def local_maxima(sweep: RcsSweep) -> List[float]:
    """扫描中的局部极大值角度（严格大于两侧相邻点）"""
    values = np.asarray(sweep.rcs_dbsm)
    idx = [k for k in range(1, len(values) - 1) if values[k] > values[k - 1] and values[k] > values[k + 1]]
    return [sweep.angles_deg[k] for k in idx]


def sweep_stats(sweep: RcsSweep, coverage_deg: float) -> SweepStats:
    """
    覆盖角 [−coverage/2, +coverage/2] 内的峰值、中位数、均值和最大偏离
    
    Raises:
        DomainException: 覆盖角超出扫描范围或选区为空
    """
    half = coverage_deg / 2.0
    angles = np.asarray(sweep.angles_deg)
    if half > np.max(np.abs(angles)) + 1e-9:
        raise DomainException(f"覆盖角 {coverage_deg}° 超出扫描范围")
    selected = np.asarray(sweep.rcs_dbsm)[np.abs(angles) <= half + 1e-9]
    if selected.size == 0:
        raise DomainException(f"覆盖角 {coverage_deg}° 内没有采样点")
    mean = float(np.mean(selected))
    return SweepStats(
        coverage_deg=coverage_deg,
        count=int(selected.size),
        peak_dbsm=float(np.max(selected)),
        median_dbsm=float(np.median(selected)),
        mean_dbsm=mean,
        variation_db=float(np.max(np.abs(selected - mean))),
    )


def sweep_improvement(
    tag_sweep: RcsSweep,
    patch_sweep: RcsSweep,
    min_abs_deg: float = 0.0,
    max_abs_deg: float = 40.0,
) -> Dict[str, float]:
    """
    min ≤ |θ| ≤ max 内标签相对贴片层的平均 RCS 提升，以及对应的增益提升（RCS 提升的一半）
    """
    if tag_sweep.angles_deg != patch_sweep.angles_deg:
        raise DomainException("两次扫描的角度轴不一致")
    angles = np.abs(np.asarray(tag_sweep.angles_deg))
    selected = (angles >= min_abs_deg - 1e-9) & (angles <= max_abs_deg + 1e-9)
    if not np.any(selected):
        raise DomainException("选定角度区间内没有采样点")
    delta = np.asarray(tag_sweep.rcs_dbsm)[selected] - np.asarray(patch_sweep.rcs_dbsm)[selected]
    mean_delta = float(np.mean(delta))
    return {
        "rcs_improvement_db": mean_delta,
        "gain_improvement_db": mean_delta / 2.0,
        "median_improvement_db": float(
            np.median(np.asarray(tag_sweep.rcs_dbsm)[selected]) - np.median(np.asarray(patch_sweep.rcs_dbsm)[selected])
        ),
    }


# ==================== 对比表 ====================

COMPARISON_HEADER = ["reference", "size_mm", "median_rcs_dbsm", "angular_coverage_deg"]


def load_comparison_table(path) -> List[Dict[str, object]]:
    """读取已发表标记的对比数据（固定值，不仿真）"""
    path = Path(path)
    if not path.is_file():
        raise NotFoundException(f"对比表文件不存在: {path}")
    rows = []
    with path.open("r", encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(line for line in handle if not line.startswith("#"))
        if reader.fieldnames != COMPARISON_HEADER:
            raise DataFormatException(f"表头应为 {','.join(COMPARISON_HEADER)}", path=str(path), line=1)
        for row_number, row in enumerate(reader, start=2):
            try:
                rows.append({
                    "reference": row["reference"],
                    "size_mm": row["size_mm"],
                    "median_rcs_dbsm": float(row["median_rcs_dbsm"]),
                    "angular_coverage_deg": float(row["angular_coverage_deg"]),
                })
            except (TypeError, ValueError) as e:
                raise DataFormatException(f"无法解析: {e}", path=str(path), line=row_number)
    return rows


def comparison_table(fixture_rows: Sequence[Dict[str, object]], simulated: Sequence[Tuple[str, str, SweepStats]]) -> List[Dict[str, object]]:
    """对比表：固定数据行 + 仿真行 (名称, 尺寸, 统计)"""
    rows = [dict(row) for row in fixture_rows]
    for name, size, stats in simulated:
        rows.append({
            "reference": name,
            "size_mm": size,
            "median_rcs_dbsm": stats.median_dbsm,
            "angular_coverage_deg": stats.coverage_deg,
        })
    return rows


def sweep_rows(sweep: RcsSweep) -> List[List[float]]:
    return [[a, v] for a, v in zip(sweep.angles_deg, sweep.rcs_dbsm)]


ANGLE_MULTIPLIER_HEADER = ["theta_deg", "magnitude"]


def load_angle_multiplier(path) -> Tuple[Tuple[float, float], ...]:
    """读取透射幅度-入射角表（theta_deg,magnitude），角度需严格递增"""
    path = Path(path)
    if not path.is_file():
        raise NotFoundException(f"角度表文件不存在: {path}")
    table = []
    with path.open("r", encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(line for line in handle if not line.startswith("#"))
        if reader.fieldnames != ANGLE_MULTIPLIER_HEADER:
            raise DataFormatException(f"表头应为 {','.join(ANGLE_MULTIPLIER_HEADER)}", path=str(path), line=1)
        for row_number, row in enumerate(reader, start=2):
            try:
                theta, magnitude = float(row["theta_deg"]), float(row["magnitude"])
            except (TypeError, ValueError) as e:
                raise DataFormatException(f"无法解析: {e}", path=str(path), line=row_number)
            if magnitude < 0 or (table and theta <= table[-1][0]):
                raise DataFormatException("幅度必须非负且角度严格递增", path=str(path), line=row_number)
            table.append((theta, magnitude))
    if len(table) < 2:
        raise DataFormatException("角度表至少需要两行", path=str(path), line=1)
    return tuple(table)
