"""
超表面透镜综合
按抛物线相位分布计算各单元所需相位，在单元库中按圆周相位距离就近量化，并栅格化为透射掩模
"""
import csv
import logging
import math
from pathlib import Path
from typing import Dict, List, Literal, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field, field_validator

from app.core.exceptions import DataFormatException, DomainException, NotFoundException
from app.core.grid import ApertureMask, FieldGrid
from app.core.units import wavelength_of

logger = logging.getLogger(__name__)

LIBRARY_HEADER = ["cell_id", "r_mm", "w_mm", "g_mm", "alpha_deg", "phase_deg", "magnitude"]
LENS_EXPORT_HEADER = [
    "i", "j", "ideal_phase_deg", "assigned_phase_deg", "magnitude",
    "r_mm", "w_mm", "g_mm", "alpha_deg",
]

MaskMode = Literal["ideal", "quantized"]


def wrap_degrees(value):
    """相位归一化到 [0, 360)"""
    wrapped = np.mod(value, 360.0)
    # np.mod 对极小负数可能返回 360.0
    return np.where(wrapped >= 360.0, 0.0, wrapped) if isinstance(wrapped, np.ndarray) else (0.0 if wrapped >= 360.0 else float(wrapped))


def circular_distance(a, b):
    """圆周相位距离 min(|Δ|, 360−|Δ|)（度）"""
    delta = np.abs(np.mod(np.asarray(a, dtype=float) - np.asarray(b, dtype=float), 360.0))
    return np.minimum(delta, 360.0 - delta)


# ==================== 数据类型 ====================

class UnitCellEntry(BaseModel):
    """单元库中的一行：几何参数 + 复透射"""
    cell_id: str = Field("", description="单元标识")
    r_mm: float = Field(..., gt=0, description="环半径（mm）")
    w_mm: float = Field(..., gt=0, description="环宽（mm）")
    g_mm: float = Field(..., gt=0, description="间隙（mm）")
    alpha_deg: float = Field(..., description="开口角（度）")
    phase_deg: float = Field(..., description="透射相位（度），归一化到 [0, 360)")
    magnitude: float = Field(..., ge=0, le=1, description="透射幅度（线性）")
    
    class Config:
        frozen = True
    
    @field_validator("phase_deg")
    @classmethod
    def _normalize_phase(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("相位必须为有限值")
        return wrap_degrees(value)


class LensSpec(BaseModel):
    """透镜规格"""
    cells_per_side: int = Field(21, ge=3, description="每边单元数（奇数）")
    pitch_mm: float = Field(1.728, gt=0, description="单元周期 p（mm）")
    focal_length_mm: float = Field(20.0, gt=0, description="焦距 f（mm）")
    design_frequency_ghz: float = Field(78.5, gt=0, description="设计频率（GHz）")
    
    class Config:
        frozen = True
    
    @field_validator("cells_per_side")
    @classmethod
    def _odd(cls, value: int) -> int:
        if value % 2 == 0:
            raise ValueError(f"cells_per_side 必须为奇数（当前值: {value}）")
        return value
    
    @property
    def half(self) -> int:
        return (self.cells_per_side - 1) // 2
    
    @property
    def wavelength_mm(self) -> float:
        return wavelength_of(self.design_frequency_ghz)
    
    @property
    def aperture_mm(self) -> float:
        return self.cells_per_side * self.pitch_mm


class ProfileSample(BaseModel):
    """单元中心处的理想相位"""
    i: int
    j: int
    ideal_phase_deg: float


class QuantizedLens(BaseModel):
    """
    量化后的透镜
    
    数组按 [j + h, i + h] 索引，单元 (i, j) 中心位于 (i·p, j·p)
    """
    spec: LensSpec
    library: Tuple[UnitCellEntry, ...]
    ideal_phase_deg: np.ndarray = Field(..., description="各单元理想相位（度）")
    assignment: np.ndarray = Field(..., description="各单元分配的库索引")
    
    class Config:
        frozen = True
        arbitrary_types_allowed = True
    
    def index_of(self, i: int, j: int) -> Tuple[int, int]:
        h = self.spec.half
        if abs(i) > h or abs(j) > h:
            raise DomainException(f"单元 ({i},{j}) 超出透镜范围 ±{h}")
        return j + h, i + h
    
    def entry_at(self, i: int, j: int) -> UnitCellEntry:
        return self.library[int(self.assignment[self.index_of(i, j)])]
    
    def ideal_at(self, i: int, j: int) -> float:
        return float(self.ideal_phase_deg[self.index_of(i, j)])
    
    def assigned_phase_deg(self) -> np.ndarray:
        phases = np.array([entry.phase_deg for entry in self.library])
        return phases[self.assignment]
    
    def assigned_magnitude(self) -> np.ndarray:
        magnitudes = np.array([entry.magnitude for entry in self.library])
        return magnitudes[self.assignment]


# ==================== 相位分布 ====================

def _phase_from_r2(r2, focal_length_mm: float, wavelength_mm: float):
    # √(r²+f²) − f 写成 r²/(√(r²+f²)+f)，避免小半径处相消
    path = r2 / (np.sqrt(r2 + focal_length_mm ** 2) + focal_length_mm)
    return wrap_degrees(360.0 * path / wavelength_mm)


def required_phase(x_mm, y_mm, focal_length_mm: float, wavelength_mm: float):
    """
    抛物线相位分布 φ = (2π/λ)(√(x²+y²+f²) − f)，以度表示并归一化到 [0, 360)
    
    Args:
        x_mm, y_mm: 透镜平面坐标（mm），可为标量或数组
        focal_length_mm: 焦距 f（mm）
        wavelength_mm: 波长 λ（mm）
    
    Returns:
        所需相位（度）
    
    Raises:
        DomainException: f 或 λ 非正
    """
    if not focal_length_mm > 0:
        raise DomainException(f"焦距必须为正数（当前值: {focal_length_mm}）")
    if not wavelength_mm > 0:
        raise DomainException(f"波长必须为正数（当前值: {wavelength_mm}）")
    x = np.asarray(x_mm, dtype=float)
    y = np.asarray(y_mm, dtype=float)
    phase = _phase_from_r2(x * x + y * y, focal_length_mm, wavelength_mm)
    return float(phase) if np.ndim(phase) == 0 else phase


def _cell_phase_grid(spec: LensSpec) -> np.ndarray:
    # 半径平方先以整数 i²+j² 计算，保证等半径单元的相位逐位相同
    h = spec.half
    idx = np.arange(-h, h + 1)
    jj, ii = np.meshgrid(idx, idx, indexing="ij")
    r2_cells = (ii * ii + jj * jj).astype(float)
    return _phase_from_r2(r2_cells * spec.pitch_mm ** 2, spec.focal_length_mm, spec.wavelength_mm)


def sample_profile(spec: LensSpec) -> List[ProfileSample]:
    """
    在每个单元中心 (i·p, j·p) 处采样理想相位
    
    Args:
        spec: 透镜规格
    
    Returns:
        每个单元一条记录，按 j、i 递增排序
    """
    h = spec.half
    grid = _cell_phase_grid(spec)
    return [
        ProfileSample(i=i, j=j, ideal_phase_deg=float(grid[j + h, i + h]))
        for j in range(-h, h + 1)
        for i in range(-h, h + 1)
    ]


def adjacent_phase_steps(spec: LensSpec) -> np.ndarray:
    """沿 (0, j) 列的相邻单元理想相位差（未折叠，度），用于比较不同单元数的相位采样粗细"""
    h = spec.half
    r = np.arange(0, h + 1) * spec.pitch_mm
    unwrapped = 360.0 * (np.sqrt(r ** 2 + spec.focal_length_mm ** 2) - spec.focal_length_mm) / spec.wavelength_mm
    return np.diff(unwrapped)


# ==================== 量化 ====================

def _nearest_index(required_deg: float, phases: np.ndarray, magnitudes: np.ndarray) -> int:
    distance = circular_distance(phases, required_deg)
    order = np.lexsort((np.arange(len(phases)), -magnitudes, distance))
    return int(order[0])


def nearest_match(required_deg: float, library: Sequence[UnitCellEntry]) -> UnitCellEntry:
    """
    在单元库中查找圆周相位距离最小的条目
    
    平局时幅度大者优先，仍平局时库中靠前者优先
    
    Raises:
        DomainException: 单元库为空
    """
    if not library:
        raise DomainException("单元库为空")
    phases = np.array([entry.phase_deg for entry in library])
    magnitudes = np.array([entry.magnitude for entry in library])
    return library[_nearest_index(required_deg, phases, magnitudes)]


def build_quantized_lens(spec: LensSpec, library: Sequence[UnitCellEntry]) -> QuantizedLens:
    """
    对每个单元按理想相位做就近匹配
    
    等半径单元共享同一次匹配结果
    """
    if not library:
        raise DomainException("单元库为空")
    library = tuple(library)
    phases = np.array([entry.phase_deg for entry in library])
    magnitudes = np.array([entry.magnitude for entry in library])
    
    h = spec.half
    idx = np.arange(-h, h + 1)
    jj, ii = np.meshgrid(idx, idx, indexing="ij")
    r2_cells = ii * ii + jj * jj
    ideal = _cell_phase_grid(spec)
    
    assignment = np.empty(r2_cells.shape, dtype=np.int64)
    for r2 in np.unique(r2_cells):
        where = r2_cells == r2
        assignment[where] = _nearest_index(float(ideal[where][0]), phases, magnitudes)
    
    logger.debug("量化透镜: N=%d, 不同半径数=%d", spec.cells_per_side, len(np.unique(r2_cells)))
    return QuantizedLens(spec=spec, library=library, ideal_phase_deg=ideal, assignment=assignment)


def quantization_error_stats(lens: QuantizedLens) -> Dict[str, float]:
    """量化误差统计（圆周距离，度）"""
    error = circular_distance(lens.assigned_phase_deg(), lens.ideal_phase_deg)
    return {
        "max_error_deg": float(np.max(error)),
        "rms_error_deg": float(np.sqrt(np.mean(error ** 2))),
    }


def max_library_gap(library: Sequence[UnitCellEntry]) -> float:
    """库中相邻相位（含360°回绕）的最大间隔"""
    phases = np.sort(np.unique([entry.phase_deg for entry in library]))
    gaps = np.diff(np.concatenate([phases, [phases[0] + 360.0]]))
    return float(np.max(gaps))


def ring_table(lens: QuantizedLens) -> List[Dict[str, object]]:
    """
    (0, j) 列的分配结果，j 从外到内排列
    """
    rows = []
    for j in range(lens.spec.half, -1, -1):
        entry = lens.entry_at(0, j)
        rows.append({
            "cell": f"(0,{j})",
            "r_mm": entry.r_mm,
            "w_mm": entry.w_mm,
            "g_mm": entry.g_mm,
            "alpha_deg": entry.alpha_deg,
            "ideal_phase_deg": lens.ideal_at(0, j),
            "phase_deg": entry.phase_deg,
            "magnitude": entry.magnitude,
        })
    return rows


# ==================== 掩模 ====================

def lens_to_mask(lens: QuantizedLens, samples_per_cell: int = 4, mode: MaskMode = "quantized") -> ApertureMask:
    """
    将透镜栅格化为透射掩模 t = |t|·e^{+j·phase}
    
    每个单元在其占位内取常数；网格间距 p / samples_per_cell
    
    Args:
        lens: 量化透镜
        samples_per_cell: 每单元每边采样数（≥2）
        mode: "ideal" 使用理想相位和单位幅度，"quantized" 使用库相位和幅度
    """
    if samples_per_cell < 2:
        raise DomainException(f"samples_per_cell 必须 ≥ 2（当前值: {samples_per_cell}）")
    if mode == "ideal":
        phase = lens.ideal_phase_deg
        magnitude = np.ones_like(phase)
    elif mode == "quantized":
        phase = lens.assigned_phase_deg()
        magnitude = lens.assigned_magnitude()
    else:
        raise DomainException(f"未知掩模模式: {mode}")
    
    cells = magnitude * np.exp(1j * np.deg2rad(phase))
    block = np.ones((samples_per_cell, samples_per_cell))
    return FieldGrid(
        samples=np.kron(cells, block),
        pitch_mm=lens.spec.pitch_mm / samples_per_cell,
        wavelength_mm=lens.spec.wavelength_mm,
    )


# ==================== 文件读写 ====================

def _data_lines(handle):
    # 跳过以 # 开头的注释行（输出文件头包含配置哈希）
    for line in handle:
        if not line.lstrip().startswith("#"):
            yield line


def load_library(path) -> List[UnitCellEntry]:
    """
    读取单元库CSV
    
    Raises:
        NotFoundException: 文件不存在
        DataFormatException: 表头或数值错误（带文件和行号）
    """
    path = Path(path)
    if not path.is_file():
        raise NotFoundException(f"单元库文件不存在: {path}")
    entries: List[UnitCellEntry] = []
    with path.open("r", encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(_data_lines(handle))
        if reader.fieldnames is None or [name.strip() for name in reader.fieldnames] != LIBRARY_HEADER:
            raise DataFormatException(f"表头应为 {','.join(LIBRARY_HEADER)}", path=str(path), line=1)
        for row_number, row in enumerate(reader, start=2):
            try:
                entries.append(UnitCellEntry(
                    cell_id=row["cell_id"].strip(),
                    r_mm=float(row["r_mm"]),
                    w_mm=float(row["w_mm"]),
                    g_mm=float(row["g_mm"]),
                    alpha_deg=float(row["alpha_deg"]),
                    phase_deg=float(row["phase_deg"]),
                    magnitude=float(row["magnitude"]),
                ))
            except (TypeError, ValueError, AttributeError) as e:
                raise DataFormatException(f"无法解析: {e}", path=str(path), line=row_number)
    if not entries:
        raise DataFormatException("单元库为空", path=str(path))
    logger.debug("读取单元库 %s: %d 条", path, len(entries))
    return entries


def library_rows(library: Sequence[UnitCellEntry]) -> List[List[object]]:
    return [
        [e.cell_id, e.r_mm, e.w_mm, e.g_mm, e.alpha_deg, e.phase_deg, e.magnitude]
        for e in library
    ]


def save_library(library: Sequence[UnitCellEntry], path) -> None:
    """写出单元库CSV，表头与 load_library 一致"""
    with Path(path).open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(LIBRARY_HEADER)
        writer.writerows(library_rows(library))


def quantized_lens_rows(lens: QuantizedLens) -> List[List[object]]:
    """QuantizedLens 导出行（按 j、i 递增）"""
    h = lens.spec.half
    rows = []
    for j in range(-h, h + 1):
        for i in range(-h, h + 1):
            entry = lens.entry_at(i, j)
            rows.append([
                i, j, lens.ideal_at(i, j), entry.phase_deg, entry.magnitude,
                entry.r_mm, entry.w_mm, entry.g_mm, entry.alpha_deg,
            ])
    return rows


def synthetic_library(step_deg: float = 1.0, magnitude: float = 1.0) -> List[UnitCellEntry]:
    """等间隔相位的合成单元库（几何参数为占位值）"""
    count = int(round(360.0 / step_deg))
    return [
        UnitCellEntry(
            cell_id=f"syn{k}", r_mm=0.1, w_mm=0.1, g_mm=0.1, alpha_deg=0.0,
            phase_deg=k * step_deg, magnitude=magnitude,
        )
        for k in range(count)
    ]
