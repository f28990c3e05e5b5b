"""
实验配置相关的Pydantic schemas
TOML 配置文件按小节组织，物理量键名带单位后缀
"""
import logging
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, Field, ValidationError, model_validator

from app.config import settings
from app.core.exceptions import BaseToolkitException, ConfigValidationException
from app.engine.fmcw import ChirpConfig, NoiseSpec, PointTarget, VirtualArray, check_targets

logger = logging.getLogger(__name__)

DATA_DIR = Path(__file__).resolve().parents[2] / "data"
DEFAULT_LIBRARY_PATH = DATA_DIR / "table1_library.csv"
DEFAULT_COMPARISON_PATH = DATA_DIR / "marker_comparison.csv"


# ==================== 配置小节 ====================

class LensBlock(BaseModel):
    """透镜与单元库"""
    frequency_ghz: float = Field(settings.DESIGN_FREQUENCY_GHZ, gt=0, description="设计频率（GHz）")
    focal_length_mm: float = Field(settings.FOCAL_LENGTH_MM, gt=0, description="焦距（mm）")
    cell_pitch_mm: float = Field(settings.CELL_PITCH_MM, gt=0, description="单元周期（mm）")
    cells_per_side: int = Field(settings.CELLS_PER_SIDE, ge=3, description="每边单元数（奇数）")
    samples_per_cell: int = Field(settings.SAMPLES_PER_CELL, ge=2, description="每个单元的采样点数")
    library_path: Optional[str] = Field(None, description="单元库CSV，未给出时使用内置库")
    mask_mode: Literal["quantized", "ideal"] = Field("quantized", description="掩模相位来源")
    profile_sizes: List[int] = Field(default_factory=lambda: [11, 21], description="输出相位剖面的阵列规模")
    
    @model_validator(mode="after")
    def _odd(self):
        if self.cells_per_side % 2 == 0 or any(n % 2 == 0 or n < 3 for n in self.profile_sizes):
            raise ValueError("每边单元数必须为不小于3的奇数")
        return self


class PropagationBlock(BaseModel):
    padding_factor: int = Field(settings.PADDING_FACTOR, ge=1, description="补零倍数")


class ScanBlock(BaseModel):
    """焦距扫描"""
    z_start_mm: float = Field(10.0, gt=0, description="起始距离（mm）")
    z_stop_mm: float = Field(35.0, gt=0, description="终止距离（mm）")
    steps: int = Field(101, ge=2, description="采样点数")
    slice: bool = Field(False, description="是否输出 x–z 强度切片")
    slice_steps: int = Field(51, ge=2, description="切片的 z 采样点数")
    
    @model_validator(mode="after")
    def _ordered(self):
        if not self.z_start_mm < self.z_stop_mm:
            raise ValueError(f"z_start_mm ({self.z_start_mm}) 必须小于 z_stop_mm ({self.z_stop_mm})")
        return self


class TagBlock(BaseModel):
    """标签装配与贴片层"""
    mode: Literal["tag", "patch", "both"] = Field("both", description="扫描对象")
    separation_mm: float = Field(settings.TAG_SEPARATION_MM, gt=0, description="透镜与贴片层间距（mm）")
    board_extent_mm: float = Field(settings.BOARD_EXTENT_MM, gt=0, description="板尺寸（mm）")
    patch_length_mm: float = Field(settings.PATCH_LENGTH_MM, gt=0)
    patch_width_mm: float = Field(settings.PATCH_WIDTH_MM, gt=0)
    patch_period_mm: float = Field(settings.PATCH_PERIOD_MM, gt=0)
    patch_reflection: Tuple[float, float] = Field((1.0, 0.0), description="贴片反射系数 (实部, 虚部)")
    ground_reflection: Tuple[float, float] = Field((-1.0, 0.0), description="地面反射系数 (实部, 虚部)")
    angle_multiplier_path: Optional[str] = Field(None, description="透射幅度-入射角CSV")


class SweepBlock(BaseModel):
    """RCS–方位扫描"""
    start_deg: float = Field(-90.0, ge=-90.0, le=90.0)
    stop_deg: float = Field(90.0, ge=-90.0, le=90.0)
    step_deg: float = Field(1.0, gt=0)
    coverage_deg: float = Field(80.0, gt=0, le=180.0, description="统计用覆盖角")
    improvement_intervals_deg: List[Tuple[float, float]] = Field(
        default_factory=lambda: [(0.0, 40.0), (19.0, 40.0)], description="|θ| 区间内的平均提升"
    )
    bragg_orders: List[int] = Field(default_factory=lambda: [-1, 1])
    comparison_path: Optional[str] = Field(None, description="对比表CSV，未给出时使用内置表")
    
    @model_validator(mode="after")
    def _ordered(self):
        if not self.start_deg <= self.stop_deg:
            raise ValueError("start_deg 不能大于 stop_deg")
        return self


class LinkBlock(BaseModel):
    """链路预算"""
    anchor_range_m: float = Field(71.41, gt=0)
    anchor_snr_db: float = Field(10.73)
    threshold_db: float = Field(settings.DETECTION_THRESHOLD_DB)
    tag_rcs_dbsm: Optional[float] = Field(3.54)
    reference_rcs_dbsm: Optional[float] = Field(-13.06)
    marker_delta_db: Optional[float] = Field(20.44)
    curve_ranges_m: List[float] = Field(default_factory=lambda: [10.0, 20.0, 40.0, 71.41, 100.0])


class CalibrationBlock(BaseModel):
    """球体定标"""
    sphere_diameter: float = Field(2.175, gt=0, description="定标球直径")
    sphere_unit: Literal["in", "mm", "m"] = Field("in")
    sphere_power_db: float = Field(-60.0, description="定标球回波功率（dB）")
    range_m: float = Field(5.0, gt=0, description="定标距离（m）")
    target_power_db: Optional[float] = Field(None, description="待测目标回波功率（dB）")
    target_range_m: Optional[float] = Field(None, gt=0, description="待测目标距离（m），不同于定标距离时做 R⁴ 修正")


class ChirpBlock(BaseModel):
    start_frequency_ghz: float = 76.81
    band_stop_ghz: float = 81.0
    slope_mhz_per_us: float = 10.235
    chirp_duration_us: float = 430.0
    adc_start_us: float = 6.0
    sample_rate_msps: float = 10.0
    samples_per_chirp: int = 4096
    chirps_per_tx: int = 128
    complex_adc: bool = False
    angle_bins: int = 181


class ArrayBlock(BaseModel):
    tx_count: int = Field(4, ge=1)
    rx_count: int = Field(4, ge=1)
    positions: Optional[List[int]] = Field(None, description="虚拟阵元位置（λ/2 单位），默认均匀线阵")


class TargetBlock(BaseModel):
    range_m: float = Field(..., gt=0)
    azimuth_deg: float = 0.0
    rcs_dbsm: Optional[float] = None
    amplitude: Optional[float] = Field(None, ge=0)


class NoiseBlock(BaseModel):
    level_db: Optional[float] = Field(None, description="每采样噪声功率（dB），不设置则无噪声")
    sky_frame: bool = Field(True, description="用无目标帧估计噪底")


class SceneBlock(BaseModel):
    """有/无标签成像对比"""
    bike_rcs_dbsm: float = -20.0
    marker_rcs_dbsm: float = 0.44
    range_m: float = Field(20.0, gt=0)
    azimuths_deg: List[float] = Field(default_factory=lambda: [0.0, 10.0, 20.0, 30.0])
    window_m: Tuple[float, float] = (19.0, 21.0)


class ExperimentConfig(BaseModel):
    """一次实验的完整配置（解析默认值与命令行覆盖之后）"""
    seed: int = Field(settings.DEFAULT_SEED, ge=0)
    threads: int = Field(settings.DEFAULT_THREADS, ge=1)
    output_dir: str = Field(settings.DEFAULT_OUTPUT_DIR)
    lens: LensBlock = Field(default_factory=LensBlock)
    propagation: PropagationBlock = Field(default_factory=PropagationBlock)
    scan: ScanBlock = Field(default_factory=ScanBlock)
    tag: TagBlock = Field(default_factory=TagBlock)
    sweep: SweepBlock = Field(default_factory=SweepBlock)
    link: LinkBlock = Field(default_factory=LinkBlock)
    calibration: CalibrationBlock = Field(default_factory=CalibrationBlock)
    chirp: ChirpBlock = Field(default_factory=ChirpBlock)
    array: ArrayBlock = Field(default_factory=ArrayBlock)
    targets: List[TargetBlock] = Field(default_factory=lambda: [TargetBlock(range_m=20.0, azimuth_deg=10.0, rcs_dbsm=0.44)])
    noise: NoiseBlock = Field(default_factory=NoiseBlock)
    scene: Optional[SceneBlock] = None
    
    class Config:
        extra = "forbid"
    
    # ---------- 派生对象 ----------
    
    def library_file(self) -> Path:
        return Path(self.lens.library_path) if self.lens.library_path else DEFAULT_LIBRARY_PATH
    
    def comparison_file(self) -> Path:
        return Path(self.sweep.comparison_path) if self.sweep.comparison_path else DEFAULT_COMPARISON_PATH
    
    def chirp_config(self) -> ChirpConfig:
        return ChirpConfig(tx_count=self.array.tx_count, rx_count=self.array.rx_count, **self.chirp.model_dump())
    
    def virtual_array(self) -> VirtualArray:
        if self.array.positions is None:
            return VirtualArray.uniform(self.array.tx_count, self.array.rx_count)
        return VirtualArray(tx_count=self.array.tx_count, rx_count=self.array.rx_count, positions=tuple(self.array.positions))
    
    def point_targets(self) -> List[PointTarget]:
        return [PointTarget(**t.model_dump()) for t in self.targets]
    
    def noise_spec(self, seed_offset: int = 0) -> NoiseSpec:
        return NoiseSpec(level_db=self.noise.level_db, seed=self.seed + seed_offset)


# ==================== 加载与校验 ====================

def _resolve(path: Optional[str], base: Path) -> Optional[str]:
    if path is None:
        return None
    candidate = Path(path)
    return str(candidate if candidate.is_absolute() else (base / candidate))


def build_config(data: Dict[str, Any], base_dir: Optional[Path] = None, overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
    """
    由字典构建配置
    
    Args:
        data: 解析后的 TOML 内容
        base_dir: 相对路径的基准目录（配置文件所在目录）
        overrides: 顶层覆盖项（seed、threads、output_dir），值为 None 的忽略
    
    Raises:
        ConfigValidationException: 字段校验失败
    """
    merged = dict(data)
    for key, value in (overrides or {}).items():
        if value is not None:
            merged[key] = value
    if base_dir is not None:
        for block, key in (("lens", "library_path"), ("tag", "angle_multiplier_path"), ("sweep", "comparison_path")):
            if isinstance(merged.get(block), dict) and merged[block].get(key):
                merged[block] = {**merged[block], key: _resolve(merged[block][key], base_dir)}
    try:
        return ExperimentConfig(**merged)
    except ValidationError as e:
        details = "; ".join(f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors())
        raise ConfigValidationException(f"配置校验失败: {details}")


def load_experiment_config(path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
    """
    读取 TOML 配置；path 为 None 时使用全部默认值
    
    Raises:
        ConfigValidationException: 文件不存在、TOML 语法错误或字段校验失败
    """
    if path is None:
        return build_config({}, None, overrides)
    config_path = Path(path)
    if not config_path.is_file():
        raise ConfigValidationException(f"配置文件不存在: {config_path}")
    try:
        with config_path.open("rb") as handle:
            data = tomllib.load(handle)
    except tomllib.TOMLDecodeError as e:
        raise ConfigValidationException(f"{config_path}: TOML 解析失败: {e}")
    logger.debug("读取配置 %s", config_path)
    return build_config(data, config_path.parent, overrides)


def validate_inputs(config: ExperimentConfig, command: str) -> Dict[str, Any]:
    """
    计算开始前的校验：读取并解析所有被引用的输入文件，构建引擎对象
    
    Returns:
        已加载的输入（库、对比表、角度表、调频配置等）
    
    Raises:
        BaseToolkitException: 任何输入不合法
    """
    from app.engine import scatter, synthesis
    
    loaded: Dict[str, Any] = {}
    if command in ("synthesize", "focus-scan", "rcs-sweep"):
        loaded["library"] = synthesis.load_library(config.library_file())
    if command == "rcs-sweep":
        loaded["comparison"] = scatter.load_comparison_table(config.comparison_file())
        if config.tag.angle_multiplier_path:
            loaded["angle_multiplier"] = scatter.load_angle_multiplier(config.tag.angle_multiplier_path)
    if command == "fmcw":
        try:
            loaded["chirp"] = config.chirp_config()
            loaded["array"] = config.virtual_array()
            loaded["targets"] = config.point_targets()
        except ValidationError as e:
            raise ConfigValidationException(f"调频/阵列/目标配置不合法: {e.errors()[0]['msg']}")
        check_targets(loaded["chirp"], loaded["targets"])
    return loaded


# ==================== API 请求 ====================

class LensRequest(LensBlock):
    """透镜综合请求"""
    library: Optional[List[Dict[str, Any]]] = Field(None, description="单元库条目，未给出时使用内置库")


class FocalScanRequest(BaseModel):
    lens: LensBlock = Field(default_factory=LensBlock)
    scan: ScanBlock = Field(default_factory=ScanBlock)
    padding_factor: int = Field(settings.PADDING_FACTOR, ge=1)


class SweepRequest(BaseModel):
    lens: LensBlock = Field(default_factory=lambda: LensBlock(samples_per_cell=2))
    tag: TagBlock = Field(default_factory=lambda: TagBlock(mode="patch"))
    sweep: SweepBlock = Field(default_factory=lambda: SweepBlock(start_deg=-40.0, stop_deg=40.0, step_deg=5.0, coverage_deg=80.0))
    padding_factor: int = Field(settings.PADDING_FACTOR, ge=1)


class BraggRequest(BaseModel):
    period_mm: float = Field(settings.PATCH_PERIOD_MM, gt=0)
    frequency_ghz: float = Field(settings.DESIGN_FREQUENCY_GHZ, gt=0)
    orders: List[int] = Field(default_factory=lambda: [-1, 1])


class CalibrationRequest(CalibrationBlock):
    pass


class LinkRequest(LinkBlock):
    frequency_ghz: float = Field(settings.DESIGN_FREQUENCY_GHZ, gt=0)


class FmcwScenarioRequest(BaseModel):
    chirp: ChirpBlock = Field(default_factory=lambda: ChirpBlock(chirps_per_tx=4))
    array: ArrayBlock = Field(default_factory=ArrayBlock)
    targets: List[TargetBlock] = Field(default_factory=lambda: [TargetBlock(range_m=20.0, azimuth_deg=10.0, rcs_dbsm=0.44)])
    noise: NoiseBlock = Field(default_factory=lambda: NoiseBlock(level_db=None))
    seed: int = Field(0, ge=0)
