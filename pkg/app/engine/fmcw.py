"""
FMCW TDM-MIMO 雷达信号链
调频参数与派生量、点目标拍频信号合成、距离 FFT + 角度 FFT 两级处理、峰值与 SNR

帧数据布局：samples[时隙, 接收通道, 采样点]，时隙 = 重复序号 × tx_count + tx
虚拟阵元序号 = tx × rx_count + rx
"""
import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.fft
from pydantic import BaseModel, Field, field_validator, model_validator
from scipy.signal.windows import hamming

from app.core.constants import SPEED_OF_LIGHT_M_S
from app.core.exceptions import DomainException
from app.core.units import db_from_power
from app.engine.link import range_factor

logger = logging.getLogger(__name__)

# 全零谱的功率下限（dB）
POWER_FLOOR_DB = -300.0
# 频带上限检查的相对容差
BAND_TOLERANCE = 1e-3
# 角度 FFT 的分块重复数
ANGLE_BLOCK = 16


# ==================== 配置 ====================

class ChirpConfig(BaseModel):
    """调频配置"""
    start_frequency_ghz: float = Field(76.81, gt=0, description="起始频率（GHz）")
    band_stop_ghz: float = Field(81.0, gt=0, description="频带上限（GHz）")
    slope_mhz_per_us: float = Field(10.235, gt=0, description="调频斜率（MHz/µs）")
    chirp_duration_us: float = Field(430.0, gt=0, description="单个 chirp 时长（µs）")
    adc_start_us: float = Field(6.0, ge=0, description="ADC 采样起始延迟（µs）")
    sample_rate_msps: float = Field(10.0, gt=0, description="采样率（Msps）")
    samples_per_chirp: int = Field(4096, ge=2, description="每个 chirp 的采样点数")
    tx_count: int = Field(4, ge=1, description="发射通道数")
    rx_count: int = Field(4, ge=1, description="接收通道数")
    chirps_per_tx: int = Field(128, ge=1, description="每帧每个发射通道的 chirp 数")
    complex_adc: bool = Field(False, description="复数采样（默认实数采样）")
    angle_bins: int = Field(181, ge=2, description="角度 FFT 点数")
    
    class Config:
        frozen = True
    
    @model_validator(mode="after")
    def _check_timing(self):
        window = self.samples_per_chirp / self.sample_rate_msps
        if window > self.chirp_duration_us - self.adc_start_us + 1e-9:
            raise ValueError(
                f"采样窗口 {window:.3f} µs 超过 chirp 时长减起始延迟 {self.chirp_duration_us - self.adc_start_us:.3f} µs"
            )
        bandwidth = self.slope_mhz_per_us * window * 1e-3
        allowed = self.band_stop_ghz - self.start_frequency_ghz
        if allowed <= 0 or bandwidth > allowed * (1.0 + BAND_TOLERANCE):
            raise ValueError(f"采样带宽 {bandwidth:.4f} GHz 超出频带 [{self.start_frequency_ghz}, {self.band_stop_ghz}] GHz")
        return self
    
    @property
    def slope_hz_per_s(self) -> float:
        return self.slope_mhz_per_us * 1e12
    
    @property
    def sample_rate_hz(self) -> float:
        return self.sample_rate_msps * 1e6
    
    @property
    def range_bins(self) -> int:
        return self.samples_per_chirp if self.complex_adc else self.samples_per_chirp // 2


class ChirpDerived(BaseModel):
    """派生参数"""
    bandwidth_ghz: float
    range_resolution_m: float
    max_range_m: float
    range_bin_m: float
    sampling_window_us: float
    center_wavelength_mm: float


def derived_params(config: ChirpConfig) -> ChirpDerived:
    """
    带宽 = 斜率 × 采样窗口；分辨率 c/(2B)；
    最大距离：实数采样 (fs/2)·c/(2S)，复数采样 fs·c/(2S)
    """
    window_s = config.samples_per_chirp / config.sample_rate_hz
    bandwidth_hz = config.slope_hz_per_s * window_s
    usable_beat = config.sample_rate_hz if config.complex_adc else config.sample_rate_hz / 2.0
    center_ghz = config.start_frequency_ghz + bandwidth_hz * 1e-9 / 2.0
    return ChirpDerived(
        bandwidth_ghz=bandwidth_hz * 1e-9,
        range_resolution_m=SPEED_OF_LIGHT_M_S / (2.0 * bandwidth_hz),
        max_range_m=usable_beat * SPEED_OF_LIGHT_M_S / (2.0 * config.slope_hz_per_s),
        range_bin_m=SPEED_OF_LIGHT_M_S * config.sample_rate_hz / (2.0 * config.slope_hz_per_s * config.samples_per_chirp),
        sampling_window_us=window_s * 1e6,
        center_wavelength_mm=SPEED_OF_LIGHT_M_S / (center_ghz * 1e9) * 1e3,
    )


class VirtualArray(BaseModel):
    """虚拟阵列：阵元位置以 λ/2 为单位，沿方位向"""
    tx_count: int = Field(..., ge=1)
    rx_count: int = Field(..., ge=1)
    positions: Tuple[int, ...] = Field(..., description="各虚拟阵元位置（λ/2 单位）")
    
    class Config:
        frozen = True
    
    @model_validator(mode="after")
    def _check_positions(self):
        if len(self.positions) != self.tx_count * self.rx_count:
            raise ValueError(f"虚拟阵元数应为 {self.tx_count * self.rx_count}，实际 {len(self.positions)}")
        if any(p < 0 for p in self.positions):
            raise ValueError("阵元位置不能为负")
        if any(b <= a for a, b in zip(self.positions, self.positions[1:])):
            raise ValueError("阵元位置必须严格递增")
        return self
    
    @classmethod
    def uniform(cls, tx_count: int = 4, rx_count: int = 4) -> "VirtualArray":
        """tx_count × rx_count 个阵元的 λ/2 均匀线阵"""
        return cls(tx_count=tx_count, rx_count=rx_count, positions=tuple(range(tx_count * rx_count)))
    
    def virtual_index(self, tx: int, rx: int) -> int:
        return tx * self.rx_count + rx
    
    @property
    def aperture(self) -> int:
        return self.positions[-1] + 1
    
    def steering_vector(self, azimuth_deg: float) -> np.ndarray:
        """e^{jπ·sinθ·position}"""
        positions = np.asarray(self.positions, dtype=float)
        return np.exp(1j * math.pi * math.sin(math.radians(azimuth_deg)) * positions)


class PointTarget(BaseModel):
    """点目标：给出 RCS（dBsm）或直接给出幅度"""
    range_m: float = Field(..., gt=0, description="距离（m）")
    azimuth_deg: float = Field(0.0, description="方位角（度）")
    rcs_dbsm: Optional[float] = Field(None, description="RCS（dBsm）")
    amplitude: Optional[float] = Field(None, ge=0, description="直接指定的幅度")
    
    class Config:
        frozen = True
    
    @model_validator(mode="after")
    def _one_strength(self):
        if self.rcs_dbsm is None and self.amplitude is None:
            raise ValueError("必须提供 rcs_dbsm 或 amplitude")
        return self
    
    @property
    def signal_amplitude(self) -> float:
        """直接幅度，或 √σ / R²"""
        if self.amplitude is not None:
            return self.amplitude
        return math.sqrt(math.pow(10.0, self.rcs_dbsm / 10.0)) / self.range_m ** 2


class NoiseSpec(BaseModel):
    """接收噪声：每个采样的噪声功率（dB），None 表示无噪声"""
    level_db: Optional[float] = Field(None, description="噪声功率 10·log10(σ²)")
    seed: int = Field(0, ge=0, description="随机种子")


class RadarFrame(BaseModel):
    """一帧原始 ADC 数据"""
    config: ChirpConfig
    array: VirtualArray
    samples: np.ndarray = Field(..., description="[时隙, 接收通道, 采样点]")
    
    class Config:
        arbitrary_types_allowed = True
    
    @model_validator(mode="after")
    def _check_shape(self):
        cfg = self.config
        expected = (cfg.chirps_per_tx * cfg.tx_count, cfg.rx_count, cfg.samples_per_chirp)
        if self.samples.shape != expected:
            raise ValueError(f"帧形状应为 {expected}，实际 {self.samples.shape}")
        if (self.array.tx_count, self.array.rx_count) != (cfg.tx_count, cfg.rx_count):
            raise ValueError("虚拟阵列与调频配置的收发通道数不一致")
        return self


class RangeAzimuthMap(BaseModel):
    """距离–方位功率谱（线性功率，chirp 间幅度平均后平方）"""
    range_m: np.ndarray
    azimuth_deg: np.ndarray
    power: np.ndarray = Field(..., description="[距离单元, 方位单元]")
    
    class Config:
        arbitrary_types_allowed = True
    
    @model_validator(mode="after")
    def _check(self):
        if self.power.shape != (self.range_m.size, self.azimuth_deg.size):
            raise ValueError("功率谱形状与坐标轴不一致")
        if np.any(self.power < 0):
            raise ValueError("功率不能为负")
        if np.any(np.diff(self.range_m) <= 0) or np.any(np.diff(self.azimuth_deg) <= 0):
            raise ValueError("坐标轴必须单调递增")
        return self
    
    def scaled(self, gain_db: float) -> "RangeAzimuthMap":
        return RangeAzimuthMap(
            range_m=self.range_m, azimuth_deg=self.azimuth_deg, power=self.power * math.pow(10.0, gain_db / 10.0)
        )
    
    def same_axes(self, other: "RangeAzimuthMap") -> bool:
        return np.array_equal(self.range_m, other.range_m) and np.array_equal(self.azimuth_deg, other.azimuth_deg)


class PeakReport(BaseModel):
    range_m: float
    azimuth_deg: float
    range_bin: int
    azimuth_bin: int
    power_db: float
    noise_db: Optional[float] = None
    snr_db: Optional[float] = None


# ==================== 合成 ====================

def check_targets(config: ChirpConfig, targets: Sequence[PointTarget]) -> None:
    """目标必须在最大不模糊距离内且 |θ| < 90°，违规目标按序号列出"""
    max_range = derived_params(config).max_range_m
    offenders = [
        f"#{k}(R={t.range_m} m, θ={t.azimuth_deg}°)"
        for k, t in enumerate(targets)
        if t.range_m > max_range or not abs(t.azimuth_deg) < 90.0
    ]
    if offenders:
        raise DomainException(f"目标超出最大距离 {max_range:.2f} m 或方位范围: {', '.join(offenders)}")


def synthesize_frame(
    config: ChirpConfig,
    array: VirtualArray,
    targets: Sequence[PointTarget],
    noise: Optional[NoiseSpec] = None,
    disabled_tx: Sequence[int] = (),
) -> RadarFrame:
    """
    静止点目标的拍频信号
    
    每个目标贡献 a·exp(j(2π·f_b·t + 4π·f0·R/c + π·sinθ·position))，f_b = 2SR/c；
    实数采样取实部。场景静止，各重复 chirp 的信号相同，仅噪声不同
    
    Args:
        config: 调频配置
        array: 虚拟阵列
        targets: 点目标列表
        noise: 噪声设置，level_db 为 None 时无噪声
        disabled_tx: 置零的发射通道
    
    Raises:
        DomainException: 目标超出最大距离或 |θ| ≥ 90°
    """
    check_targets(config, targets)
    n = config.samples_per_chirp
    t = np.arange(n) / config.sample_rate_hz
    start_hz = config.start_frequency_ghz * 1e9
    
    block = np.zeros((array.tx_count * array.rx_count, n), dtype=np.complex128)
    for target in targets:
        beat_hz = 2.0 * config.slope_hz_per_s * target.range_m / SPEED_OF_LIGHT_M_S
        carrier = 4.0 * math.pi * start_hz * target.range_m / SPEED_OF_LIGHT_M_S
        tone = np.exp(1j * (2.0 * math.pi * beat_hz * t + carrier))
        block += target.signal_amplitude * np.outer(array.steering_vector(target.azimuth_deg), tone)
    block = block.reshape(array.tx_count, array.rx_count, n)
    for tx in disabled_tx:
        if not 0 <= tx < array.tx_count:
            raise DomainException(f"发射通道序号越界: {tx}")
        block[tx] = 0.0
    if not config.complex_adc:
        block = block.real
    
    frame = np.broadcast_to(block, (config.chirps_per_tx,) + block.shape).reshape(
        config.chirps_per_tx * array.tx_count, array.rx_count, n
    ).copy()
    
    if noise is not None and noise.level_db is not None:
        rng = np.random.default_rng(noise.seed)
        sigma = math.sqrt(math.pow(10.0, noise.level_db / 10.0))
        if config.complex_adc:
            frame = frame + (sigma / math.sqrt(2.0)) * (
                rng.standard_normal(frame.shape) + 1j * rng.standard_normal(frame.shape)
            )
        else:
            frame = frame + sigma * rng.standard_normal(frame.shape)
    
    logger.debug("合成帧 %s, 目标 %d 个", frame.shape, len(targets))
    return RadarFrame(config=config, array=array, samples=frame)


def demultiplex(frame: RadarFrame) -> np.ndarray:
    """时隙解复用为虚拟阵列数据 [重复, 虚拟阵元, 采样点]"""
    cfg = frame.config
    return frame.samples.reshape(cfg.chirps_per_tx, cfg.tx_count * cfg.rx_count, cfg.samples_per_chirp)


def virtual_snapshot(frame: RadarFrame, sample: int = 0, repeat: int = 0) -> np.ndarray:
    """某一采样时刻的虚拟阵列快拍"""
    return demultiplex(frame)[repeat, :, sample]


# ==================== 处理 ====================

def range_fft(chirps: np.ndarray, complex_adc: bool, workers: int = 1) -> np.ndarray:
    """快时间维 FFT（不加窗）；实数采样保留前 N/2 个单元"""
    if complex_adc:
        return scipy.fft.fft(chirps, axis=-1, workers=workers)
    return scipy.fft.rfft(chirps, axis=-1, workers=workers)[..., : chirps.shape[-1] // 2]


def azimuth_axis(angle_bins: int) -> np.ndarray:
    """fftshift 后角度单元对应的方位角 arcsin(2k/n)"""
    k = scipy.fft.fftshift(scipy.fft.fftfreq(angle_bins)) * angle_bins
    return np.degrees(np.arcsin(np.clip(2.0 * k / angle_bins, -1.0, 1.0)))


def process_frame(frame: RadarFrame, workers: int = 1) -> RangeAzimuthMap:
    """
    距离 FFT → TDM 解复用 → 虚拟阵元维 Hamming 窗 → 补零角度 FFT → chirp 间幅度平均，再平方为功率
    
    Args:
        frame: 原始帧
        workers: scipy.fft 并行线程数
    """
    cfg = frame.config
    array = frame.array
    if not np.all(np.isfinite(frame.samples)):
        raise DomainException("帧数据包含非有限值")
    if cfg.angle_bins < array.aperture:
        raise DomainException(f"角度 FFT 点数 {cfg.angle_bins} 小于阵列孔径 {array.aperture}")
    
    cube = range_fft(demultiplex(frame), cfg.complex_adc, workers)
    window = hamming(array.tx_count * array.rx_count)
    positions = np.asarray(array.positions)
    
    magnitude = np.zeros((cfg.range_bins, cfg.angle_bins))
    for first in range(0, cfg.chirps_per_tx, ANGLE_BLOCK):
        block = cube[first:first + ANGLE_BLOCK] * window[np.newaxis, :, np.newaxis]
        aperture = np.zeros((block.shape[0], array.aperture, block.shape[2]), dtype=np.complex128)
        aperture[:, positions, :] = block
        # e^{jπ sinθ·n} 在 k/n = sinθ/2 处出峰
        spectrum = scipy.fft.fftshift(scipy.fft.fft(aperture, n=cfg.angle_bins, axis=1, workers=workers), axes=1)
        magnitude += np.sum(np.abs(spectrum), axis=0).T
    power = (magnitude / cfg.chirps_per_tx) ** 2
    
    range_axis = np.arange(cfg.range_bins) * derived_params(cfg).range_bin_m
    return RangeAzimuthMap(range_m=range_axis, azimuth_deg=azimuth_axis(cfg.angle_bins), power=power)


def _power_db(value: float) -> float:
    if value <= 0.0:
        return POWER_FLOOR_DB
    return float(db_from_power(value))


def peak_and_snr(
    ra_map: RangeAzimuthMap,
    noise_floor_db: Optional[float] = None,
    noise_map: Optional[RangeAzimuthMap] = None,
) -> PeakReport:
    """
    全局最大单元及 SNR
    
    噪声取给定常数（dB），或无目标谱的平均功率；两者都未给出时不计算 SNR
    """
    if ra_map.power.size == 0:
        raise DomainException("功率谱为空")
    r_idx, a_idx = np.unravel_index(int(np.argmax(ra_map.power)), ra_map.power.shape)
    peak_db = _power_db(float(ra_map.power[r_idx, a_idx]))
    if noise_floor_db is None and noise_map is not None:
        noise_floor_db = _power_db(float(np.mean(noise_map.power)))
    return PeakReport(
        range_m=float(ra_map.range_m[r_idx]),
        azimuth_deg=float(ra_map.azimuth_deg[a_idx]),
        range_bin=int(r_idx),
        azimuth_bin=int(a_idx),
        power_db=peak_db,
        noise_db=noise_floor_db,
        snr_db=None if noise_floor_db is None else peak_db - noise_floor_db,
    )


def _window_peak_db(ra_map: RangeAzimuthMap, window_m: Tuple[float, float]) -> float:
    lo, hi = window_m
    selected = (ra_map.range_m >= lo) & (ra_map.range_m <= hi)
    if hi < lo or not np.any(selected):
        raise DomainException(f"距离窗口 [{lo}, {hi}] m 与距离轴不相交")
    return _power_db(float(np.max(ra_map.power[selected])))


def marker_delta(map_with: RangeAzimuthMap, map_without: RangeAzimuthMap, window_m: Tuple[float, float]) -> float:
    """同一距离窗口内，有标签谱峰值减无标签谱峰值（dB）"""
    if not map_with.same_axes(map_without):
        raise DomainException("两幅谱的坐标轴不一致")
    return _window_peak_db(map_with, window_m) - _window_peak_db(map_without, window_m)


class ImagingRow(BaseModel):
    azimuth_deg: float
    marker_delta_db: float
    range_factor: float


def imaging_study(
    config: ChirpConfig,
    array: VirtualArray,
    bike: PointTarget,
    marker: PointTarget,
    azimuths_deg: Sequence[float],
    window_m: Tuple[float, float],
    noise: Optional[NoiseSpec] = None,
    workers: int = 1,
) -> List[ImagingRow]:
    """
    逐方位比较“自行车 + 标签”与“仅自行车”场景，给出功率提升与距离扩展倍数
    
    两个场景使用相同噪声种子
    """
    rows = []
    for azimuth in azimuths_deg:
        bike_here = bike.model_copy(update={"azimuth_deg": azimuth})
        marker_here = marker.model_copy(update={"azimuth_deg": azimuth})
        with_map = process_frame(synthesize_frame(config, array, [bike_here, marker_here], noise), workers)
        without_map = process_frame(synthesize_frame(config, array, [bike_here], noise), workers)
        delta = marker_delta(with_map, without_map, window_m)
        rows.append(ImagingRow(azimuth_deg=float(azimuth), marker_delta_db=delta, range_factor=range_factor(delta)))
        logger.info("方位 %.1f°: 提升 %.2f dB, 距离倍数 %.2f", azimuth, delta, range_factor(delta))
    return rows
