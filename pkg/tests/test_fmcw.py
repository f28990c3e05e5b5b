import math

import numpy as np
import pytest
from pydantic import ValidationError

from app.core.exceptions import DomainException
from app.engine import fmcw
from app.engine.fmcw import ChirpConfig, NoiseSpec, PointTarget, RangeAzimuthMap, VirtualArray


def bin_centered(config, k):
    return k * fmcw.derived_params(config).range_bin_m


def test_derived_parameters():
    derived = fmcw.derived_params(ChirpConfig())
    assert derived.bandwidth_ghz == pytest.approx(4.19, abs=0.01)
    assert derived.range_resolution_m == pytest.approx(0.0358, abs=0.0001)
    assert derived.max_range_m == pytest.approx(73.3, abs=0.5)
    assert derived.range_bin_m == pytest.approx(derived.range_resolution_m, rel=1e-12)
    assert derived.sampling_window_us == pytest.approx(409.6)


def test_complex_adc_doubles_unambiguous_range():
    real = fmcw.derived_params(ChirpConfig())
    cplx = fmcw.derived_params(ChirpConfig(complex_adc=True))
    assert cplx.max_range_m == pytest.approx(2 * real.max_range_m)
    assert ChirpConfig(complex_adc=True).range_bins == 4096
    assert ChirpConfig().range_bins == 2048


def test_sampling_window_must_fit_chirp():
    with pytest.raises(ValidationError):
        ChirpConfig(samples_per_chirp=8192)


def test_sampled_band_must_fit():
    with pytest.raises(ValidationError):
        ChirpConfig(slope_mhz_per_us=20.0)


def test_virtual_array_layout():
    array = VirtualArray.uniform(4, 4)
    assert array.positions == tuple(range(16))
    assert array.virtual_index(2, 3) == 11
    assert array.aperture == 16
    sparse = VirtualArray(tx_count=2, rx_count=2, positions=(0, 1, 4, 5))
    assert sparse.aperture == 6
    with pytest.raises(ValidationError):
        VirtualArray(tx_count=2, rx_count=2, positions=(0, 1, 2))
    with pytest.raises(ValidationError):
        VirtualArray(tx_count=1, rx_count=2, positions=(1, 1))


def test_point_target_amplitude():
    assert PointTarget(range_m=10.0, rcs_dbsm=0.0).signal_amplitude == pytest.approx(0.01)
    assert PointTarget(range_m=10.0, amplitude=2.5).signal_amplitude == 2.5
    with pytest.raises(ValidationError):
        PointTarget(range_m=10.0)


def test_empty_scene_gives_zero_map(small_chirp, ula):
    frame = fmcw.synthesize_frame(small_chirp, ula, [])
    assert not np.any(frame.samples)
    ra_map = fmcw.process_frame(frame)
    assert not np.any(ra_map.power)
    assert fmcw.peak_and_snr(ra_map).power_db == fmcw.POWER_FLOOR_DB


def test_target_beyond_max_range_is_named(small_chirp, ula):
    with pytest.raises(DomainException) as info:
        fmcw.synthesize_frame(small_chirp, ula, [PointTarget(range_m=5.0, amplitude=1.0), PointTarget(range_m=100.0, amplitude=1.0)])
    assert "#1" in info.value.detail
    assert "#0" not in info.value.detail


def test_frame_shape_and_tdm_layout(small_chirp, ula):
    frame = fmcw.synthesize_frame(small_chirp, ula, [PointTarget(range_m=20.0, amplitude=1.0)])
    assert frame.samples.shape == (8, 4, 4096)
    assert fmcw.demultiplex(frame).shape == (2, 16, 4096)
    with pytest.raises(ValidationError):
        fmcw.RadarFrame(config=small_chirp, array=ula, samples=np.zeros((4, 4, 4096)))


def test_beat_frequency_from_zero_crossings(small_chirp, ula):
    frame = fmcw.synthesize_frame(small_chirp, ula, [PointTarget(range_m=50.0, amplitude=1.0)])
    signal = frame.samples[0, 0]
    crossings = np.count_nonzero(np.diff(np.signbit(signal)))
    duration = (small_chirp.samples_per_chirp - 1) / small_chirp.sample_rate_hz
    measured = crossings / (2.0 * duration)
    expected = 2.0 * small_chirp.slope_hz_per_s * 50.0 / 299792458.0
    assert measured == pytest.approx(expected, rel=1e-3)


def test_snapshot_has_constant_element_ratio(ula):
    config = ChirpConfig(chirps_per_tx=1, complex_adc=True)
    frame = fmcw.synthesize_frame(config, ula, [PointTarget(range_m=12.0, azimuth_deg=25.0, amplitude=1.0)])
    snapshot = fmcw.virtual_snapshot(frame, sample=17)
    ratios = snapshot[1:] / snapshot[:-1]
    np.testing.assert_allclose(ratios, np.exp(1j * math.pi * math.sin(math.radians(25.0))), rtol=1e-9)


def test_disabled_transmitter_zeroes_its_virtual_elements(small_chirp, ula):
    target = [PointTarget(range_m=20.0, azimuth_deg=10.0, amplitude=1.0)]
    full = fmcw.demultiplex(fmcw.synthesize_frame(small_chirp, ula, target))
    partial = fmcw.demultiplex(fmcw.synthesize_frame(small_chirp, ula, target, disabled_tx=[0]))
    assert not np.any(partial[:, 0:4])
    np.testing.assert_array_equal(partial[:, 4:], full[:, 4:])
    with pytest.raises(DomainException):
        fmcw.synthesize_frame(small_chirp, ula, target, disabled_tx=[4])


def test_synthesis_is_linear_in_targets(small_chirp, ula):
    a = PointTarget(range_m=15.0, azimuth_deg=-20.0, amplitude=0.7)
    b = PointTarget(range_m=33.3, azimuth_deg=12.0, amplitude=1.3)
    both = fmcw.synthesize_frame(small_chirp, ula, [a, b]).samples
    separate = fmcw.synthesize_frame(small_chirp, ula, [a]).samples + fmcw.synthesize_frame(small_chirp, ula, [b]).samples
    np.testing.assert_allclose(both, separate, atol=1e-12)


def test_power_scales_with_amplitude_squared(small_chirp, ula):
    one = fmcw.process_frame(fmcw.synthesize_frame(small_chirp, ula, [PointTarget(range_m=20.0, amplitude=1.0)]))
    two = fmcw.process_frame(fmcw.synthesize_frame(small_chirp, ula, [PointTarget(range_m=20.0, amplitude=2.0)]))
    np.testing.assert_allclose(two.power, one.scaled(10 * math.log10(4.0)).power, rtol=1e-9, atol=1e-9)


def test_range_fft_preserves_energy():
    rng = np.random.default_rng(5)
    chirps = rng.standard_normal((3, 256)) + 1j * rng.standard_normal((3, 256))
    spectrum = fmcw.range_fft(chirps, complex_adc=True)
    assert np.sum(np.abs(spectrum) ** 2) == pytest.approx(256 * np.sum(np.abs(chirps) ** 2), rel=1e-12)


def test_azimuth_axis():
    axis = fmcw.azimuth_axis(181)
    assert len(axis) == 181
    assert axis[90] == 0.0
    assert np.all(np.diff(axis) > 0)
    np.testing.assert_allclose(axis, -axis[::-1], atol=1e-12)


def test_round_trip_single_target(small_chirp, ula):
    frame = fmcw.synthesize_frame(small_chirp, ula, [PointTarget(range_m=20.0, azimuth_deg=10.0, amplitude=1.0)])
    peak = fmcw.peak_and_snr(fmcw.process_frame(frame))
    assert peak.range_m == pytest.approx(20.0, abs=fmcw.derived_params(small_chirp).range_bin_m)
    assert peak.azimuth_deg == pytest.approx(10.0, abs=0.7)


def test_range_bin_accuracy(small_chirp, ula):
    rng = np.random.default_rng(11)
    for k in rng.integers(10, 2000, size=20):
        target = PointTarget(range_m=bin_centered(small_chirp, int(k)), amplitude=1.0)
        peak = fmcw.peak_and_snr(fmcw.process_frame(fmcw.synthesize_frame(small_chirp, ula, [target])))
        assert peak.range_bin == k


@pytest.mark.parametrize("azimuth", [-40.0, -30.0, -20.0, -10.0, 0.0, 10.0, 20.0, 30.0, 40.0])
def test_azimuth_accuracy(small_chirp, ula, azimuth):
    target = PointTarget(range_m=bin_centered(small_chirp, 300), azimuth_deg=azimuth, amplitude=1.0)
    peak = fmcw.peak_and_snr(fmcw.process_frame(fmcw.synthesize_frame(small_chirp, ula, [target])))
    assert abs(math.sin(math.radians(peak.azimuth_deg)) - math.sin(math.radians(azimuth))) <= 1.0 / 181 + 1e-12


def test_complex_adc_round_trip(ula):
    config = ChirpConfig(chirps_per_tx=2, complex_adc=True)
    target = PointTarget(range_m=bin_centered(config, 2500), azimuth_deg=-15.0, amplitude=1.0)
    peak = fmcw.peak_and_snr(fmcw.process_frame(fmcw.synthesize_frame(config, ula, [target])))
    assert peak.range_bin == 2500


def test_angle_bins_must_cover_aperture(ula):
    config = ChirpConfig(chirps_per_tx=1, angle_bins=8)
    with pytest.raises(DomainException):
        fmcw.process_frame(fmcw.synthesize_frame(config, ula, []))


def test_noise_is_reproducible(small_chirp, ula):
    target = [PointTarget(range_m=20.0, amplitude=1.0)]
    first = fmcw.synthesize_frame(small_chirp, ula, target, NoiseSpec(level_db=0.0, seed=7)).samples
    again = fmcw.synthesize_frame(small_chirp, ula, target, NoiseSpec(level_db=0.0, seed=7)).samples
    other = fmcw.synthesize_frame(small_chirp, ula, target, NoiseSpec(level_db=0.0, seed=8)).samples
    np.testing.assert_array_equal(first, again)
    assert not np.array_equal(first, other)
    # 余弦信号功率 0.5 + 噪声功率 1
    assert np.mean(first ** 2) == pytest.approx(1.5, rel=0.05)


def test_snr_against_constant_floor():
    ra_map = RangeAzimuthMap(range_m=np.array([1.0, 2.0]), azimuth_deg=np.array([-1.0, 1.0]), power=np.array([[1.0, 100.0], [2.0, 3.0]]))
    peak = fmcw.peak_and_snr(ra_map, noise_floor_db=0.0)
    assert (peak.range_bin, peak.azimuth_bin) == (0, 1)
    assert peak.snr_db == pytest.approx(20.0)
    assert fmcw.peak_and_snr(ra_map.scaled(6.0), noise_floor_db=6.0).snr_db == pytest.approx(20.0)


def test_range_azimuth_map_validation():
    with pytest.raises(ValidationError):
        RangeAzimuthMap(range_m=np.array([1.0]), azimuth_deg=np.array([0.0]), power=np.array([[-1.0]]))
    with pytest.raises(ValidationError):
        RangeAzimuthMap(range_m=np.array([1.0, 2.0]), azimuth_deg=np.array([0.0]), power=np.ones((1, 1)))


def test_chirps_are_magnitude_averaged(small_chirp, ula):
    frame = fmcw.synthesize_frame(small_chirp, ula, [PointTarget(range_m=20.0, amplitude=1.0)], NoiseSpec(level_db=10.0, seed=3))
    cube = fmcw.range_fft(fmcw.demultiplex(frame), complex_adc=False) * np.hamming(16)[np.newaxis, :, np.newaxis]
    spectrum = np.fft.fftshift(np.fft.fft(cube, n=small_chirp.angle_bins, axis=1), axes=1)
    expected = np.mean(np.abs(spectrum), axis=0).T ** 2
    np.testing.assert_allclose(fmcw.process_frame(frame).power, expected, rtol=1e-9)
    power_mean = np.mean(np.abs(spectrum) ** 2, axis=0).T
    assert np.mean(expected) < np.mean(power_mean)


def test_detection_limit_scenario(ula):
    """71.4 m、幅度 1 的目标配合按构造设定的噪声，SNR 约 10.73 dB"""
    config = ChirpConfig()
    target = PointTarget(range_m=bin_centered(config, 1997), amplitude=1.0)
    window = np.hamming(16)
    # 幅度平均：噪声单元 (E|X|)² = π/4·σ²，信号单元 (E|X|)² ≈ ν²(1 + σ²/(4ν²))²
    goal = 10 ** 1.073 * math.pi / 4
    ratio = ((goal - 0.5) + math.sqrt((goal - 0.5) ** 2 - 0.25)) / 2
    noise_power = config.samples_per_chirp / 4.0 * window.sum() ** 2 / np.sum(window ** 2) / ratio
    level_db = 10 * math.log10(noise_power)
    assert level_db == pytest.approx(31.163, abs=0.01)
    tag_map = fmcw.process_frame(fmcw.synthesize_frame(config, ula, [target], NoiseSpec(level_db=level_db, seed=1)))
    sky_map = fmcw.process_frame(fmcw.synthesize_frame(config, ula, [], NoiseSpec(level_db=level_db, seed=2)))
    peak = fmcw.peak_and_snr(tag_map, noise_map=sky_map)
    assert peak.range_m == pytest.approx(71.41, abs=0.05)
    assert peak.snr_db == pytest.approx(10.73, abs=0.5)


def test_marker_delta(small_chirp, ula):
    bike = PointTarget(range_m=20.0, rcs_dbsm=-20.0)
    marker = PointTarget(range_m=20.0, rcs_dbsm=0.44)
    bike_map = fmcw.process_frame(fmcw.synthesize_frame(small_chirp, ula, [bike]))
    marker_map = fmcw.process_frame(fmcw.synthesize_frame(small_chirp, ula, [marker]))
    assert fmcw.marker_delta(marker_map, bike_map, (19.0, 21.0)) == pytest.approx(20.44, abs=1e-6)
    assert fmcw.marker_delta(bike_map, bike_map, (19.0, 21.0)) == 0.0
    assert fmcw.marker_delta(bike_map.scaled(3.0), bike_map, (19.0, 21.0)) == pytest.approx(3.0)
    with pytest.raises(DomainException):
        fmcw.marker_delta(marker_map, bike_map, (200.0, 300.0))


def test_imaging_study_rows(small_chirp, ula):
    bike = PointTarget(range_m=20.0, rcs_dbsm=-20.0)
    marker = PointTarget(range_m=20.0, rcs_dbsm=0.44)
    rows = fmcw.imaging_study(small_chirp, ula, bike, marker, [0.0, 20.0], (19.0, 21.0))
    assert [row.azimuth_deg for row in rows] == [0.0, 20.0]
    coherent = 20 * math.log10(1 + 10 ** (20.44 / 20))
    for row in rows:
        assert row.marker_delta_db == pytest.approx(coherent, abs=1e-6)
        assert row.range_factor == pytest.approx(10 ** (row.marker_delta_db / 40))
