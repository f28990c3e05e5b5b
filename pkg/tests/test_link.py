import math

import pytest
from pydantic import ValidationError

from app.core.exceptions import DomainException
from app.engine import link
from app.engine.link import SnrSample

WAVELENGTH_M = 299792458.0 / 78.5e9
ANCHOR = SnrSample(range_m=71.41, snr_db=10.73)


def test_sphere_rcs():
    assert link.sphere_rcs(2.175) == pytest.approx(-26.20, abs=0.05)
    assert link.sphere_rcs(2.0 / math.sqrt(math.pi), unit="m") == pytest.approx(0.0, abs=1e-12)
    assert link.sphere_rcs(55.245, unit="mm") == pytest.approx(link.sphere_rcs(2.175), abs=1e-9)


@pytest.mark.parametrize("diameter, unit", [(0.0, "in"), (-1.0, "mm"), (1.0, "ft")])
def test_sphere_rcs_rejects_bad_input(diameter, unit):
    with pytest.raises(DomainException):
        link.sphere_rcs(diameter, unit=unit)


def test_calibration_bookkeeping():
    factor = link.calibrate(-60.0, -26.19, 5.0)
    assert factor.factor_db == pytest.approx(33.81)
    assert link.apply_calibration(factor, -40.0) == pytest.approx(-6.19)
    assert link.apply_calibration(factor, -60.0, range_m=5.0) == pytest.approx(-26.19)


def test_calibration_at_other_range_requires_correction():
    factor = link.calibrate(-60.0, -26.19, 5.0)
    with pytest.raises(DomainException):
        link.apply_calibration(factor, -40.0, range_m=10.0)
    corrected = link.apply_calibration(factor, -40.0, range_m=10.0, correct_range=True)
    assert corrected == pytest.approx(-6.19 + 40.0 * math.log10(2.0))


def test_calibration_requires_positive_range():
    with pytest.raises(DomainException):
        link.calibrate(-60.0, -26.19, 0.0)


def test_gain_from_rcs():
    assert link.gain_from_rcs(3.54, WAVELENGTH_M) == pytest.approx(31.44, abs=0.02)
    assert link.gain_from_rcs(-13.06, WAVELENGTH_M) == pytest.approx(23.14, abs=0.02)
    for gain in (0.0, 12.5, 31.44):
        assert link.gain_from_rcs(link.rcs_from_gain(gain, WAVELENGTH_M), WAVELENGTH_M) == pytest.approx(gain, abs=1e-12)
    with pytest.raises(DomainException):
        link.gain_from_rcs(3.54, 0.0)


def test_realized_gain():
    assert link.realized_gain(-50.0, -58.58) == pytest.approx(13.58)
    assert link.realized_gain(-58.58, -58.58) == pytest.approx(5.0)
    assert link.gain_delta_from_rcs_delta(16.60) + 23.14 == pytest.approx(31.44)


def test_focal_gain_scan_picks_best_distance():
    scan = link.focal_gain_scan([16.0, 18.0, 20.0, 22.0], [-55.0, -51.0, -50.0, -53.0], -58.58)
    assert scan.best_distance_mm == 20.0
    assert scan.best_gain_dbi == pytest.approx(13.58)
    with pytest.raises(DomainException):
        link.focal_gain_scan([16.0], [], -58.58)


def test_snr_at_range():
    assert link.snr_at_range(ANCHOR, 71.41) == pytest.approx(10.73)
    assert link.snr_at_range(ANCHOR, 35.705) == pytest.approx(22.77, abs=0.02)
    assert link.snr_at_range(ANCHOR, 40.0) - link.snr_at_range(ANCHOR, 80.0) == pytest.approx(12.0412, abs=1e-4)
    with pytest.raises(DomainException):
        link.snr_at_range(ANCHOR, 0.0)


def test_snr_sample_validation():
    with pytest.raises(ValidationError):
        SnrSample(range_m=0.0, snr_db=10.0)
    with pytest.raises(ValidationError):
        SnrSample(range_m=10.0, snr_db=float("nan"))


def test_detection_range():
    result = link.detection_range(ANCHOR, 10.0)
    assert result.range_m == pytest.approx(74.4, abs=0.1)
    assert not result.extrapolated
    assert link.detection_range(SnrSample(range_m=50.0, snr_db=10.0), 10.0).range_m == pytest.approx(50.0)


def test_detection_range_beyond_limit_is_flagged():
    result = link.detection_range(SnrSample(range_m=10.0, snr_db=40.0), 0.0)
    assert result.range_m == pytest.approx(100.0)
    assert result.extrapolated


def test_detection_range_monotonicity():
    ranges = [link.detection_range(ANCHOR, t).range_m for t in (6.0, 8.0, 10.0, 12.0)]
    assert ranges == sorted(ranges, reverse=True)
    weak = link.detection_range(SnrSample(range_m=71.41, snr_db=9.0), 10.0).range_m
    assert weak < ranges[2]


@pytest.mark.parametrize("delta, expected", [(20.44, 3.24), (14.06, 2.25), (9.03, 1.68), (6.02, 1.41)])
def test_range_factor(delta, expected):
    assert link.range_factor(delta) == pytest.approx(expected, abs=0.01)


def test_range_factor_is_multiplicative():
    assert link.range_factor(0.0) == 1.0
    assert link.range_factor(9.0 + 11.44) == pytest.approx(link.range_factor(9.0) * link.range_factor(11.44))


def test_snr_curve_follows_fourth_power_law():
    curve = link.snr_curve(ANCHOR, [10.0, 20.0, 40.0, 71.41, 100.0])
    assert link.fit_range_slope(curve) == pytest.approx(-40.0, abs=1e-9)
    with pytest.raises(DomainException):
        link.fit_range_slope(curve[:1])


def test_link_report():
    rows = link.link_report(
        ANCHOR,
        threshold_db=10.0,
        wavelength_m=WAVELENGTH_M,
        tag_rcs_dbsm=3.54,
        reference_rcs_dbsm=-13.06,
        marker_delta_db=20.44,
    )
    report = link.report_dict(rows)
    assert report["detection_range"] == pytest.approx(74.4, abs=0.1)
    assert report["tag_gain"] == pytest.approx(31.44, abs=0.02)
    assert report["reference_gain"] == pytest.approx(23.14, abs=0.02)
    assert report["gain_delta"] == pytest.approx(8.30)
    assert report["range_factor"] == pytest.approx(3.24, abs=0.01)
    assert report["extended_detection_range"] == pytest.approx(report["detection_range"] * report["range_factor"])
    assert {row.unit for row in rows} >= {"m", "dB", "dBi", "dBsm"}
