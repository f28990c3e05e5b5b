import math

import numpy as np
import pytest
from pydantic import ValidationError

from app.core.exceptions import DataFormatException, DomainException, NumericalException
from app.core.grid import FieldGrid, uniform_grid
from app.core.units import (
    Carrier,
    amplitude_from_db,
    db_from_amplitude,
    db_from_power,
    frequency_of,
    from_dbsm,
    mm_from_inch,
    power_from_db,
    from_dbi,
    to_dbi,
    to_dbsm,
    wavelength_of,
)


def test_wavelength_at_design_frequency():
    assert wavelength_of(78.5) == pytest.approx(3.8190, abs=1e-4)
    assert frequency_of(wavelength_of(78.5)) == pytest.approx(78.5, rel=1e-12)


@pytest.mark.parametrize("frequency", [0.0, -1.0, float("nan")])
def test_wavelength_rejects_non_physical_frequency(frequency):
    with pytest.raises(DomainException):
        wavelength_of(frequency)


def test_carrier_derives_wavelength():
    carrier = Carrier(frequency_ghz=78.5)
    assert carrier.wavelength_mm == pytest.approx(3.8190, abs=1e-4)
    assert carrier.wavelength_m == pytest.approx(3.8190e-3, abs=1e-7)
    assert carrier.wavenumber_per_mm == pytest.approx(2 * math.pi / carrier.wavelength_mm)


def test_decibel_helpers():
    assert db_from_power(100.0) == pytest.approx(20.0)
    assert power_from_db(db_from_power(3.7)) == pytest.approx(3.7)
    assert db_from_amplitude(10.0) == pytest.approx(20.0)
    assert amplitude_from_db(-6.0) == pytest.approx(0.501187, rel=1e-5)
    assert to_dbsm(1.0) == 0.0
    assert from_dbsm(to_dbsm(0.25)) == pytest.approx(0.25)
    assert mm_from_inch(1.0) == pytest.approx(25.4)
    assert to_dbi(2.0) == pytest.approx(3.0103, abs=1e-4)
    assert from_dbi(to_dbi(7.5)) == pytest.approx(7.5)


def test_field_grid_is_immutable_complex():
    grid = FieldGrid(samples=[[1, 2], [3, 4]], pitch_mm=0.5, wavelength_mm=3.0)
    assert grid.samples.dtype == np.complex128
    with pytest.raises(ValueError):
        grid.samples[0, 0] = 5


def test_field_grid_rejects_bad_shape():
    with pytest.raises(ValidationError):
        FieldGrid(samples=np.ones(4), pitch_mm=0.5, wavelength_mm=3.0)


def test_axes_are_centered():
    grid = uniform_grid(10.0, 4, 3.0)
    np.testing.assert_allclose(grid.axis_x(), [-3.75, -1.25, 1.25, 3.75])
    assert grid.extent_mm == pytest.approx((10.0, 10.0))
    x, y = grid.coordinates()
    assert x.shape == y.shape == (4, 4)
    np.testing.assert_allclose(x[0], grid.axis_x())
    np.testing.assert_allclose(y[:, 0], grid.axis_y())


def test_center_intensity_even_grid_averages_symmetric_samples():
    samples = np.zeros((4, 4))
    samples[1:3, 1:3] = [[1.0, 2.0], [3.0, 4.0]]
    grid = FieldGrid(samples=samples, pitch_mm=0.5, wavelength_mm=3.0)
    assert grid.center_intensity() == pytest.approx((1 + 4 + 9 + 16) / 4)


def test_total_power_and_nyquist():
    grid = uniform_grid(53.0, 124, 3.819)
    assert grid.total_power() == pytest.approx(53.0 ** 2)
    assert grid.nyquist_ok
    coarse = uniform_grid(53.0, 10, 3.819)
    assert not coarse.nyquist_ok
    with pytest.raises(DomainException):
        coarse.require_nyquist()


def test_exception_exit_codes():
    assert DomainException().exit_code == 1
    assert NumericalException().exit_code == 2
    error = DataFormatException("bad value", path="lib.csv", line=7)
    assert "lib.csv:7" in error.detail
    assert isinstance(DomainException("x"), ValueError)
