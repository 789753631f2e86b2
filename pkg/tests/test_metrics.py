import numpy as np
import pytest

from pabeam.errors import DataError, UsageError
from pabeam.beamcore import BeamformedImage
from pabeam.geometry import ImageGrid
from pabeam.metrics import (HALF_AMPLITUDE_DB, LateralProfile, Roi, fwhm,
                            lateral_profile, sidelobe_level, snr)


def grid(nx=20, nz=20, dx=1e-3, dz=1e-3):
    return ImageGrid(x_min=0.0, x_max=(nx - 1) * dx, z_min=1e-3,
                     z_max=1e-3 + nz * dz, nx=nx, nz=nz, dx=dx, dz=dz)


def envelope_image(values):
    values = np.asarray(values, dtype=np.float64)
    g = grid(nx=values.shape[1], nz=values.shape[0])
    return BeamformedImage(grid=g, values=values, stage="envelope")


def log_image(values):
    values = np.asarray(values, dtype=np.float64)
    g = grid(nx=values.shape[1], nz=values.shape[0])
    return BeamformedImage(grid=g, values=values, stage="log_compressed")


def db_profile(x, values):
    return LateralProfile(depth=10e-3, x=np.asarray(x, float),
                          value_db=np.asarray(values, float))


class TestRoi:
    def test_validation(self):
        with pytest.raises(UsageError):
            Roi(1e-3, 1e-3, 0.0, 1e-3)
        assert Roi(0, 1e-3, 0, 1e-3).overlaps(Roi(0.5e-3, 2e-3, 0.5e-3, 2e-3))
        assert not Roi(0, 1e-3, 0, 1e-3).overlaps(Roi(2e-3, 3e-3, 0, 1e-3))


class TestSnr:
    def _image(self, noise_half=0.01):
        vals = np.full((20, 20), 5.0)
        vals[2:6, 2:6] = np.linspace(5.0, 6.0, 16).reshape(4, 4)  # range 1.0
        vals[2:6, 12:16] = 5.0 + noise_half * np.tile([1.0, -1.0], 8).reshape(4, 4)
        return envelope_image(vals)

    def test_40db_micro(self):
        image = self._image()
        target = Roi(1.5e-3, 5.5e-3, 2.5e-3, 6.5e-3)
        noise = Roi(11.5e-3, 15.5e-3, 2.5e-3, 6.5e-3)
        assert snr(image, target, noise) == pytest.approx(40.0, abs=1e-9)

    def test_0db_when_range_equals_std(self):
        image = self._image(noise_half=1.0)
        target = Roi(1.5e-3, 5.5e-3, 2.5e-3, 6.5e-3)
        noise = Roi(11.5e-3, 15.5e-3, 2.5e-3, 6.5e-3)
        assert snr(image, target, noise) == pytest.approx(0.0, abs=1e-9)

    def test_scale_invariant(self):
        image = self._image()
        target = Roi(1.5e-3, 5.5e-3, 2.5e-3, 6.5e-3)
        noise = Roi(11.5e-3, 15.5e-3, 2.5e-3, 6.5e-3)
        scaled = BeamformedImage(grid=image.grid, values=3.3 * image.values,
                                 stage="envelope")
        assert snr(scaled, target, noise) == pytest.approx(
            snr(image, target, noise), abs=1e-9)

    def test_constant_noise_region_rejected(self):
        vals = np.full((20, 20), 5.0)
        vals[2:6, 2:6] = 6.0
        image = envelope_image(vals)
        with pytest.raises(DataError):
            snr(image, Roi(1.5e-3, 5.5e-3, 2.5e-3, 6.5e-3),
                Roi(11.5e-3, 15.5e-3, 2.5e-3, 6.5e-3))

    def test_overlapping_rois_rejected(self):
        image = self._image()
        with pytest.raises(UsageError):
            snr(image, Roi(0, 5e-3, 0, 5e-3), Roi(4e-3, 9e-3, 4e-3, 9e-3))

    def test_requires_envelope_stage(self):
        img = log_image(np.zeros((20, 20)))
        with pytest.raises(UsageError):
            snr(img, Roi(0, 5e-3, 2e-3, 5e-3), Roi(10e-3, 15e-3, 2e-3, 5e-3))

    def test_roi_outside_grid_rejected(self):
        image = self._image()
        with pytest.raises(UsageError):
            snr(image, Roi(1.0, 1.1, 0.0, 1e-3), Roi(11.5e-3, 15.5e-3, 2.5e-3, 6.5e-3))


class TestLateralProfile:
    def test_exact_row(self):
        vals = np.arange(400, dtype=float).reshape(20, 20) - 400
        image = log_image(vals)
        depth = image.grid.z[7]
        prof = lateral_profile(image, depth)
        assert prof.depth == depth
        assert np.array_equal(prof.value_db, vals[7])
        assert np.array_equal(prof.x, image.grid.x)

    def test_nearest_row(self):
        image = log_image(np.zeros((20, 20)))
        depth = image.grid.z[7] + 0.3 * image.grid.dz
        assert lateral_profile(image, depth).depth == image.grid.z[7]

    def test_constant_image_flat_profile(self):
        image = log_image(np.full((10, 10), -13.0))
        prof = lateral_profile(image, 5e-3)
        assert np.all(prof.value_db == -13.0)

    def test_depth_outside_grid(self):
        image = log_image(np.zeros((10, 10)))
        with pytest.raises(UsageError):
            lateral_profile(image, 1.0)

    def test_requires_log_stage(self):
        image = envelope_image(np.ones((10, 10)))
        with pytest.raises(UsageError):
            lateral_profile(image, 5e-3)


class TestFwhm:
    def test_triangular_peak_closed_form(self):
        x = np.linspace(-5e-3, 5e-3, 201)
        slope_db_per_m = 4000.0
        prof = db_profile(x, -slope_db_per_m * np.abs(x))
        expected = 2 * HALF_AMPLITUDE_DB / slope_db_per_m
        assert fwhm(prof, 0.0) == pytest.approx(expected, rel=1e-9)

    def test_gaussian_sigma_relation(self):
        sigma = 1e-3
        x = np.arange(-6e-3, 6e-3, 2e-5)
        amp = np.exp(-x ** 2 / (2 * sigma ** 2))
        prof = db_profile(x, 20 * np.log10(amp))
        assert abs(fwhm(prof, 0.0) - 2.3548 * sigma) <= 2e-5

    def test_peak_found_near_hint(self):
        x = np.linspace(-5e-3, 5e-3, 201)
        v = -3000.0 * np.abs(x - 1e-3)
        assert fwhm(db_profile(x, v), 0.4e-3) == pytest.approx(
            2 * HALF_AMPLITUDE_DB / 3000.0, rel=1e-9)

    def test_shift_invariant(self):
        x = np.linspace(-5e-3, 5e-3, 201)
        v = -4000.0 * np.abs(x)
        assert fwhm(db_profile(x, v - 17.0), 0.0) == pytest.approx(
            fwhm(db_profile(x, v), 0.0), abs=1e-12)

    def test_missing_crossing_rejected(self):
        x = np.linspace(-1e-4, 1e-4, 11)
        prof = db_profile(x, -1.0 * np.abs(x) / 1e-4)  # falls only 1 dB
        with pytest.raises(DataError):
            fwhm(prof, 0.0)

    def test_sharpening_reduces_width(self):
        x = np.arange(-6e-3, 6e-3, 2e-5)
        amp = np.exp(-x ** 2 / (2 * 1e-6)) + 0.3 * np.exp(-x ** 2 / (2 * 9e-6))
        amp /= amp.max()
        base = db_profile(x, 20 * np.log10(amp))
        sharpened = db_profile(x, 2 * 20 * np.log10(amp))  # amplitude squared
        assert fwhm(sharpened, 0.0) <= fwhm(base, 0.0)


class TestSidelobe:
    def test_secondary_peak_level(self):
        x = np.linspace(-10e-3, 10e-3, 401)
        # main lobe falls to a -80 dB floor inside the exclusion zone
        v = np.where(np.abs(x) <= 1.6e-3, -8000.0 * np.abs(x), -80.0)
        v = np.maximum(v, -25.0 - 9000.0 * np.abs(x - 6e-3))  # lobe at +6 mm
        prof = db_profile(x, v)
        assert sidelobe_level(prof, 0.0) == pytest.approx(-25.0, abs=1e-9)

    def test_monotone_profile_reads_first_excluded_sample(self):
        x = np.linspace(-10e-3, 10e-3, 401)
        slope = 3000.0
        prof = db_profile(x, -slope * np.abs(x))
        width = 2 * HALF_AMPLITUDE_DB / slope
        outside = np.abs(x) > 2 * width
        expected = (-slope * np.abs(x))[outside].max()
        assert sidelobe_level(prof, 0.0) == pytest.approx(expected, abs=1e-12)

    def test_shift_invariant(self):
        x = np.linspace(-10e-3, 10e-3, 401)
        v = np.maximum(-8000.0 * np.abs(x), -70.0)
        a = sidelobe_level(db_profile(x, v), 0.0)
        b = sidelobe_level(db_profile(x, v + 11.0), 0.0)
        assert a == pytest.approx(b, abs=1e-12)

    def test_exclusion_covering_profile_rejected(self):
        x = np.linspace(-1e-3, 1e-3, 101)
        v = -10000.0 * np.abs(x)
        prof = db_profile(x, v)
        # fwhm ~ 1.2 mm -> exclusion covers the +/-1 mm span entirely
        with pytest.raises(DataError):
            sidelobe_level(prof, 0.0)
