import numpy as np
import pytest
from scipy.signal import hilbert

from pabeam.errors import DataError
from pabeam.phantom import (PhantomSpec, RFFrame, add_noise, point_grid_targets,
                            pulse_wavelet, simulate_frame, wire_targets)

from conftest import make_geom


class TestWavelet:
    def test_unit_peak_at_zero(self, probe):
        assert pulse_wavelet(probe, 0.0) == 1.0

    def test_decays_to_zero(self, probe):
        assert abs(pulse_wavelet(probe, 1e-5)) < 1e-12
        assert abs(pulse_wavelet(probe, -1e-5)) < 1e-12

    def test_spectral_peak_at_center_freq(self, probe):
        # oracle: discrete Fourier transform of the sampled pulse
        n = 4096
        fs = probe.sampling_freq
        t = (np.arange(n) - n // 2) / fs
        spec = np.abs(np.fft.rfft(pulse_wavelet(probe, t)))
        freqs = np.fft.rfftfreq(n, 1 / fs)
        assert abs(freqs[np.argmax(spec)] - probe.center_freq) <= fs / n

    def test_minus_6db_band_edges(self, probe):
        n = 16384
        fs = probe.sampling_freq
        t = (np.arange(n) - n // 2) / fs
        spec = np.abs(np.fft.rfft(pulse_wavelet(probe, t)))
        freqs = np.fft.rfftfreq(n, 1 / fs)
        peak = spec.max()
        half_bw = probe.fractional_bandwidth * probe.center_freq / 2
        for edge in (probe.center_freq - half_bw, probe.center_freq + half_bw):
            level = spec[np.argmin(np.abs(freqs - edge))] / peak
            assert level == pytest.approx(0.5, abs=0.02)


class TestSimulateFrame:
    def test_arrival_sample(self):
        geom = make_geom(8)
        target_x = geom.element_x[3]
        frame = simulate_frame(geom, PhantomSpec(targets=((target_x, 7.7e-3, 1.0),)), 400)
        env = np.abs(hilbert(frame.samples[3]))
        assert abs(int(np.argmax(env)) - 250) <= 1

    def test_superposition_exact(self):
        geom = make_geom(8)
        t0, t1 = (0.0, 5e-3, 1.0), (1e-3, 8e-3, 2.0)
        both = simulate_frame(geom, PhantomSpec(targets=(t0, t1)), 512)
        single0 = simulate_frame(geom, PhantomSpec(targets=(t0,)), 512)
        single1 = simulate_frame(geom, PhantomSpec(targets=(t1,)), 512)
        assert np.array_equal(both.samples, single0.samples + single1.samples)

    def test_two_equidistant_targets_double_amplitude(self):
        geom = make_geom(8)
        single = simulate_frame(geom, PhantomSpec(targets=((0.0, 6e-3, 1.0),)), 512)
        double = simulate_frame(
            geom, PhantomSpec(targets=((0.0, 6e-3, 1.0), (0.0, 6e-3, 1.0))), 512)
        assert np.array_equal(double.samples, 2.0 * single.samples)

    def test_empty_targets_all_zero(self):
        geom = make_geom(4)
        frame = simulate_frame(geom, PhantomSpec(targets=()), 128)
        assert not frame.samples.any()

    def test_one_over_r_decay(self):
        geom = make_geom(8)
        x = geom.element_x[2]
        near = simulate_frame(geom, PhantomSpec(targets=((x, 5e-3, 1.0),)), 1024)
        far = simulate_frame(geom, PhantomSpec(targets=((x, 10e-3, 1.0),)), 1024)
        ratio = (np.abs(hilbert(near.samples[2])).max()
                 / np.abs(hilbert(far.samples[2])).max())
        assert ratio == pytest.approx(2.0, rel=0.02)

    def test_truncation_flagged(self):
        geom = make_geom(4)
        frame = simulate_frame(geom, PhantomSpec(targets=((0.0, 30e-3, 1.0),)), 500)
        assert frame.truncated_targets == (0,)
        ok = simulate_frame(geom, PhantomSpec(targets=((0.0, 7e-3, 1.0),)), 500)
        assert ok.truncated_targets == ()


class TestAddNoise:
    def _clean(self, m=64, ns=2048):
        geom = make_geom(m)
        return simulate_frame(geom, PhantomSpec(targets=((0.0, 8e-3, 1.0),)), ns)

    def test_none_means_unchanged(self):
        frame = self._clean(8, 512)
        assert add_noise(frame, None, 0) is frame
        assert add_noise(frame, np.inf, 0) is frame

    def test_measured_snr_near_0db(self):
        # M*Ns = 131072 samples, power ratio measured directly
        frame = self._clean()
        noisy = add_noise(frame, 0.0, 123)
        p_signal = np.mean(frame.samples ** 2)
        p_noise = np.mean((noisy.samples - frame.samples) ** 2)
        measured = 10 * np.log10(p_signal / p_noise)
        assert -0.5 <= measured <= 0.5

    def test_deterministic_for_seed(self):
        frame = self._clean(8, 512)
        a = add_noise(frame, 20.0, 42)
        b = add_noise(frame, 20.0, 42)
        c = add_noise(frame, 20.0, 43)
        assert np.array_equal(a.samples, b.samples)
        assert not np.array_equal(a.samples, c.samples)

    def test_zero_frame_rejected(self):
        geom = make_geom(4)
        frame = RFFrame(geom=geom, num_samples=64, samples=np.zeros((4, 64)))
        with pytest.raises(DataError):
            add_noise(frame, 30.0, 0)

    def test_simulate_applies_noise_from_spec(self):
        geom = make_geom(8)
        spec = PhantomSpec(targets=((0.0, 8e-3, 1.0),), noise_snr_db=10.0, rng_seed=3)
        a = simulate_frame(geom, spec, 512)
        b = simulate_frame(geom, spec, 512)
        clean = simulate_frame(geom, PhantomSpec(targets=spec.targets), 512)
        assert np.array_equal(a.samples, b.samples)
        assert not np.array_equal(a.samples, clean.samples)


class TestPresets:
    def test_point_grid_layout(self):
        targets = point_grid_targets()
        assert len(targets) == 14
        depths = sorted({z for _, z, _ in targets})
        assert depths == [25e-3, 30e-3, 32.5e-3, 35e-3, 40e-3, 42.5e-3, 45e-3, 50e-3]
        for z in (25e-3, 30e-3, 35e-3, 40e-3, 45e-3, 50e-3):
            xs = sorted(x for x, tz, _ in targets if tz == z)
            assert xs == [-2e-3, 2e-3]

    def test_wire_layout(self):
        targets = wire_targets()
        assert len(targets) == 4
        assert all(6e-3 <= z <= 15e-3 for _, z, _ in targets)
