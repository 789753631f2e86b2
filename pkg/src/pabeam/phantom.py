"""Point-target phantoms and the analytic spherical-wave forward model.

Targets are ideal point emitters; each channel records a 1/r-scaled,
bandwidth-matched pulse at its one-way time of flight. Calibrated Gaussian
noise can be added relative to the whole-frame RMS.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import gausspulse

from .errors import DataError, UsageError
from .geometry import ArrayGeometry


@dataclass(frozen=True)
class PhantomSpec:
    """Point targets as (x, z, amplitude) triples plus a noise setting."""

    targets: tuple
    noise_snr_db: float = None  # None disables noise
    rng_seed: int = 0

    def __post_init__(self):
        targets = tuple((float(x), float(z), float(a)) for x, z, a in self.targets)
        for x, z, a in targets:
            if z <= 0:
                raise UsageError(f"target depth must be > 0, got z={z}")
            if a <= 0:
                raise UsageError(f"target amplitude must be > 0, got {a}")
        object.__setattr__(self, "targets", targets)


@dataclass(frozen=True)
class RFFrame:
    """Raw multichannel time samples: one row per element, one column per sample."""

    geom: ArrayGeometry
    num_samples: int
    samples: np.ndarray
    truncated_targets: tuple = ()

    def __post_init__(self):
        s = np.ascontiguousarray(self.samples, dtype=np.float64)
        if s.shape != (self.geom.num_elements, self.num_samples):
            raise UsageError(
                f"samples shape {s.shape} does not match "
                f"({self.geom.num_elements}, {self.num_samples})"
            )
        if not np.all(np.isfinite(s)):
            raise DataError("frame contains non-finite samples")
        object.__setattr__(self, "samples", s)


def _envelope_decay(geom: ArrayGeometry) -> float:
    # Gaussian envelope rate of the pulse: exp(-a t^2), -6 dB band edges at
    # f0 * (1 +/- fbw/2). Mirrors scipy.signal.gausspulse with bwr=-6.
    ref = 10.0 ** (-6.0 / 20.0)
    return -((math.pi * geom.center_freq * geom.fractional_bandwidth) ** 2) / (4.0 * math.log(ref))


def wavelet_half_support(geom: ArrayGeometry, floor: float = 1e-8) -> float:
    """Time after which the pulse envelope stays below `floor`."""
    return math.sqrt(math.log(1.0 / floor) / _envelope_decay(geom))


def pulse_wavelet(geom: ArrayGeometry, t):
    """Gaussian-modulated cosine at the array center frequency.

    Zero phase, unit peak at t=0, and -6 dB fractional bandwidth equal to
    geom.fractional_bandwidth.
    """
    return gausspulse(np.asarray(t, dtype=np.float64), fc=geom.center_freq,
                      bw=geom.fractional_bandwidth, bwr=-6)


def simulate_frame(geom: ArrayGeometry, phantom: PhantomSpec, num_samples: int) -> RFFrame:
    """Superpose spherical waves from each target onto every channel.

    samples[i, k] = sum over targets of amplitude/r_i * wavelet(k/fs - r_i/c).
    Targets whose arrival (plus pulse support) falls past the end of the trace
    are flagged in `truncated_targets`.
    """
    if num_samples < 1:
        raise UsageError(f"num_samples must be >= 1, got {num_samples}")
    fs = geom.sampling_freq
    t = np.arange(num_samples) / fs
    samples = np.zeros((geom.num_elements, num_samples))
    half_support = wavelet_half_support(geom)
    truncated = []
    for k, (tx, tz, amp) in enumerate(phantom.targets):
        r = np.hypot(tx - geom.element_x, tz)
        tau = r / geom.sound_speed
        samples += (amp / r)[:, None] * pulse_wavelet(geom, t[None, :] - tau[:, None])
        if (tau.max() + half_support) * fs > num_samples - 1:
            truncated.append(k)
    frame = RFFrame(geom=geom, num_samples=num_samples, samples=samples,
                    truncated_targets=tuple(truncated))
    if phantom.noise_snr_db is not None and np.isfinite(phantom.noise_snr_db):
        frame = add_noise(frame, phantom.noise_snr_db, phantom.rng_seed)
    return frame


def add_noise(frame: RFFrame, snr_db: float, seed: int) -> RFFrame:
    """Add i.i.d. Gaussian noise with sigma = frame RMS * 10^(-snr_db/20).

    The RMS reference is the root-mean-square over all M*Ns samples.
    Deterministic for a given seed (counter-based Philox stream, so chunked or
    parallel regeneration cannot reorder draws).
    """
    if snr_db is None or np.isinf(snr_db):
        return frame
    rms = float(np.sqrt(np.mean(frame.samples ** 2)))
    if rms == 0.0:
        raise DataError("cannot scale noise to an all-zero frame")
    sigma = rms * 10.0 ** (-snr_db / 20.0)
    rng = np.random.Generator(np.random.Philox(seed))
    noisy = frame.samples + sigma * rng.standard_normal(frame.samples.shape)
    return RFFrame(geom=frame.geom, num_samples=frame.num_samples, samples=noisy,
                   truncated_targets=frame.truncated_targets)


def point_grid_targets() -> tuple:
    """Default phantom: six 4 mm-separated pairs from 25 to 50 mm depth plus
    two lone targets at 32.5 and 42.5 mm."""
    targets = []
    for depth_mm in (25, 30, 35, 40, 45, 50):
        z = depth_mm * 1e-3
        targets.append((-2e-3, z, 1.0))
        targets.append((2e-3, z, 1.0))
    targets.append((0.0, 32.5e-3, 1.0))
    targets.append((0.0, 42.5e-3, 1.0))
    return tuple(targets)


def wire_targets() -> tuple:
    """Four wire-like targets spread laterally between 6 and 15 mm depth."""
    return (
        (-7.5e-3, 6e-3, 1.0),
        (-2.5e-3, 9e-3, 1.0),
        (2.5e-3, 12e-3, 1.0),
        (7.5e-3, 15e-3, 1.0),
    )
