"""Post-beamforming processing: band-pass filtering, envelope, log compression.

Every operation works column-wise along the axial axis, which on a
time-aligned grid is a time-series at the acquisition sampling rate.
"""

from dataclasses import dataclass

import numpy as np
from scipy.signal import hilbert

from .errors import DataError, UsageError
from .beamcore import (BeamformedImage, STAGE_ENVELOPE, STAGE_FILTERED,
                       STAGE_LOG, STAGE_RAW)


@dataclass(frozen=True)
class FilterSpec:
    """Pass band in Hz with a Tukey-tapered edge fraction."""

    pass_lo: float
    pass_hi: float
    tukey_alpha: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.pass_lo < self.pass_hi:
            raise UsageError(
                f"need 0 < pass_lo < pass_hi, got [{self.pass_lo}, {self.pass_hi}]"
            )
        if not 0.0 <= self.tukey_alpha <= 1.0:
            raise UsageError(f"tukey_alpha must be in [0, 1], got {self.tukey_alpha}")


def tukey_band_mask(freqs: np.ndarray, spec: FilterSpec) -> np.ndarray:
    """Zero-phase magnitude mask: 0 outside the band, Tukey taper over the
    outer alpha/2 fraction of each edge, 1 across the flat middle."""
    mask = np.zeros_like(freqs)
    band = spec.pass_hi - spec.pass_lo
    inside = (freqs >= spec.pass_lo) & (freqs <= spec.pass_hi)
    u = (freqs[inside] - spec.pass_lo) / band
    w = np.ones_like(u)
    edge = spec.tukey_alpha / 2.0
    if edge > 0.0:
        lo = u < edge
        w[lo] = 0.5 * (1.0 + np.cos(np.pi * (u[lo] / edge - 1.0)))
        hi = u > 1.0 - edge
        w[hi] = 0.5 * (1.0 + np.cos(np.pi * ((u[hi] - (1.0 - edge)) / edge)))
    mask[inside] = w
    mask[0] = 0.0  # DC is always rejected
    return mask


def bandpass(image: BeamformedImage, spec: FilterSpec, fs: float) -> BeamformedImage:
    """Filter each lateral column by frequency-domain mask multiplication.

    Zero-phase by construction, so arrival positions are not shifted between
    beamformers being compared.
    """
    if image.stage not in (STAGE_RAW, STAGE_FILTERED):
        raise UsageError(f"bandpass expects a raw or filtered image, got '{image.stage}'")
    if not image.grid.time_aligned:
        raise DataError(
            "bandpass requires a time-aligned grid (dz = c/fs); filter frequencies "
            "are meaningless otherwise"
        )
    if not spec.pass_hi < fs / 2.0:
        raise UsageError(
            f"pass_hi {spec.pass_hi} Hz must stay below the Nyquist rate {fs / 2.0} Hz"
        )
    nz = image.grid.nz
    freqs = np.fft.rfftfreq(nz, d=1.0 / fs)
    mask = tukey_band_mask(freqs, spec)
    spectra = np.fft.rfft(image.values, axis=0)
    filtered = np.fft.irfft(spectra * mask[:, None], n=nz, axis=0)
    return BeamformedImage(grid=image.grid, values=filtered, stage=STAGE_FILTERED)


def envelope(image: BeamformedImage) -> BeamformedImage:
    """Magnitude of the analytic signal of each lateral column."""
    if image.stage not in (STAGE_RAW, STAGE_FILTERED):
        raise UsageError(f"envelope expects a raw or filtered image, got '{image.stage}'")
    env = np.abs(hilbert(image.values, axis=0))
    return BeamformedImage(grid=image.grid, values=env, stage=STAGE_ENVELOPE)


def log_compress(image: BeamformedImage, dynamic_range_db: float) -> BeamformedImage:
    """Map to dB relative to the image maximum, clamped at -dynamic_range_db."""
    if image.stage != STAGE_ENVELOPE:
        raise UsageError(f"log_compress expects an envelope image, got '{image.stage}'")
    if dynamic_range_db <= 0:
        raise UsageError(f"dynamic range must be > 0 dB, got {dynamic_range_db}")
    peak = float(image.values.max())
    if peak <= 0.0:
        raise DataError("cannot log-compress an all-zero image")
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(image.values / peak)
    db = np.maximum(db, -dynamic_range_db)
    return BeamformedImage(grid=image.grid, values=db, stage=STAGE_LOG)
