"""Image-quality metrics: SNR, lateral profiles, FWHM, and sidelobe level."""

from dataclasses import dataclass

import numpy as np

from .errors import DataError, UsageError
from .beamcore import BeamformedImage, STAGE_ENVELOPE, STAGE_LOG

# Half maximum in amplitude, expressed in dB.
HALF_AMPLITUDE_DB = 20.0 * np.log10(2.0)


@dataclass(frozen=True)
class Roi:
    """Axis-aligned rectangle in meters."""

    x_lo: float
    x_hi: float
    z_lo: float
    z_hi: float

    def __post_init__(self):
        if not (self.x_lo < self.x_hi and self.z_lo < self.z_hi):
            raise UsageError(
                f"degenerate ROI [{self.x_lo}, {self.x_hi}] x [{self.z_lo}, {self.z_hi}]"
            )

    def overlaps(self, other: "Roi") -> bool:
        return (self.x_lo < other.x_hi and other.x_lo < self.x_hi
                and self.z_lo < other.z_hi and other.z_lo < self.z_hi)


@dataclass(frozen=True)
class LateralProfile:
    """One constant-depth row of a log-compressed image."""

    depth: float
    x: np.ndarray
    value_db: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.float64)
        v = np.asarray(self.value_db, dtype=np.float64)
        if x.shape != v.shape or x.ndim != 1:
            raise UsageError("profile x and value arrays must be 1-D and equally long")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "value_db", v)


def _roi_mask(image: BeamformedImage, roi: Roi) -> np.ndarray:
    g = image.grid
    sel_x = (g.x >= roi.x_lo) & (g.x <= roi.x_hi)
    sel_z = (g.z >= roi.z_lo) & (g.z <= roi.z_hi)
    if not sel_x.any() or not sel_z.any():
        raise UsageError(f"ROI {roi} does not intersect the image grid")
    return image.values[np.ix_(sel_z, sel_x)]


def snr(image: BeamformedImage, target: Roi, noise: Roi) -> float:
    """20*log10 of (target intensity range / noise standard deviation).

    Evaluated on the pre-log envelope so the statistics act on linear
    intensities.
    """
    if image.stage != STAGE_ENVELOPE:
        raise UsageError(f"snr expects an envelope image, got '{image.stage}'")
    if target.overlaps(noise):
        raise UsageError("target and noise ROIs must be disjoint")
    t = _roi_mask(image, target)
    n = _roi_mask(image, noise)
    p_signal = float(t.max() - t.min())
    p_noise = float(n.std())
    if p_noise == 0.0:
        raise DataError("noise ROI has zero standard deviation")
    return float(20.0 * np.log10(p_signal / p_noise))


def lateral_profile(image: BeamformedImage, depth: float) -> LateralProfile:
    """Extract the grid row nearest to `depth` from a log-compressed image."""
    if image.stage != STAGE_LOG:
        raise UsageError(f"lateral_profile expects a log-compressed image, got '{image.stage}'")
    g = image.grid
    if not g.z_min <= depth <= g.z_max:
        raise UsageError(f"depth {depth} m outside grid [{g.z_min}, {g.z_max}] m")
    iz = int(np.argmin(np.abs(g.z - depth)))
    return LateralProfile(depth=float(g.z[iz]), x=g.x.copy(),
                          value_db=image.values[iz].copy())


def _find_peak(profile: LateralProfile, peak_x: float) -> int:
    # Hill-climb from the sample nearest peak_x to the local maximum.
    v = profile.value_db
    i = int(np.argmin(np.abs(profile.x - peak_x)))
    while True:
        best = i
        if i > 0 and v[i - 1] > v[best]:
            best = i - 1
        if i < len(v) - 1 and v[i + 1] > v[best]:
            best = i + 1
        if best == i:
            return i
        i = best


def _half_crossing(x, v, peak_idx, level, step):
    i = peak_idx
    while 0 <= i + step < len(v):
        j = i + step
        if v[j] < level:
            # Linear interpolation between the bracketing samples.
            frac = (v[i] - level) / (v[i] - v[j])
            return float(x[i] + frac * (x[j] - x[i]))
        i = j
    raise DataError("half-maximum crossing not found within the profile extent")


def fwhm(profile: LateralProfile, peak_x: float) -> float:
    """Width between the -6 dB (half-amplitude) crossings around the peak."""
    idx = _find_peak(profile, peak_x)
    level = profile.value_db[idx] - HALF_AMPLITUDE_DB
    left = _half_crossing(profile.x, profile.value_db, idx, level, -1)
    right = _half_crossing(profile.x, profile.value_db, idx, level, +1)
    return right - left


def sidelobe_level(profile: LateralProfile, peak_x: float) -> float:
    """Highest dB value, relative to the main-lobe peak, outside
    peak_x +/- 2*FWHM."""
    width = fwhm(profile, peak_x)
    peak_db = profile.value_db[_find_peak(profile, peak_x)]
    outside = np.abs(profile.x - peak_x) > 2.0 * width
    if not outside.any():
        raise DataError("sidelobe exclusion interval covers the whole profile")
    return float(profile.value_db[outside].max() - peak_db)
