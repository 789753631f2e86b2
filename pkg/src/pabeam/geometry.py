"""Transducer array description, imaging grids, and time-of-flight delay tables."""

from dataclasses import dataclass, field

import numpy as np

from .errors import UsageError

# Relative slack for floating-point consistency checks (grid spacing, pitch).
_REL_TOL = 1e-9


@dataclass(frozen=True)
class ArrayGeometry:
    """Linear array of ideal point elements on the z=0 line.

    Elements are uniformly spaced by `pitch` and, unless `element_x` is given,
    centered on the lateral origin.
    """

    num_elements: int
    pitch: float
    center_freq: float
    fractional_bandwidth: float
    sampling_freq: float
    sound_speed: float
    element_x: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.num_elements < 1:
            raise UsageError(f"num_elements must be >= 1, got {self.num_elements}")
        if self.pitch <= 0:
            raise UsageError(f"pitch must be > 0, got {self.pitch}")
        if not 0.0 < self.fractional_bandwidth < 2.0:
            raise UsageError(
                f"fractional_bandwidth must be in (0, 2), got {self.fractional_bandwidth}"
            )
        if self.sound_speed <= 0:
            raise UsageError(f"sound_speed must be > 0, got {self.sound_speed}")
        nyquist = 2.0 * self.center_freq * (1.0 + self.fractional_bandwidth / 2.0)
        if not self.sampling_freq > nyquist:
            raise UsageError(
                f"sampling_freq {self.sampling_freq} Hz does not cover the transducer "
                f"band (needs > {nyquist} Hz)"
            )
        if self.element_x is None:
            ex = (np.arange(self.num_elements) - (self.num_elements - 1) / 2.0) * self.pitch
            object.__setattr__(self, "element_x", ex)
        else:
            ex = np.asarray(self.element_x, dtype=np.float64)
            if ex.shape != (self.num_elements,):
                raise UsageError(
                    f"element_x has {ex.shape} entries, expected ({self.num_elements},)"
                )
            d = np.diff(ex)
            if self.num_elements > 1 and (
                np.any(d <= 0) or not np.allclose(d, self.pitch, rtol=_REL_TOL, atol=0)
            ):
                raise UsageError("element_x must be strictly increasing with uniform pitch")
            object.__setattr__(self, "element_x", ex)

    @property
    def aperture(self) -> float:
        return float(self.element_x[-1] - self.element_x[0])


@dataclass(frozen=True)
class ImageGrid:
    """Rectangular axial/lateral pixel grid (z > 0 is below the array).

    `time_aligned` marks grids whose axial spacing equals sound_speed/sampling_freq,
    making every lateral column a time-series at the acquisition rate.
    """

    x_min: float
    x_max: float
    z_min: float
    z_max: float
    nx: int
    nz: int
    dx: float
    dz: float
    time_aligned: bool = False

    def __post_init__(self):
        if self.nx < 1 or self.nz < 1:
            raise UsageError(f"grid needs nx >= 1 and nz >= 1, got {self.nx}x{self.nz}")
        if self.x_min > self.x_max or (self.x_min == self.x_max and self.nx > 1):
            raise UsageError(f"invalid lateral extent [{self.x_min}, {self.x_max}]")
        if self.z_min < 0 or not self.z_min < self.z_max:
            raise UsageError(f"invalid axial extent [{self.z_min}, {self.z_max}]")
        if self.dz <= 0:
            raise UsageError(f"dz must be > 0, got {self.dz}")

    @property
    def x(self) -> np.ndarray:
        return self.x_min + np.arange(self.nx) * self.dx

    @property
    def z(self) -> np.ndarray:
        return self.z_min + np.arange(self.nz) * self.dz

    @property
    def num_pixels(self) -> int:
        return self.nx * self.nz


@dataclass(frozen=True)
class DelayTable:
    """Per-pixel, per-element one-way sample delays.

    `delays` has shape (nz*nx, num_elements) with pixels flattened row-major
    (pixel index = iz*nx + ix). Entries outside [0, num_samples) of a frame are
    read as zero samples by the beamformers.
    """

    delays: np.ndarray
    geom: ArrayGeometry
    grid: ImageGrid

    def __post_init__(self):
        d = np.ascontiguousarray(self.delays, dtype=np.int32)
        expected = (self.grid.num_pixels, self.geom.num_elements)
        if d.shape != expected:
            raise UsageError(f"delay table shape {d.shape} does not match {expected}")
        object.__setattr__(self, "delays", d)


def build_grid(geom: ArrayGeometry, x_min: float, x_max: float,
               z_min: float, z_max: float, nx: int) -> ImageGrid:
    """Build a time-aligned grid: dz = c/fs, nz = ceil(axial extent / dz).

    Columns of images on this grid are valid fs-rate time-series, which the
    post-beamforming band-pass filter requires.
    """
    if nx < 1:
        raise UsageError(f"nx must be >= 1, got {nx}")
    if x_min > x_max or (x_min == x_max and nx > 1):
        raise UsageError(f"invalid lateral extent [{x_min}, {x_max}]")
    if z_min < 0 or not z_min < z_max:
        raise UsageError(f"invalid axial extent [{z_min}, {z_max}]")
    dz = geom.sound_speed / geom.sampling_freq
    # Guard against float fuzz pushing an exact multiple of dz up one row.
    nz = int(np.ceil((z_max - z_min) / dz - _REL_TOL))
    nz = max(nz, 1)
    dx = (x_max - x_min) / (nx - 1) if nx > 1 else 0.0
    return ImageGrid(x_min=x_min, x_max=x_max, z_min=z_min, z_max=z_max,
                     nx=nx, nz=nz, dx=dx, dz=dz, time_aligned=True)


def compute_delays(geom: ArrayGeometry, grid: ImageGrid) -> DelayTable:
    """Round-trip times from every pixel to every element, in integer samples.

    delay(pixel, i) = round(fs * ||pixel - element_i|| / c); one-way propagation
    only (photoacoustic sources emit once, there is no transmit delay).
    """
    if not grid.time_aligned:
        raise UsageError("delay tables require a time-aligned grid (use build_grid)")
    dz_expected = geom.sound_speed / geom.sampling_freq
    if abs(grid.dz - dz_expected) > _REL_TOL * dz_expected:
        raise UsageError(
            f"grid dz {grid.dz} does not match sound_speed/sampling_freq {dz_expected}"
        )
    fs = geom.sampling_freq
    c = geom.sound_speed
    z = grid.z
    out = np.empty((grid.nz, grid.nx, geom.num_elements), dtype=np.int32)
    for ix, xv in enumerate(grid.x):
        dist = np.hypot(xv - geom.element_x[None, :], z[:, None])
        out[:, ix, :] = np.rint((fs * dist) / c).astype(np.int32)
    return DelayTable(delays=out.reshape(grid.num_pixels, geom.num_elements),
                      geom=geom, grid=grid)
