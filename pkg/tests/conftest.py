import numpy as np
import pytest

from pabeam.geometry import ArrayGeometry, ImageGrid


@pytest.fixture
def probe():
    return ArrayGeometry(num_elements=8, pitch=3e-4, center_freq=4e6,
                         fractional_bandwidth=0.77, sampling_freq=50e6,
                         sound_speed=1540.0)


def make_geom(m, pitch=3e-4):
    return ArrayGeometry(num_elements=m, pitch=pitch, center_freq=4e6,
                         fractional_bandwidth=0.77, sampling_freq=50e6,
                         sound_speed=1540.0)


def scanline_grid(nz, dz=1540 / 50e6):
    """Single-column grid used to exercise kernels on handcrafted tables."""
    return ImageGrid(x_min=0.0, x_max=0.0, z_min=1e-3, z_max=1e-3 + nz * dz,
                     nx=1, nz=nz, dx=0.0, dz=dz)


SMALL_CFG = """
num_elements = 32
pitch_m = 2e-4
center_freq_hz = 4e6
fractional_bandwidth = 0.77
sampling_freq_hz = 50e6
sound_speed_mps = 1540
num_samples = 640
targets = 0,0.008,1; -0.002,0.012,1
noise_snr_db = 20
seed = 5
x_min_m = -0.008
x_max_m = 0.008
z_min_m = 0.006
z_max_m = 0.014
nx = 48
method = nl
p = 3
apply_filter = true
pass_lo_hz = 4.5e6
pass_hi_hz = 11.5e6
tukey_alpha = 0.5
dynamic_range_db = 60
"""


@pytest.fixture
def small_cfg_text():
    return SMALL_CFG
