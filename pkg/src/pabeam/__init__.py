"""Linear-array photoacoustic beamforming: simulation, reconstruction,
metrics, and benchmarking, served over HTTP with a thin CLI client."""

__version__ = "0.1.0"

from .geometry import ArrayGeometry, DelayTable, ImageGrid, build_grid, compute_delays
from .phantom import PhantomSpec, RFFrame, add_noise, pulse_wavelet, simulate_frame
from .beamcore import (BeamformedImage, BeamformerSpec, das, dmas, nl2_decomposition,
                       nl_p, signed_root)
from .postproc import FilterSpec, bandpass, envelope, log_compress
from .metrics import LateralProfile, Roi, fwhm, lateral_profile, sidelobe_level, snr
from .bench import BenchResult, run_bench

__all__ = [
    "ArrayGeometry", "DelayTable", "ImageGrid", "build_grid", "compute_delays",
    "PhantomSpec", "RFFrame", "add_noise", "pulse_wavelet", "simulate_frame",
    "BeamformedImage", "BeamformerSpec", "das", "dmas", "nl2_decomposition",
    "nl_p", "signed_root",
    "FilterSpec", "bandpass", "envelope", "log_compress",
    "LateralProfile", "Roi", "fwhm", "lateral_profile", "sidelobe_level", "snr",
    "BenchResult", "run_bench",
    "__version__",
]
