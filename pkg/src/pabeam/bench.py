"""Wall-clock benchmark of the beamformers across element counts.

Demonstrates the per-pixel cost shape: linear in M for delay-and-sum and the
p-th-root beamformer, quadratic for delay-multiply-and-sum. Timed regions run
strictly one after another; the default single-threaded mode keeps the
complexity scaling visible.
"""

import time
from dataclasses import dataclass

import numpy as np

from .errors import UsageError
from .beamcore import BeamformerSpec, das, dmas, nl_p
from .geometry import ArrayGeometry, ImageGrid, build_grid, compute_delays
from .phantom import PhantomSpec, simulate_frame


@dataclass(frozen=True)
class BenchResult:
    method: str
    p: int
    num_elements: int
    grid_pixels: int
    repeats: int
    median_seconds: float
    ops_per_pixel: int
    parallel: bool = False


def ops_per_pixel(method: str, num_elements: int) -> int:
    """Analytic per-pixel combination count: M terms for das/nl, M(M-1)/2
    pair terms for dmas."""
    if method == "dmas":
        return num_elements * (num_elements - 1) // 2
    return num_elements


def default_probe() -> ArrayGeometry:
    """4 MHz, 77% bandwidth probe template used when no geometry is supplied;
    the element count is replaced per benchmark point."""
    return ArrayGeometry(num_elements=2, pitch=3e-4, center_freq=4e6,
                         fractional_bandwidth=0.77, sampling_freq=50e6,
                         sound_speed=1540.0)


def default_bench_grid(geom: ArrayGeometry, nx: int = 256, nz: int = 256,
                       z_min: float = 5e-3) -> ImageGrid:
    dz = geom.sound_speed / geom.sampling_freq
    return build_grid(geom, -9.6e-3, 9.6e-3, z_min, z_min + nz * dz, nx)


def _beamform_call(spec: BeamformerSpec, frame, delays, parallel):
    if spec.method == "das":
        return lambda: das(frame, delays, parallel=parallel)
    if spec.method == "dmas":
        return lambda: dmas(frame, delays, parallel=parallel)
    return lambda: nl_p(frame, delays, spec.p, parallel=parallel)


def run_bench(methods, element_counts, grid: ImageGrid, repeats: int, seed: int,
              probe: ArrayGeometry = None, parallel: bool = False):
    """Time each (method, element count) pair on a fixed-seed synthetic frame.

    Timing covers beamforming of the full grid only; simulation and delay-table
    construction are excluded. Reports the median over `repeats` runs (after
    one untimed warm-up) together with the analytic per-pixel operation count.
    """
    if repeats < 3:
        raise UsageError(f"repeats must be >= 3, got {repeats}")
    for m in element_counts:
        if m < 2:
            raise UsageError(f"element counts must be >= 2, got {m}")
    if probe is None:
        probe = default_probe()

    prepared = {}
    for m in element_counts:
        geom = ArrayGeometry(num_elements=int(m), pitch=probe.pitch,
                             center_freq=probe.center_freq,
                             fractional_bandwidth=probe.fractional_bandwidth,
                             sampling_freq=probe.sampling_freq,
                             sound_speed=probe.sound_speed)
        delays = compute_delays(geom, grid)
        num_samples = int(delays.delays.max()) + 96
        z_mid = (grid.z_min + grid.z_max) / 2.0
        phantom = PhantomSpec(targets=((-2e-3, z_mid, 1.0), (2e-3, z_mid, 1.0)),
                              noise_snr_db=30.0, rng_seed=seed)
        prepared[m] = (simulate_frame(geom, phantom, num_samples), delays)

    results = []
    for spec in methods:
        for m in element_counts:
            frame, delays = prepared[m]
            call = _beamform_call(spec, frame, delays, parallel)
            call()  # warm-up: JIT compilation and cache effects stay untimed
            times = []
            for _ in range(repeats):
                t0 = time.perf_counter()
                call()
                times.append(time.perf_counter() - t0)
            results.append(BenchResult(
                method=spec.method, p=spec.p, num_elements=int(m),
                grid_pixels=grid.num_pixels, repeats=repeats,
                median_seconds=float(np.median(times)),
                ops_per_pixel=ops_per_pixel(spec.method, int(m)),
                parallel=parallel,
            ))
    return results
