"""Command workflows shared by the HTTP service endpoints.

Each workflow takes parsed inputs plus raw file payloads and returns in-memory
payloads; nothing here touches the filesystem, so clients (CLI or remote) own
all file placement and no partial outputs can appear on failure.
"""

import hashlib
from dataclasses import dataclass

import numpy as np

from .errors import DataError, UsageError
from .beamcore import (BeamformerSpec, BeamformedImage, das, dmas, nl_p,
                       STAGE_ENVELOPE, STAGE_LOG)
from .bench import BenchResult, default_bench_grid, default_probe, run_bench
from .config import RunConfig
from .formats import csv_text, read_paim, read_parf, write_paim, write_parf, write_pgm
from .geometry import compute_delays
from .metrics import Roi, fwhm, lateral_profile, sidelobe_level, snr
from .phantom import RFFrame, simulate_frame
from .postproc import bandpass, envelope, log_compress

METRICS_CSV_HEADER = ("method", "p", "depth_mm", "snr_db", "fwhm_mm", "sidelobe_db")
BENCH_CSV_HEADER = ("method", "p", "M", "pixels", "median_seconds", "ops_per_pixel")
PROFILE_CSV_HEADER = ("x_mm", "value_db")

# Default ROI geometry around a point target, in meters.
ROI_HALF_X = 2e-3
ROI_HALF_Z = 2e-3
NOISE_ROI_WIDTH = 4e-3


@dataclass(frozen=True)
class SimulateResult:
    frame_bytes: bytes
    sha256: str
    num_elements: int
    num_samples: int
    sampling_freq: float
    sound_speed: float
    truncated_targets: tuple


@dataclass(frozen=True)
class BeamformResult:
    method: str
    p: int
    stages: dict  # stage name -> PAIM bytes
    pgm: bytes
    nx: int
    nz: int


@dataclass(frozen=True)
class MetricsResult:
    metrics_csv: str
    profiles: tuple  # of (depth_m, csv text)


@dataclass(frozen=True)
class SweepItem:
    p: int
    envelope_paim: bytes
    log_paim: bytes
    pgm: bytes


@dataclass(frozen=True)
class SweepResult:
    items: tuple
    metrics_csv: str


@dataclass(frozen=True)
class BenchPayload:
    results: tuple
    csv: str


def simulate_workflow(cfg: RunConfig) -> SimulateResult:
    frame = simulate_frame(cfg.geometry, cfg.phantom, cfg.num_samples)
    data = write_parf(frame)
    return SimulateResult(
        frame_bytes=data,
        sha256=hashlib.sha256(data).hexdigest(),
        num_elements=cfg.geometry.num_elements,
        num_samples=cfg.num_samples,
        sampling_freq=cfg.geometry.sampling_freq,
        sound_speed=cfg.geometry.sound_speed,
        truncated_targets=frame.truncated_targets,
    )


def _frame_from_parf(cfg: RunConfig, frame_bytes: bytes) -> RFFrame:
    header, samples = read_parf(frame_bytes)
    g = cfg.geometry
    checks = (
        ("num_elements", header["num_elements"], g.num_elements),
        ("sampling_freq", header["sampling_freq"], g.sampling_freq),
        ("sound_speed", header["sound_speed"], g.sound_speed),
        ("pitch", header["pitch"], g.pitch),
        ("first_element_x", header["first_element_x"], float(g.element_x[0])),
    )
    for name, got, want in checks:
        if got != want:
            raise DataError(f"frame/config mismatch: {name} is {got} in the frame "
                            f"but {want} in the config")
    return RFFrame(geom=g, num_samples=header["num_samples"],
                   samples=samples.astype(np.float64))


def _beamform_raw(spec: BeamformerSpec, frame, delays, parallel=False) -> BeamformedImage:
    if spec.method == "das":
        return das(frame, delays, parallel=parallel)
    if spec.method == "dmas":
        return dmas(frame, delays, parallel=parallel)
    return nl_p(frame, delays, spec.p, parallel=parallel)


def run_pipeline(cfg: RunConfig, frame, delays, spec: BeamformerSpec = None) -> dict:
    """Beamform and post-process one frame; returns every produced stage."""
    spec = spec or cfg.beamformer
    raw = _beamform_raw(spec, frame, delays)
    stages = {"raw": raw}
    pre_env = raw
    if spec.apply_filter:
        filt = bandpass(raw, cfg.filter_spec, cfg.geometry.sampling_freq)
        stages["filtered"] = filt
        pre_env = filt
    env = envelope(pre_env)
    stages["envelope"] = env
    stages["log"] = log_compress(env, cfg.dynamic_range_db)
    return stages


def beamform_workflow(cfg: RunConfig, frame_bytes: bytes) -> BeamformResult:
    frame = _frame_from_parf(cfg, frame_bytes)
    delays = compute_delays(cfg.geometry, cfg.grid)
    stages = run_pipeline(cfg, frame, delays)
    payloads = {name: write_paim(img) for name, img in stages.items()}
    pgm = write_pgm(stages["log"], cfg.dynamic_range_db)
    return BeamformResult(method=cfg.beamformer.method, p=cfg.beamformer.p,
                          stages=payloads, pgm=pgm,
                          nx=cfg.grid.nx, nz=cfg.grid.nz)


def default_target_rois(cfg: RunConfig):
    """One ROI per distinct target depth, centered on the first target listed
    at that depth."""
    by_depth = {}
    for x, z, _ in cfg.phantom.targets:
        by_depth.setdefault(z, x)
    rois = []
    for z in sorted(by_depth):
        x = by_depth[z]
        rois.append(Roi(x - ROI_HALF_X, x + ROI_HALF_X, z - ROI_HALF_Z, z + ROI_HALF_Z))
    return rois


def default_noise_roi(cfg: RunConfig, z_lo: float, z_hi: float) -> Roi:
    """Background window at whichever lateral grid edge clears the targets.

    Only targets whose depth falls inside (or within 1 mm of) the ROI's depth
    band constrain the placement; targets elsewhere cannot leak into it.
    """
    g = cfg.grid
    xs = [x for x, z, _ in cfg.phantom.targets
          if z_lo - 1e-3 <= z <= z_hi + 1e-3]
    if not xs:
        xs = [0.5 * (g.x_min + g.x_max)]
    right = Roi(g.x_max - NOISE_ROI_WIDTH, g.x_max, z_lo, z_hi)
    left = Roi(g.x_min, g.x_min + NOISE_ROI_WIDTH, z_lo, z_hi)
    def clearance(roi):
        center = 0.5 * (roi.x_lo + roi.x_hi)
        return min(abs(center - x) for x in xs)
    roi = max((right, left), key=clearance)
    if clearance(roi) < NOISE_ROI_WIDTH / 2.0 + ROI_HALF_X:
        raise UsageError("no target-free lateral band for the default noise ROI; "
                         "pass an explicit noise ROI")
    return roi


def _stage_image(data: bytes, stage: str) -> BeamformedImage:
    image = read_paim(data)
    if image.stage != stage:
        raise DataError(f"expected a {stage} image, got '{image.stage}'")
    return image


def metrics_rows(env_image, log_image, target_rois, noise_roi_for, depths,
                 method: str, p):
    """One row per (target ROI, depth); per-metric failures land in the row as
    'error' markers instead of aborting the batch."""
    rows = []
    profiles = []
    for roi, depth in zip(target_rois, depths):
        peak_x = 0.5 * (roi.x_lo + roi.x_hi)
        try:
            snr_db = snr(env_image, roi, noise_roi_for(roi, depth))
        except (DataError, UsageError):
            snr_db = "error"
        fwhm_mm = "error"
        sidelobe_db = "error"
        try:
            profile = lateral_profile(log_image, depth)
            profiles.append((depth, profile))
            fwhm_mm = fwhm(profile, peak_x) * 1e3
            sidelobe_db = sidelobe_level(profile, peak_x)
        except (DataError, UsageError):
            pass
        rows.append((method, p, depth * 1e3, snr_db, fwhm_mm, sidelobe_db))
    return rows, profiles


def _resolve_rois(cfg, target_rois, noise_roi, depths):
    if target_rois is None:
        defaults = default_target_rois(cfg)
        if not defaults:
            raise UsageError("no targets in config and no explicit target ROI given")
        if depths is None:
            target_rois = defaults
            depths = [0.5 * (r.z_lo + r.z_hi) for r in target_rois]
        else:
            # Pick, per requested depth, the ROI of the nearest target depth.
            centers = [0.5 * (r.z_lo + r.z_hi) for r in defaults]
            target_rois = [defaults[int(np.argmin([abs(c - d) for c in centers]))]
                           for d in depths]
    elif depths is None:
        depths = [0.5 * (r.z_lo + r.z_hi) for r in target_rois]
    if len(target_rois) == 1 and len(depths) > 1:
        target_rois = list(target_rois) * len(depths)
    if len(target_rois) != len(depths):
        raise UsageError(
            f"{len(target_rois)} target ROIs cannot pair with {len(depths)} depths"
        )
    if noise_roi is not None:
        noise_for = lambda roi, depth: noise_roi
    else:
        noise_for = lambda roi, depth: default_noise_roi(cfg, roi.z_lo, roi.z_hi)
    return target_rois, noise_for, depths


def metrics_workflow(cfg: RunConfig, envelope_bytes: bytes, log_bytes: bytes,
                     target_rois=None, noise_roi=None, depths=None,
                     method: str = None, p=None) -> MetricsResult:
    env_image = _stage_image(envelope_bytes, STAGE_ENVELOPE)
    log_image = _stage_image(log_bytes, STAGE_LOG)
    target_rois, noise_for, depths = _resolve_rois(cfg, target_rois, noise_roi, depths)
    method = method or cfg.beamformer.method
    p = p if p is not None else cfg.beamformer.p
    rows, profiles = metrics_rows(env_image, log_image, target_rois, noise_for,
                                  depths, method, p)
    profile_csvs = tuple(
        (depth, csv_text(PROFILE_CSV_HEADER,
                         [(x * 1e3, v) for x, v in zip(prof.x, prof.value_db)]))
        for depth, prof in profiles
    )
    return MetricsResult(metrics_csv=csv_text(METRICS_CSV_HEADER, rows),
                         profiles=profile_csvs)


def sweep_workflow(cfg: RunConfig, p_list, frame_bytes: bytes = None,
                   target_rois=None, noise_roi=None, depths=None) -> SweepResult:
    """Beamform once per p with shared delays; emit per-p images and one
    combined metrics table."""
    if not p_list:
        raise UsageError("p list must not be empty")
    for p in p_list:
        if int(p) != p or p < 1:
            raise UsageError(f"p values must be integers >= 1, got {p}")
    if frame_bytes is None:
        frame = simulate_frame(cfg.geometry, cfg.phantom, cfg.num_samples)
    else:
        frame = _frame_from_parf(cfg, frame_bytes)
    delays = compute_delays(cfg.geometry, cfg.grid)
    target_rois, noise_for, depths = _resolve_rois(cfg, target_rois, noise_roi, depths)
    items = []
    all_rows = []
    for p in p_list:
        spec = BeamformerSpec(method="nl", p=int(p),
                              apply_filter=cfg.beamformer.apply_filter or int(p) % 2 == 0)
        stages = run_pipeline(cfg, frame, delays, spec)
        rows, _ = metrics_rows(stages["envelope"], stages["log"], target_rois,
                               noise_for, depths, "nl", int(p))
        all_rows.extend(rows)
        items.append(SweepItem(
            p=int(p),
            envelope_paim=write_paim(stages["envelope"]),
            log_paim=write_paim(stages["log"]),
            pgm=write_pgm(stages["log"], cfg.dynamic_range_db),
        ))
    return SweepResult(items=tuple(items),
                       metrics_csv=csv_text(METRICS_CSV_HEADER, all_rows))


def parse_method_token(token: str) -> BeamformerSpec:
    """'das', 'dmas', or 'nl:<p>' into a beamformer spec."""
    t = token.strip().lower()
    if t.startswith("nl:"):
        try:
            p = int(t.split(":", 1)[1])
        except ValueError as e:
            raise UsageError(f"bad method token '{token}' (expected nl:<p>)") from e
        return BeamformerSpec(method="nl", p=p)
    if t == "nl":
        raise UsageError("bench nl method needs an explicit root, e.g. nl:5")
    return BeamformerSpec(method=t)


def bench_workflow(method_tokens, element_counts, repeats: int, seed: int,
                   nx: int = 256, nz: int = 256, parallel: bool = False) -> BenchPayload:
    specs = [parse_method_token(t) for t in method_tokens]
    probe = default_probe()
    grid = default_bench_grid(probe, nx=nx, nz=nz)
    results = run_bench(specs, element_counts, grid, repeats, seed,
                        probe=probe, parallel=parallel)
    rows = [(r.method, r.p, r.num_elements, r.grid_pixels, r.median_seconds,
             r.ops_per_pixel) for r in results]
    return BenchPayload(results=tuple(results),
                        csv=csv_text(BENCH_CSV_HEADER, rows))
