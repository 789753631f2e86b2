"""Flat key=value run configuration: parsing, validation, and overrides.

Unknown keys are hard errors so typos in experiment scripts cannot silently
change a run. All domain invariants are enforced while the config is built,
before any command produces output.
"""

import dataclasses
import math
from dataclasses import dataclass

from .errors import UsageError
from .beamcore import BeamformerSpec
from .geometry import ArrayGeometry, ImageGrid, build_grid
from .phantom import PhantomSpec
from .postproc import FilterSpec


def _parse_float(s):
    try:
        return float(s)
    except ValueError as e:
        raise UsageError(f"expected a number, got '{s}'") from e


def _parse_int(s):
    try:
        return int(s)
    except ValueError as e:
        raise UsageError(f"expected an integer, got '{s}'") from e


def _parse_bool(s):
    low = s.strip().lower()
    if low in ("true", "yes", "1"):
        return True
    if low in ("false", "no", "0"):
        return False
    raise UsageError(f"expected true/false, got '{s}'")


def _parse_noise(s):
    low = s.strip().lower()
    if low in ("none", "inf"):
        return None
    return _parse_float(s)


def _parse_targets(s):
    targets = []
    body = s.strip()
    if not body:
        return tuple()
    for part in body.split(";"):
        part = part.strip()
        if not part:
            continue
        fields = [f.strip() for f in part.split(",")]
        if len(fields) != 3:
            raise UsageError(f"target '{part}' must be x,z,amplitude")
        targets.append(tuple(_parse_float(f) for f in fields))
    return tuple(targets)


def _parse_method(s):
    m = s.strip().lower()
    if m not in ("das", "dmas", "nl"):
        raise UsageError(f"method must be das, dmas or nl, got '{s}'")
    return m


def _parse_p(s):
    low = s.strip().lower()
    if low in ("", "none"):
        return None
    return _parse_int(s)


# key -> (parser, default); _REQUIRED means the key must be present.
_REQUIRED = object()
_SCHEMA = {
    "num_elements": (_parse_int, _REQUIRED),
    "pitch_m": (_parse_float, _REQUIRED),
    "center_freq_hz": (_parse_float, _REQUIRED),
    "fractional_bandwidth": (_parse_float, _REQUIRED),
    "sampling_freq_hz": (_parse_float, _REQUIRED),
    "sound_speed_mps": (_parse_float, _REQUIRED),
    "num_samples": (_parse_int, _REQUIRED),
    "targets": (_parse_targets, _REQUIRED),
    "noise_snr_db": (_parse_noise, None),
    "seed": (_parse_int, 0),
    "x_min_m": (_parse_float, _REQUIRED),
    "x_max_m": (_parse_float, _REQUIRED),
    "z_min_m": (_parse_float, _REQUIRED),
    "z_max_m": (_parse_float, _REQUIRED),
    "nx": (_parse_int, _REQUIRED),
    "method": (_parse_method, "das"),
    "p": (_parse_p, None),
    "apply_filter": (_parse_bool, True),
    "pass_lo_hz": (_parse_float, _REQUIRED),
    "pass_hi_hz": (_parse_float, _REQUIRED),
    "tukey_alpha": (_parse_float, 0.5),
    "dynamic_range_db": (_parse_float, 60.0),
}


@dataclass(frozen=True)
class RunConfig:
    geometry: ArrayGeometry
    grid: ImageGrid
    num_samples: int
    phantom: PhantomSpec
    beamformer: BeamformerSpec
    filter_spec: FilterSpec
    dynamic_range_db: float


def _build(values: dict) -> RunConfig:
    geometry = ArrayGeometry(
        num_elements=values["num_elements"],
        pitch=values["pitch_m"],
        center_freq=values["center_freq_hz"],
        fractional_bandwidth=values["fractional_bandwidth"],
        sampling_freq=values["sampling_freq_hz"],
        sound_speed=values["sound_speed_mps"],
    )
    grid = build_grid(geometry, values["x_min_m"], values["x_max_m"],
                      values["z_min_m"], values["z_max_m"], values["nx"])
    if values["num_samples"] < 1:
        raise UsageError(f"num_samples must be >= 1, got {values['num_samples']}")
    phantom = PhantomSpec(targets=values["targets"],
                          noise_snr_db=values["noise_snr_db"],
                          rng_seed=values["seed"])
    beamformer = BeamformerSpec(method=values["method"], p=values["p"],
                                apply_filter=values["apply_filter"])
    filter_spec = FilterSpec(pass_lo=values["pass_lo_hz"], pass_hi=values["pass_hi_hz"],
                             tukey_alpha=values["tukey_alpha"])
    if not filter_spec.pass_hi < geometry.sampling_freq / 2.0:
        raise UsageError(
            f"pass_hi_hz {filter_spec.pass_hi} must stay below fs/2 "
            f"({geometry.sampling_freq / 2.0})"
        )
    if values["dynamic_range_db"] <= 0:
        raise UsageError(f"dynamic_range_db must be > 0, got {values['dynamic_range_db']}")
    return RunConfig(geometry=geometry, grid=grid, num_samples=values["num_samples"],
                     phantom=phantom, beamformer=beamformer, filter_spec=filter_spec,
                     dynamic_range_db=values["dynamic_range_db"])


def parse_config(text: str) -> RunConfig:
    """Parse a flat key=value config; errors carry the offending line number."""
    values = {}
    seen = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"config line {lineno}: expected key = value, got '{raw.strip()}'")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _SCHEMA:
            raise UsageError(f"config line {lineno}: unknown key '{key}'")
        if key in seen:
            raise UsageError(
                f"config line {lineno}: duplicate key '{key}' (first set on line {seen[key]})"
            )
        seen[key] = lineno
        parser, _ = _SCHEMA[key]
        try:
            values[key] = parser(value)
        except UsageError as e:
            raise UsageError(f"config line {lineno}: {key}: {e}") from e
    missing = [k for k, (_, default) in _SCHEMA.items()
               if default is _REQUIRED and k not in values]
    if missing:
        raise UsageError(f"config missing required keys: {', '.join(sorted(missing))}")
    for key, (_, default) in _SCHEMA.items():
        values.setdefault(key, default)
    return _build(values)


def apply_overrides(cfg: RunConfig, *, method=None, p=None, apply_filter=None,
                    filter_lo=None, filter_hi=None, dynamic_range_db=None,
                    seed=None, noise_snr_db=...) -> RunConfig:
    """Return a new config with CLI/service overrides folded in."""
    bf = cfg.beamformer
    if method is not None or p is not None or apply_filter is not None:
        new_method = method if method is not None else bf.method
        if p is not None:
            new_p = p
        elif method is not None and method != "nl":
            new_p = None
        else:
            new_p = bf.p
        new_apply = apply_filter if apply_filter is not None else bf.apply_filter
        bf = BeamformerSpec(method=new_method, p=new_p, apply_filter=new_apply)
    fspec = cfg.filter_spec
    if filter_lo is not None or filter_hi is not None:
        fspec = FilterSpec(
            pass_lo=filter_lo if filter_lo is not None else fspec.pass_lo,
            pass_hi=filter_hi if filter_hi is not None else fspec.pass_hi,
            tukey_alpha=fspec.tukey_alpha,
        )
        if not fspec.pass_hi < cfg.geometry.sampling_freq / 2.0:
            raise UsageError(
                f"pass_hi {fspec.pass_hi} must stay below fs/2 "
                f"({cfg.geometry.sampling_freq / 2.0})"
            )
    ph = cfg.phantom
    if seed is not None or noise_snr_db is not ...:
        ph = PhantomSpec(
            targets=ph.targets,
            noise_snr_db=ph.noise_snr_db if noise_snr_db is ... else noise_snr_db,
            rng_seed=seed if seed is not None else ph.rng_seed,
        )
    dr = dynamic_range_db if dynamic_range_db is not None else cfg.dynamic_range_db
    if dr <= 0:
        raise UsageError(f"dynamic range must be > 0 dB, got {dr}")
    return dataclasses.replace(cfg, beamformer=bf, filter_spec=fspec, phantom=ph,
                               dynamic_range_db=dr)
