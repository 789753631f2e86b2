"""DAS, DMAS, and p-th-root nonlinear beamformers over a delay table.

All beamformers share the same per-pixel structure: gather each channel's
sample at that pixel's delay (out-of-range reads are zero), then combine in
fixed ascending element order so images are bit-identical regardless of how
pixels are scheduled. DAS and the nonlinear beamformer do O(M) work per pixel;
DMAS evaluates all M(M-1)/2 signed pair products, which is what makes it
quadratic in the element count.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numba import njit, prange

from .errors import DataError, UsageError
from .geometry import DelayTable, ImageGrid

STAGE_RAW = "raw"
STAGE_FILTERED = "filtered"
STAGE_ENVELOPE = "envelope"
STAGE_LOG = "log_compressed"
STAGES = (STAGE_RAW, STAGE_FILTERED, STAGE_ENVELOPE, STAGE_LOG)


@dataclass(frozen=True)
class BeamformerSpec:
    """Method selector with root parameter and filter requirement checks."""

    method: str
    p: int = None
    apply_filter: bool = True

    def __post_init__(self):
        if self.method not in ("das", "dmas", "nl"):
            raise UsageError(f"unknown method '{self.method}' (expected das, dmas or nl)")
        if self.method == "nl":
            if self.p is None or int(self.p) != self.p or self.p < 1:
                raise UsageError(f"nl requires an integer p >= 1, got {self.p}")
            object.__setattr__(self, "p", int(self.p))
            if self.p % 2 == 0 and not self.apply_filter:
                raise UsageError(
                    "even-p nl output loses signal polarity and must be band-pass "
                    "filtered; remove --no-filter or use an odd p"
                )
        elif self.p is not None:
            raise UsageError(f"method '{self.method}' does not take a p parameter")
        if self.method == "dmas" and not self.apply_filter:
            raise UsageError("dmas output must be band-pass filtered (filtered-DMAS)")

    def label(self) -> str:
        return f"nl_{self.p}" if self.method == "nl" else self.method


@dataclass(frozen=True)
class BeamformedImage:
    """Beamformer output on an image grid, tagged with its processing stage."""

    grid: ImageGrid
    values: np.ndarray
    stage: str

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=np.float64)
        if v.shape != (self.grid.nz, self.grid.nx):
            raise UsageError(
                f"image shape {v.shape} does not match grid ({self.grid.nz}, {self.grid.nx})"
            )
        if self.stage not in STAGES:
            raise UsageError(f"unknown stage '{self.stage}'")
        if not np.all(np.isfinite(v)):
            raise DataError("image contains non-finite values")
        object.__setattr__(self, "values", v)


def signed_root(x, p: int):
    """sign(x) * |x|^(1/p); odd in x, identity for p=1."""
    if int(p) != p or p < 1:
        raise UsageError(f"p must be an integer >= 1, got {p}")
    x = np.asarray(x, dtype=np.float64)
    if p == 1:
        mag = np.abs(x)
    elif p == 2:
        mag = np.sqrt(np.abs(x))
    else:
        mag = np.abs(x) ** (1.0 / p)
    out = np.copysign(mag, x)
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# Kernels. Plain functions compiled on demand; `parallel=True` distributes
# pixels over threads while the per-pixel element loop stays sequential.
# ---------------------------------------------------------------------------

def _das_impl(samples, delays, out):
    npx, num_el = delays.shape
    ns = samples.shape[1]
    for px in prange(npx):
        acc = 0.0
        for i in range(num_el):
            d = delays[px, i]
            if 0 <= d < ns:
                acc += samples[i, d]
        out[px] = acc


def _dmas_impl(samples, delays, out):
    npx, num_el = delays.shape
    ns = samples.shape[1]
    for px in prange(npx):
        xs = np.empty(num_el)
        for i in range(num_el):
            d = delays[px, i]
            xs[i] = samples[i, d] if 0 <= d < ns else 0.0
        acc = 0.0
        for i in range(num_el - 1):
            xi = xs[i]
            for j in range(i + 1, num_el):
                prod = xi * xs[j]
                if prod > 0.0:
                    acc += math.sqrt(prod)
                elif prod < 0.0:
                    acc -= math.sqrt(-prod)
        out[px] = acc


def _nl_impl(samples, delays, p, out):
    npx, num_el = delays.shape
    ns = samples.shape[1]
    inv_p = 1.0 / p
    for px in prange(npx):
        acc = 0.0
        for i in range(num_el):
            d = delays[px, i]
            if 0 <= d < ns:
                x = samples[i, d]
                if p == 1:
                    acc += x
                elif p == 2:
                    if x > 0.0:
                        acc += math.sqrt(x)
                    elif x < 0.0:
                        acc -= math.sqrt(-x)
                else:
                    if x > 0.0:
                        acc += x ** inv_p
                    elif x < 0.0:
                        acc -= (-x) ** inv_p
        m = acc / num_el
        out[px] = m ** p


def _nl2_decomposition_impl(samples, delays, out):
    # Square-root compounding expanded into its self-product and pair-product
    # sums; an independent reference path for the p=2 nonlinear beamformer.
    npx, num_el = delays.shape
    ns = samples.shape[1]
    for px in prange(npx):
        roots = np.empty(num_el)
        for i in range(num_el):
            d = delays[px, i]
            x = samples[i, d] if 0 <= d < ns else 0.0
            if x > 0.0:
                roots[i] = math.sqrt(x)
            elif x < 0.0:
                roots[i] = -math.sqrt(-x)
            else:
                roots[i] = 0.0
        self_term = 0.0
        for i in range(num_el):
            self_term += roots[i] * roots[i]
        pair_term = 0.0
        for i in range(num_el - 1):
            ri = roots[i]
            for j in range(i + 1, num_el):
                pair_term += ri * roots[j]
        m2 = num_el * num_el
        out[px] = self_term / m2 + 2.0 * pair_term / m2


_IMPLS = {
    "das": _das_impl,
    "dmas": _dmas_impl,
    "nl": _nl_impl,
    "nl2dec": _nl2_decomposition_impl,
}


@lru_cache(maxsize=None)
def _kernel(name: str, parallel: bool):
    return njit(cache=True, parallel=parallel)(_IMPLS[name])


def _check_inputs(frame, delays: DelayTable):
    g = delays.geom
    f = frame.geom
    if g.num_elements != f.num_elements:
        raise DataError(
            f"delay table built for {g.num_elements} elements, frame has {f.num_elements}"
        )
    if g.sampling_freq != f.sampling_freq or g.sound_speed != f.sound_speed:
        raise DataError(
            f"delay table geometry (fs={g.sampling_freq}, c={g.sound_speed}) does not "
            f"match frame geometry (fs={f.sampling_freq}, c={f.sound_speed})"
        )
    return np.ascontiguousarray(frame.samples, dtype=np.float64)


def _run(name: str, frame, delays: DelayTable, parallel: bool, extra=()):
    samples = _check_inputs(frame, delays)
    out = np.empty(delays.grid.num_pixels)
    _kernel(name, parallel)(samples, delays.delays, *extra, out)
    values = out.reshape(delays.grid.nz, delays.grid.nx)
    return BeamformedImage(grid=delays.grid, values=values, stage=STAGE_RAW)


def das(frame, delays: DelayTable, parallel: bool = False) -> BeamformedImage:
    """Delay-and-sum: per pixel, the plain sum of delayed channel samples."""
    return _run("das", frame, delays, parallel)


def dmas(frame, delays: DelayTable, parallel: bool = False) -> BeamformedImage:
    """Delay-multiply-and-sum: sum of sign(x_i*x_j)*sqrt|x_i*x_j| over all
    element pairs i < j of the delayed samples."""
    if frame.geom.num_elements < 2:
        raise DataError("dmas needs at least 2 elements (no channel pairs otherwise)")
    return _run("dmas", frame, delays, parallel)


def nl_p(frame, delays: DelayTable, p: int, parallel: bool = False) -> BeamformedImage:
    """p-th-root compounding: the mean of signed p-th roots of the delayed
    samples, raised back to the p-th power.

    For p=1 this is delay-and-sum divided by the element count. For even p the
    raw output is non-negative (polarity is lost), which is why even-p images
    must be band-pass filtered downstream.
    """
    if int(p) != p or p < 1:
        raise UsageError(f"p must be an integer >= 1, got {p}")
    return _run("nl", frame, delays, parallel, extra=(int(p),))


def nl2_decomposition(frame, delays: DelayTable, parallel: bool = False) -> BeamformedImage:
    """Expanded form of nl_p(..., 2): (1/M^2) * sum of squared signed roots
    plus (2/M^2) * sum of pairwise root products.

    Computed along a different path than nl_p, so it serves as an exact
    cross-check of the p=2 beamformer.
    """
    if frame.geom.num_elements < 2:
        raise DataError("decomposition needs at least 2 elements")
    return _run("nl2dec", frame, delays, parallel)
