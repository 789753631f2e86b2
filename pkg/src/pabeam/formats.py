"""Bit-exact file formats: PARF frames, PAIM images, PGM renders, CSV tables.

PARF (little-endian): magic "PARF", u32 version=1, u32 M, u32 Ns, f64 fs_hz,
f64 c_mps, f64 pitch_m, f64 first_element_x_m, then M*Ns float32 samples,
channel-major.

PAIM (little-endian): magic "PAIM", u32 version=1, u32 nx, u32 nz, f64 x0_m,
f64 z0_m, f64 dx_m, f64 dz_m, u8 stage tag, then nx*nz float32 values stored
column-major (each lateral column's axial samples contiguous).
"""

import io
import struct

import numpy as np

from .errors import DataError
from .beamcore import BeamformedImage, STAGES
from .geometry import ImageGrid

PARF_MAGIC = b"PARF"
PAIM_MAGIC = b"PAIM"
_PARF_HEADER = struct.Struct("<4sIIIdddd")
_PAIM_HEADER = struct.Struct("<4sIIIddddB")

_STAGE_TAGS = {name: tag for tag, name in enumerate(STAGES)}
_TAG_STAGES = {tag: name for name, tag in _STAGE_TAGS.items()}


def write_parf(frame) -> bytes:
    g = frame.geom
    header = _PARF_HEADER.pack(
        PARF_MAGIC, 1, g.num_elements, frame.num_samples,
        g.sampling_freq, g.sound_speed, g.pitch, float(g.element_x[0]),
    )
    payload = np.ascontiguousarray(frame.samples, dtype="<f4").tobytes()
    return header + payload


def read_parf(data: bytes):
    """Return (header dict, float32 samples of shape (M, Ns))."""
    if len(data) < _PARF_HEADER.size:
        raise DataError("truncated PARF data")
    magic, version, m, ns, fs, c, pitch, x0 = _PARF_HEADER.unpack_from(data)
    if magic != PARF_MAGIC:
        raise DataError(f"bad PARF magic {magic!r}")
    if version != 1:
        raise DataError(f"unsupported PARF version {version}")
    expected = _PARF_HEADER.size + 4 * m * ns
    if len(data) != expected:
        raise DataError(f"PARF payload has {len(data)} bytes, expected {expected}")
    samples = np.frombuffer(data, dtype="<f4", offset=_PARF_HEADER.size).reshape(m, ns)
    header = {"num_elements": m, "num_samples": ns, "sampling_freq": fs,
              "sound_speed": c, "pitch": pitch, "first_element_x": x0}
    return header, samples


def write_paim(image: BeamformedImage) -> bytes:
    g = image.grid
    header = _PAIM_HEADER.pack(
        PAIM_MAGIC, 1, g.nx, g.nz,
        g.x_min, g.z_min, g.dx, g.dz, _STAGE_TAGS[image.stage],
    )
    payload = np.asarray(image.values, dtype="<f4").tobytes(order="F")
    return header + payload


def read_paim(data: bytes) -> BeamformedImage:
    if len(data) < _PAIM_HEADER.size:
        raise DataError("truncated PAIM data")
    magic, version, nx, nz, x0, z0, dx, dz, tag = _PAIM_HEADER.unpack_from(data)
    if magic != PAIM_MAGIC:
        raise DataError(f"bad PAIM magic {magic!r}")
    if version != 1:
        raise DataError(f"unsupported PAIM version {version}")
    if tag not in _TAG_STAGES:
        raise DataError(f"unknown PAIM stage tag {tag}")
    expected = _PAIM_HEADER.size + 4 * nx * nz
    if len(data) != expected:
        raise DataError(f"PAIM payload has {len(data)} bytes, expected {expected}")
    values = np.frombuffer(data, dtype="<f4", offset=_PAIM_HEADER.size)
    values = values.reshape(nx, nz).T.astype(np.float64)
    grid = ImageGrid(
        x_min=x0, x_max=x0 + (nx - 1) * dx if nx > 1 else x0,
        z_min=z0, z_max=z0 + nz * dz,
        nx=nx, nz=nz, dx=dx, dz=dz, time_aligned=False,
    )
    return BeamformedImage(grid=grid, values=values, stage=_TAG_STAGES[tag])


def write_pgm(image: BeamformedImage, dynamic_range_db: float) -> bytes:
    """8-bit binary PGM of a log-compressed image; [-DR, 0] dB maps linearly
    onto [0, 255]."""
    if image.stage != "log_compressed":
        raise DataError(f"PGM rendering expects a log-compressed image, got '{image.stage}'")
    v = np.clip(image.values, -dynamic_range_db, 0.0)
    pix = np.rint((v + dynamic_range_db) / dynamic_range_db * 255.0)
    pix = np.clip(pix, 0, 255).astype(np.uint8)
    buf = io.BytesIO()
    buf.write(f"P5\n{image.grid.nx} {image.grid.nz}\n255\n".encode("ascii"))
    buf.write(pix.tobytes(order="C"))
    return buf.getvalue()


def format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{value:.6f}"


def csv_text(header, rows) -> str:
    """CSV with '.' decimals, ',' separators, a header row, LF line endings."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_cell(cell) for cell in row))
    return "\n".join(lines) + "\n"
