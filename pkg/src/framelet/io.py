"""File formats: binary grids, PGM images, key=value manifests, CSV reports.

Binary grid layout (``.frmg``, little-endian)::

    "FRMG"                       4 bytes
    version                      u32, always 1
    dtype                        u8, 0 = float64, 1 = complex128 (re, im interleaved)
    ndim                         u8
    per axis: count u32, origin f64, step f64
    payload                      row-major values
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .errors import FormatError
from .grid import ConditionReport, FrequencyGrid

MAGIC = b"FRMG"
VERSION = 1
_HEADER = struct.Struct("<4sIBB")
_AXIS = struct.Struct("<Idd")
REPORT_HEADER = "condition_id,max_residual,mean_residual,points,tolerance,passed"


def encode_grid(values, grid: FrequencyGrid | None = None) -> bytes:
    """Serialize ``values`` (real or complex) sampled on ``grid``.

    Without a grid the axes get origin 0 and step 1.
    """
    a = np.asarray(values)
    complex_ = np.iscomplexobj(a)
    a = np.ascontiguousarray(a, dtype="<c16" if complex_ else "<f8")
    if grid is None:
        origin, step = (0.0,) * a.ndim, (1.0,) * a.ndim
    else:
        if tuple(grid.count) != a.shape:
            raise FormatError(f"values of shape {a.shape} do not match grid {grid.count}")
        origin, step = grid.origin, grid.step
    parts = [_HEADER.pack(MAGIC, VERSION, int(complex_), a.ndim)]
    parts += [_AXIS.pack(c, float(o), float(s)) for c, o, s in zip(a.shape, origin, step)]
    parts.append(a.tobytes(order="C"))
    return b"".join(parts)


def decode_grid(data: bytes) -> tuple:
    """Inverse of :func:`encode_grid`; returns ``(values, grid)``.

    ``grid`` is ``None`` for arrays with an axis of fewer than 2 points.

    Raises
    ------
    FormatError
    """
    if len(data) < _HEADER.size:
        raise FormatError("truncated header")
    magic, version, dtype, ndim = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"unsupported version {version}")
    if dtype not in (0, 1):
        raise FormatError(f"unknown dtype code {dtype}")
    off = _HEADER.size
    if len(data) < off + ndim * _AXIS.size:
        raise FormatError("truncated axis table")
    axes = [_AXIS.unpack_from(data, off + i * _AXIS.size) for i in range(ndim)]
    off += ndim * _AXIS.size
    shape = tuple(a[0] for a in axes)
    dt = np.dtype("<c16" if dtype else "<f8")
    size = int(np.prod(shape)) * dt.itemsize
    if len(data) != off + size:
        raise FormatError(f"payload has {len(data) - off} bytes, expected {size}")
    values = np.frombuffer(data, dtype=dt, offset=off).reshape(shape).copy()
    grid = None
    if ndim and all(c >= 2 for c in shape) and all(a[2] > 0 for a in axes):
        grid = FrequencyGrid(tuple(a[1] for a in axes), tuple(a[2] for a in axes), shape)
    return values, grid


def write_grid(path, values, grid: FrequencyGrid | None = None) -> None:
    _write_bytes(path, encode_grid(values, grid))


def read_grid(path) -> tuple:
    return decode_grid(_read_bytes(path))


def _write_bytes(path, data: bytes) -> None:
    try:
        Path(path).write_bytes(data)
    except OSError as exc:
        raise FormatError(f"cannot write {path}: {exc}") from exc


def _read_bytes(path) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc


# ---------------------------------------------------------------- PGM

def _pgm_tokens(data: bytes):
    """Yield whitespace-separated header tokens, skipping comments, and
    the offset just past each token."""
    i, n = 0, len(data)
    while i < n:
        c = data[i:i + 1]
        if c == b"#":
            while i < n and data[i:i + 1] not in (b"\n", b"\r"):
                i += 1
        elif c.isspace():
            i += 1
        else:
            j = i
            while j < n and not data[j:j + 1].isspace() and data[j:j + 1] != b"#":
                j += 1
            yield data[i:j], j
            i = j


def decode_pgm(data: bytes) -> np.ndarray:
    """Read a binary (P5) or plain (P2) PGM into a float array.

    Raises
    ------
    FormatError
    """
    toks = _pgm_tokens(data)
    try:
        magic, _ = next(toks)
        w, h, maxval = (int(next(toks)[0]) for _ in range(3))
    except (StopIteration, ValueError) as exc:
        raise FormatError("malformed PGM header") from exc
    if w <= 0 or h <= 0 or not 0 < maxval < 65536:
        raise FormatError("invalid PGM dimensions")
    if magic == b"P2":
        try:
            vals = [int(t) for t, _ in toks]
        except ValueError as exc:
            raise FormatError("non-integer PGM sample") from exc
        if len(vals) != w * h:
            raise FormatError(f"PGM has {len(vals)} samples, expected {w * h}")
        return np.asarray(vals, dtype=float).reshape(h, w)
    if magic != b"P5":
        raise FormatError(f"unsupported PGM magic {magic!r}")
    # the header ends one whitespace byte after maxval
    toks2 = _pgm_tokens(data)
    for _ in range(4):
        _, end = next(toks2)
    start = end + 1
    dt = np.dtype(">u2" if maxval > 255 else "u1")
    size = w * h * dt.itemsize
    if len(data) < start + size:
        raise FormatError("truncated PGM payload")
    return np.frombuffer(data, dtype=dt, count=w * h, offset=start).reshape(h, w).astype(float)


def encode_pgm(values) -> bytes:
    """8-bit binary PGM of ``|values|`` scaled so the maximum maps to 255."""
    a = np.abs(np.asarray(values))
    if a.ndim != 2:
        raise FormatError("PGM export needs a 2D array")
    peak = float(a.max()) if a.size else 0.0
    scaled = np.zeros(a.shape) if peak == 0.0 else a * (255.0 / peak)
    img = np.clip(np.rint(scaled), 0, 255).astype(np.uint8)
    h, w = img.shape
    return f"P5\n{w} {h}\n255\n".encode() + img.tobytes()


def read_pgm(path) -> np.ndarray:
    return decode_pgm(_read_bytes(path))


def write_pgm(path, values) -> None:
    _write_bytes(path, encode_pgm(values))


# ---------------------------------------------------------------- manifests

def parse_manifest(text: str, allowed: Iterable[str] | None = None) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment.

    Raises
    ------
    FormatError
        On malformed lines, duplicate keys, or keys outside ``allowed``.
    """
    allowed = None if allowed is None else set(allowed)
    out = {}
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise FormatError(f"line {no}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise FormatError(f"line {no}: empty key")
        if allowed is not None and key not in allowed:
            raise FormatError(f"line {no}: unknown key {key!r}")
        if key in out:
            raise FormatError(f"line {no}: duplicate key {key!r}")
        out[key] = value
    return out


def format_manifest(entries: Mapping[str, object]) -> str:
    """One ``key=value`` line per entry in sorted key order."""
    return "".join(f"{k}={entries[k]}\n" for k in sorted(entries))


def read_manifest(path, allowed: Iterable[str] | None = None) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    return parse_manifest(text, allowed)


def write_manifest(path, entries: Mapping[str, object]) -> None:
    _write_bytes(path, format_manifest(entries).encode())


# ---------------------------------------------------------------- reports

def format_report(reports: Iterable[ConditionReport]) -> str:
    return REPORT_HEADER + "\n" + "".join(r.csv_row() + "\n" for r in reports)


def write_report(path, reports: Iterable[ConditionReport]) -> None:
    _write_bytes(path, format_report(reports).encode())
