"""LVCF: the bit-exact binary matrix file format used by every tool here.

Layout (little-endian throughout):

    bytes 0-3    magic ``LVCF``
    byte  4      format version, currently 1
    byte  5      dtype code, 1 = IEEE-754 binary32
    bytes 6-7    reserved, must be zero
    bytes 8-15   rows, unsigned 64-bit
    bytes 16-23  cols, unsigned 64-bit
    bytes 24-    rows*cols float32 values, row-major

Total size is ``24 + 4*rows*cols`` bytes. Values are stored in 32-bit
precision; matrices are returned as float64 (the widening is exact), and
writing casts to float32.
"""

from __future__ import annotations

import os
import struct
import tempfile

import numpy as np

from .validation import check_matrix

MAGIC = b"LVCF"
VERSION = 1
DTYPE_F32 = 1
HEADER_SIZE = 24
_HEADER = struct.Struct("<4sBBHQQ")


class LvcfError(ValueError):
    """Base class for LVCF decode failures."""


class LvcfFormatError(LvcfError):
    """Malformed header or payload; ``offset`` is the offending byte position."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


class LvcfLengthError(LvcfError):
    """Payload shorter or longer than the header declares."""

    def __init__(self, expected: int, actual: int):
        super().__init__(
            f"payload length mismatch: expected {expected} bytes, got {actual}"
        )
        self.expected = expected
        self.actual = actual


def decode_matrix(raw: bytes) -> np.ndarray:
    """Decode an in-memory LVCF byte string into a float64 matrix."""
    if len(raw) < HEADER_SIZE:
        raise LvcfLengthError(HEADER_SIZE, len(raw))
    magic, version, dtype, reserved, rows, cols = _HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise LvcfFormatError(f"bad magic {magic!r}, expected {MAGIC!r}", offset=0)
    if version != VERSION:
        raise LvcfFormatError(f"unsupported version {version}", offset=4)
    if dtype != DTYPE_F32:
        raise LvcfFormatError(f"unsupported dtype code {dtype}", offset=5)
    if reserved != 0:
        raise LvcfFormatError("reserved header bytes must be zero", offset=6)
    if rows < 1 or cols < 1:
        raise LvcfFormatError(f"rows and cols must be >= 1, got {rows}x{cols}", offset=8)
    expected = rows * cols * 4
    actual = len(raw) - HEADER_SIZE
    if actual != expected:
        raise LvcfLengthError(expected, actual)
    values = np.frombuffer(raw, dtype="<f4", count=rows * cols, offset=HEADER_SIZE)
    finite = np.isfinite(values)
    if not finite.all():
        first_bad = int(np.flatnonzero(~finite)[0])
        raise LvcfFormatError(
            f"non-finite value at element {first_bad}",
            offset=HEADER_SIZE + 4 * first_bad,
        )
    return values.reshape(rows, cols).astype(np.float64)


def encode_matrix(m) -> bytes:
    """Encode a matrix as LVCF bytes (values cast to float32)."""
    arr = check_matrix(m)
    payload = np.ascontiguousarray(arr, dtype="<f4")
    rows, cols = arr.shape
    header = _HEADER.pack(MAGIC, VERSION, DTYPE_F32, 0, rows, cols)
    return header + payload.tobytes()


def read_matrix(path) -> np.ndarray:
    """Read an LVCF file; raises LvcfFormatError/LvcfLengthError on corruption."""
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        return decode_matrix(raw)
    except LvcfError as exc:
        exc.args = (f"{path}: {exc.args[0]}",)
        raise


def write_matrix(m, path) -> None:
    """Write a matrix as LVCF, atomically (temp file + rename)."""
    raw = encode_matrix(m)
    atomic_write_bytes(raw, path)


def atomic_write_bytes(raw: bytes, path) -> None:
    directory = os.path.dirname(os.fspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(raw)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
