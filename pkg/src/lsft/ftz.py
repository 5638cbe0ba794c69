"""FTZ: a minimal little-endian binary container for one feature matrix.

Layout::

    offset  size  field
    0       4     magic b"FTZ1"
    4       4     channels  (uint32 LE)
    8       4     samples   (uint32 LE)
    12      1     dtype tag (0 = float32 LE, 1 = float64 LE)
    13      ...   channels * samples values, row-major by channel

Any layout change must bump the magic.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"FTZ1"
_HEADER = struct.Struct("<4sIIB")
_DTYPES = {0: np.dtype("<f4"), 1: np.dtype("<f8")}
_TAGS = {"f4": 0, "float32": 0, 32: 0, "f8": 1, "float64": 1, 64: 1}


class FtzError(ValueError):
    pass


def write_ftz(F, path, dtype="f8") -> None:
    """Write ``F`` as FTZ; ``dtype`` is ``"f4"``/``32`` or ``"f8"``/``64``."""
    try:
        tag = _TAGS[dtype]
    except KeyError:
        raise FtzError(f"unsupported dtype {dtype!r}; use f4 or f8") from None
    F = np.asarray(F)
    if F.ndim != 2:
        raise FtzError(f"expected a 2-D feature matrix, got shape {F.shape}")
    C, n = F.shape
    payload = np.ascontiguousarray(F, dtype=_DTYPES[tag])
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, C, n, tag))
        fh.write(payload.tobytes())


def read_ftz(path) -> np.ndarray:
    """Read an FTZ file into a float64 ``(C, n)`` array."""
    raw = Path(path).read_bytes()
    if len(raw) < 4 or raw[:4] != MAGIC:
        raise FtzError(f"{path}: bad magic (not an FTZ1 file)")
    if len(raw) < _HEADER.size:
        raise FtzError(f"{path}: truncated header")
    _, C, n, tag = _HEADER.unpack_from(raw)
    if tag not in _DTYPES:
        raise FtzError(f"{path}: unknown dtype tag {tag}")
    if C < 1 or n < 1:
        raise FtzError(f"{path}: invalid shape ({C}, {n})")
    dt = _DTYPES[tag]
    expected = C * n * dt.itemsize
    got = len(raw) - _HEADER.size
    if got < expected:
        raise FtzError(f"{path}: truncated payload ({got} of {expected} bytes)")
    if got > expected:
        raise FtzError(f"{path}: size mismatch ({got - expected} trailing bytes after payload)")
    data = np.frombuffer(raw, dtype=dt, offset=_HEADER.size).reshape(C, n)
    out = data.astype(np.float64)
    if not np.all(np.isfinite(out)):
        raise FtzError(f"{path}: non-finite values in payload")
    return out
