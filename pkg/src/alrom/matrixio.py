"""Binary matrix persistence: magic "ALRM", version, shape, column-major f64.

Header layout (little endian): 4 magic bytes, u32 format version, u64 rows,
u64 cols, followed by rows*cols float64 payload in column-major order.
Round-trips are bit exact.
"""

import struct
from pathlib import Path

import numpy as np

MAGIC = b"ALRM"
VERSION = 1
_HEADER = struct.Struct("<4sIQQ")


class CorruptFileError(RuntimeError):
    """Magic, version, or payload-length mismatch."""


def write_matrix(path, array: np.ndarray) -> None:
    array = np.asarray(array, dtype=np.float64)
    if array.ndim == 1:
        array = array[:, None]
    if array.ndim != 2:
        raise ValueError("only 1-d or 2-d arrays are supported")
    rows, cols = array.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, rows, cols))
        fh.write(np.asfortranarray(array).tobytes(order="F"))


def read_matrix(path) -> np.ndarray:
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < _HEADER.size:
        raise CorruptFileError(f"{path}: truncated header")
    magic, version, rows, cols = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise CorruptFileError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise CorruptFileError(f"{path}: unsupported version {version}")
    expected = _HEADER.size + rows * cols * 8
    if len(raw) != expected:
        raise CorruptFileError(
            f"{path}: payload length {len(raw) - _HEADER.size} != {rows * cols * 8}"
        )
    flat = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
    return flat.reshape((rows, cols), order="F").copy()
