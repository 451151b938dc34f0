"""Signal files: a 16-byte header followed by little-endian float64 samples.

Header layout (little-endian)::

    offset  size  field
    0       4     magic b"RPUP"
    4       2     format version (1)
    6       2     reserved, 0
    8       4     element count
    12      4     block size M (0 if the payload is not blocked)
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAGIC = b"RPUP"
VERSION = 1
_HEADER = struct.Struct("<4sHHII")


class SignalFormatError(ValueError):
    """The file is not a valid signal file."""


@dataclass
class SignalFile:
    samples: np.ndarray
    block_size: int = 0

    def __post_init__(self):
        self.samples = np.ascontiguousarray(self.samples, dtype="<f8").ravel()
        if self.block_size < 0:
            raise SignalFormatError("block size must be non-negative")

    @property
    def count(self) -> int:
        return self.samples.size

    def blocks(self, M: int | None = None) -> np.ndarray:
        """Payload reshaped to (count / M, M); M defaults to the header's block size."""
        M = M or self.block_size
        if not M:
            raise SignalFormatError("file has no block size; pass M explicitly")
        if self.count % M:
            raise SignalFormatError(f"element count {self.count} is not a multiple of block size {M}")
        return self.samples.reshape(-1, M)

    def to_bytes(self) -> bytes:
        return _HEADER.pack(MAGIC, VERSION, 0, self.count, self.block_size) + self.samples.tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "SignalFile":
        if len(data) < _HEADER.size:
            raise SignalFormatError("file shorter than the 16-byte header")
        magic, version, _, count, block = _HEADER.unpack_from(data)
        if magic != MAGIC:
            raise SignalFormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
        if version != VERSION:
            raise SignalFormatError(f"unsupported format version {version}")
        payload = data[_HEADER.size:]
        if len(payload) != 8 * count:
            raise SignalFormatError(
                f"header declares {count} samples but payload holds {len(payload) / 8:g}"
            )
        if block and count % block:
            raise SignalFormatError(f"element count {count} is not a multiple of block size {block}")
        return cls(np.frombuffer(payload, dtype="<f8").astype(np.float64), block)


def write_signal(path, samples, block_size: int = 0) -> None:
    Path(path).write_bytes(SignalFile(samples, block_size).to_bytes())


def read_signal(path) -> SignalFile:
    return SignalFile.from_bytes(Path(path).read_bytes())
