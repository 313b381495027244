"""Framed binary checkpoints.

Layout (all little-endian)::

    magic      7 bytes  b"DDUET01"
    version    uint16
    system     uint8    1 = zakharov, 2 = kgs
    ndim       uint8
    dims       ndim x uint32
    periods    ndim x float64
    couplings  3 x float64   (alpha, beta, gamma); zakharov stores its sign three times
    time       float64
    seed       int64         -1 when unknown
    payload    4 x prod(dims) x float64: Re u, Im u, n, n_t   (C order)
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import BadMagic, DimsMismatch, SystemMismatch, VersionMismatch
from .kgs import KGSState
from .spectral import Field, WavePair, make_grid
from .zakharov import ZakharovState

MAGIC = b"DDUET01"
VERSION = 1
SYSTEM_TAGS = {"zakharov": 1, "kgs": 2}
SYSTEM_NAMES = {v: k for k, v in SYSTEM_TAGS.items()}

_PREFIX = struct.Struct("<7sHBB")
_FLOAT = np.dtype("<f8")


@dataclass(frozen=True)
class Header:
    version: int
    system: str
    dims: tuple
    periods: tuple
    couplings: tuple
    time: float
    seed: Optional[int]

    def as_dict(self) -> dict:
        return {"version": self.version, "system": self.system, "dims": list(self.dims),
                "periods": list(self.periods), "couplings": list(self.couplings),
                "time": self.time, "seed": self.seed}


def _system_of(state) -> str:
    if isinstance(state, ZakharovState):
        return "zakharov"
    if isinstance(state, KGSState):
        return "kgs"
    raise TypeError(f"cannot checkpoint {type(state).__name__}")


def encode(state, seed: Optional[int] = None) -> bytes:
    system = _system_of(state)
    grid = state.grid
    if system == "zakharov":
        couplings = (state.coupling,) * 3
    else:
        couplings = state.couplings
    parts = [
        _PREFIX.pack(MAGIC, VERSION, SYSTEM_TAGS[system], grid.ndim),
        struct.pack(f"<{grid.ndim}I", *grid.shape),
        struct.pack(f"<{grid.ndim}d", *grid.periods),
        struct.pack("<3d", *couplings),
        struct.pack("<dq", state.time, -1 if seed is None else int(seed)),
    ]
    u = state.u.values
    for array in (u.real, u.imag, state.n.values, state.nt.values):
        parts.append(np.ascontiguousarray(array, dtype=_FLOAT).tobytes())
    return b"".join(parts)


def _take(buffer: bytes, offset: int, fmt: str):
    size = struct.calcsize(fmt)
    if offset + size > len(buffer):
        raise DimsMismatch("checkpoint header is truncated")
    return struct.unpack_from(fmt, buffer, offset), offset + size


def decode_header(buffer: bytes):
    if len(buffer) < _PREFIX.size:
        raise BadMagic("file too short for a checkpoint")
    magic, version, tag, ndim = _PREFIX.unpack_from(buffer, 0)
    if magic != MAGIC:
        raise BadMagic(f"bad magic {magic!r}")
    if version != VERSION:
        raise VersionMismatch(f"checkpoint version {version}, expected {VERSION}")
    if tag not in SYSTEM_NAMES:
        raise SystemMismatch(f"unknown system tag {tag}")
    if ndim < 1:
        raise DimsMismatch("checkpoint has no dimensions")
    offset = _PREFIX.size
    dims, offset = _take(buffer, offset, f"<{ndim}I")
    periods, offset = _take(buffer, offset, f"<{ndim}d")
    couplings, offset = _take(buffer, offset, "<3d")
    (time, seed), offset = _take(buffer, offset, "<dq")
    header = Header(version, SYSTEM_NAMES[tag], tuple(dims), tuple(periods), tuple(couplings),
                    time, None if seed < 0 else seed)
    return header, offset


def decode(buffer: bytes, system: Optional[str] = None):
    header, offset = decode_header(buffer)
    if system is not None and header.system != system:
        raise SystemMismatch(f"checkpoint holds a {header.system} state, expected {system}")
    size = int(np.prod(header.dims))
    expected = offset + 4 * size * _FLOAT.itemsize
    if len(buffer) != expected:
        raise DimsMismatch(f"payload is {len(buffer) - offset} bytes, dims need {expected - offset}")
    try:
        grid = make_grid(header.dims, header.periods)
    except ValueError as exc:
        raise DimsMismatch(str(exc)) from exc
    payload = np.frombuffer(buffer, dtype=_FLOAT, offset=offset).reshape((4,) + grid.shape)
    values = np.empty(grid.shape, dtype=complex)
    values.real = payload[0]
    values.imag = payload[1]
    u = Field(grid, values)
    n, nt = (np.array(a, dtype=float) for a in payload[2:])
    wave = WavePair.from_arrays(grid, n, nt)
    if header.system == "zakharov":
        state = ZakharovState(header.time, u, wave, header.couplings[2])
    else:
        state = KGSState(header.time, u, wave, *header.couplings)
    return header, state


def save_checkpoint(state, path, seed: Optional[int] = None) -> None:
    data = encode(state, seed)
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)


def read_checkpoint(path, system: Optional[str] = None):
    """``(header, state)`` from a checkpoint file."""
    with open(path, "rb") as fh:
        return decode(fh.read(), system)


def load_checkpoint(path, system: Optional[str] = None):
    return read_checkpoint(path, system)[1]


def read_header(path) -> Header:
    with open(path, "rb") as fh:
        return decode_header(fh.read())[0]
