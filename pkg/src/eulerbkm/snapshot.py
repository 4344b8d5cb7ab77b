"""EULB binary field snapshots.

Layout (all little-endian)::

    magic       4 bytes  b"EULB"
    version     u16      1
    dims        3 x u32
    domain      u8       index into domains.KINDS
    axes        3 x (u8 kind, f64 origin, f64 length)   kind: 0 periodic, 1 parity, 2 fd
    time        f64
    step        u64
    ncomp       u16
    parities    ncomp x u8                              0 none, 1 even, 2 odd
    data        ncomp x n1*n2*n3 f64, x1 fastest
    checksum    u64      FNV-1a 64 of every preceding byte
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .domains import KINDS, DomainSpec
from .errors import SnapshotError
from .grid import AXIS_KINDS, Grid3, ScalarField, VectorField

MAGIC = b"EULB"
VERSION = 1
_PARITY_CODES = {None: 0, "even": 1, "odd": 2}
_PARITY_NAMES = {v: k for k, v in _PARITY_CODES.items()}
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


_KERNEL = None


def _kernel():
    global _KERNEL
    if _KERNEL is None:
        from numba import njit

        @njit(nogil=True)
        def fnv(buf, h, prime):
            for b in buf:
                h = (h ^ np.uint64(b)) * prime
            return h

        _KERNEL = fnv
    return _KERNEL


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a hash of ``data``."""
    buf = np.frombuffer(bytes(data), dtype=np.uint8)
    if len(buf) < 4096:
        h = _FNV_OFFSET
        for b in buf.tobytes():
            h = ((h ^ b) * _FNV_PRIME) & _MASK64
        return h
    return int(_kernel()(buf, np.uint64(_FNV_OFFSET), np.uint64(_FNV_PRIME)))


def file_checksum(path) -> str:
    return f"{fnv1a64(Path(path).read_bytes()):016x}"


def domain_for(kind: str, lengths) -> DomainSpec:
    L1, L2, L3 = lengths
    if kind == "torus3":
        return DomainSpec.torus((L1, L2, L3))
    if kind == "slab-channel-periodic":
        return DomainSpec.slab_periodic(L1, L2, L3)
    if kind == "slab-channel-infinite":
        return DomainSpec.slab_infinite(L3)
    if kind == "half-space":
        return DomainSpec.half_space()
    if kind == "whole-space":
        return DomainSpec.whole_space()
    if kind == "ball":
        return DomainSpec.ball()
    raise SnapshotError(f"unknown domain kind {kind!r}")


def encode(field, time=0.0, step=0) -> bytes:
    grid = field.grid
    if isinstance(field, VectorField):
        data, parities = field.data, list(field.parity)
    elif isinstance(field, ScalarField):
        data, parities = field.data[None], [field.parity]
    else:
        raise TypeError("expected a ScalarField or VectorField")
    parts = [MAGIC, struct.pack("<H3IB", VERSION, *grid.shape, KINDS.index(grid.domain.kind))]
    for a in range(3):
        parts.append(struct.pack("<Bdd", AXIS_KINDS.index(grid.kinds[a]),
                                 grid.origins[a], grid.lengths[a]))
    parts.append(struct.pack("<dQH", float(time), int(step), len(parities)))
    parts.append(bytes(_PARITY_CODES[p] for p in parities))
    for comp in data:
        parts.append(np.asarray(comp, dtype="<f8").tobytes(order="F"))
    body = b"".join(parts)
    return body + struct.pack("<Q", fnv1a64(body))


def write_snapshot(path, field, time=0.0, step=0):
    path = Path(path)
    try:
        path.write_bytes(encode(field, time, step))
    except OSError as exc:
        raise SnapshotError(f"{path}: cannot write snapshot ({exc.strerror})") from exc
    return path


def decode(buf: bytes, name="<bytes>"):
    """Parse EULB bytes; returns (field, time, step)."""
    if len(buf) < 4 or buf[:4] != MAGIC:
        raise SnapshotError(f"{name}: bad magic bytes")
    if len(buf) < 8 + 4:
        raise SnapshotError(f"{name}: truncated header")
    body, (stored,) = buf[:-8], struct.unpack("<Q", buf[-8:])
    if fnv1a64(body) != stored:
        raise SnapshotError(f"{name}: checksum mismatch")
    try:
        off = 4
        version, n1, n2, n3, dcode = struct.unpack_from("<H3IB", buf, off)
        off += struct.calcsize("<H3IB")
        if version != VERSION:
            raise SnapshotError(f"{name}: unsupported version {version}")
        kinds, origins, lengths = [], [], []
        for _ in range(3):
            k, o, L = struct.unpack_from("<Bdd", buf, off)
            off += struct.calcsize("<Bdd")
            kinds.append(AXIS_KINDS[k])
            origins.append(o)
            lengths.append(L)
        time, step, ncomp = struct.unpack_from("<dQH", buf, off)
        off += struct.calcsize("<dQH")
        parities = [_PARITY_NAMES[c] for c in buf[off:off + ncomp]]
        off += ncomp
        count = n1 * n2 * n3
        if len(body) - off != 8 * count * ncomp:
            raise SnapshotError(f"{name}: payload size does not match the header")
        arr = np.frombuffer(body, dtype="<f8", count=count * ncomp, offset=off)
        data = arr.reshape((ncomp, n3, n2, n1)).transpose(0, 3, 2, 1).astype(float)
        grid = Grid3((n1, n2, n3), tuple(lengths), domain_for(KINDS[dcode], lengths),
                     tuple(kinds), tuple(origins))
    except (struct.error, IndexError, KeyError, ValueError) as exc:
        if isinstance(exc, SnapshotError):
            raise
        raise SnapshotError(f"{name}: malformed header ({exc})") from exc
    if ncomp == 3:
        fld = VectorField(grid, data, tuple(parities))
    elif ncomp == 1:
        fld = ScalarField(grid, data[0], parities[0])
    else:
        raise SnapshotError(f"{name}: unsupported component count {ncomp}")
    return fld, time, step


def read_snapshot(path):
    path = Path(path)
    try:
        buf = path.read_bytes()
    except OSError as exc:
        raise SnapshotError(f"{path}: cannot read snapshot ({exc.strerror})") from exc
    return decode(buf, str(path))
