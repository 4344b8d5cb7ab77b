"""EULB snapshot encoding."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eulerbkm.errors import SnapshotError
from eulerbkm.grid import ScalarField, VectorField, channel_grid, half_space_grid, torus_grid
from eulerbkm.snapshot import decode, encode, fnv1a64, read_snapshot, write_snapshot
from eulerbkm.solver import init_random_divfree


def fnv_reference(data):
    h = 0xCBF29CE484222325
    for byte in data:
        h = ((h ^ byte) * 0x100000001B3) % 2 ** 64
    return h


@pytest.mark.parametrize("data, expected", [
    (b"", 0xCBF29CE484222325),
    (b"a", 0xAF63DC4C8601EC8C),
    (b"foobar", 0x85944171F73967E8),
])
def test_fnv_known_values(data, expected):
    assert fnv1a64(data) == expected


@settings(max_examples=30, deadline=None)
@given(st.binary(max_size=300))
def test_fnv_matches_reference(data):
    assert fnv1a64(data) == fnv_reference(data)


@pytest.mark.parametrize("grid", [torus_grid(8, 3.0), channel_grid(8, 10, 9), half_space_grid(8, 8, 12)],
                         ids=["torus", "channel", "half-space"])
def test_roundtrip_bit_exact(tmp_path, grid):
    rng = np.random.default_rng(0)
    parity = ("even", "even", "odd") if grid.is_channel else (None, None, None)
    u = VectorField(grid, rng.standard_normal((3,) + grid.shape), parity)
    path = write_snapshot(tmp_path / "a.eulb", u, 0.125, 17)
    v, t, step = read_snapshot(path)
    assert (t, step) == (0.125, 17)
    assert np.array_equal(v.data, u.data)
    assert v.parity == u.parity
    assert v.grid.shape == grid.shape and v.grid.kinds == grid.kinds
    assert v.grid.lengths == grid.lengths and v.grid.origins == grid.origins
    assert v.grid.domain.kind == grid.domain.kind
    assert encode(v, t, step) == path.read_bytes()


def test_scalar_roundtrip():
    g = torus_grid(8)
    f = ScalarField(g, np.arange(512.0).reshape(g.shape))
    h, _, _ = decode(encode(f))
    assert isinstance(h, ScalarField) and np.array_equal(h.data, f.data)


def test_encoding_deterministic():
    u = init_random_divfree(torus_grid(8), seed=3)
    assert encode(u, 1.0, 2) == encode(u, 1.0, 2)


def test_corrupt_magic():
    buf = bytearray(encode(init_random_divfree(torus_grid(8))))
    buf[0:4] = b"XXXX"
    with pytest.raises(SnapshotError, match="magic"):
        decode(bytes(buf))


def test_corrupt_payload(tmp_path):
    buf = bytearray(encode(init_random_divfree(torus_grid(8))))
    buf[200] ^= 0x01
    path = tmp_path / "bad.eulb"
    path.write_bytes(bytes(buf))
    with pytest.raises(SnapshotError, match="checksum") as info:
        read_snapshot(path)
    assert "bad.eulb" in str(info.value)


def test_truncated_and_missing(tmp_path):
    with pytest.raises(SnapshotError):
        decode(encode(init_random_divfree(torus_grid(8)))[:-20])
    with pytest.raises(SnapshotError):
        read_snapshot(tmp_path / "nope.eulb")
