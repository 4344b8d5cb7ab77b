"""Differential operators and tangential/conormal norms."""
import zlib

import numpy as np
import pytest
from fields import TrigField, fd_curl
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import brute_norm

from eulerbkm.calculus import (
    conormal_derivative,
    curl,
    divergence,
    enstrophy,
    gradient,
    jacobian,
    linf,
    multi_indices,
    norm_terms,
    norm_w_co,
    norm_w_tan,
)
from eulerbkm.errors import PeriodicityError, UnimplementedOrderError, UnsupportedGridError
from eulerbkm.grid import (
    VELOCITY_PARITY,
    ScalarField,
    VectorField,
    ball_grid,
    channel_grid,
    half_space_grid,
    slab_fd_grid,
    torus_grid,
    whole_space_grid,
)
from eulerbkm.solver import init_random_divfree, init_taylor_green

NONE3 = (None, None, None)


def vec(grid, data, parity=NONE3):
    return VectorField(grid, np.asarray(data), parity)


def test_curl_of_sin_z():
    g = torus_grid(32)
    X, Y, Z = g.mesh()
    w = curl(vec(g, [np.sin(Z), 0 * Z, 0 * Z]))
    np.testing.assert_allclose(w.data, [0 * Z, np.cos(Z), 0 * Z], atol=1e-10)


def test_curl_of_constant():
    g = torus_grid(8)
    assert linf(curl(vec(g, np.ones((3,) + g.shape)))) < 1e-15


@pytest.mark.parametrize("seed", range(4))
def test_curl_matches_fd_oracle(seed):
    g = torus_grid(16)
    X = np.stack(g.mesh())
    f = TrigField(seed)
    w = curl(vec(g, f(X)))
    assert np.max(np.abs(w.data - fd_curl(f, X))) < 1e-6


def test_taylor_green_divergence():
    u = init_taylor_green(torus_grid(32))
    assert np.max(np.abs(divergence(u).data)) < 1e-12


def test_nonperiodic_samples_rejected():
    g = torus_grid(16, 1.0)
    X, _, _ = g.mesh()
    with pytest.raises(PeriodicityError):
        gradient(ScalarField(g, X ** 2, None))


def test_gradient_of_sine():
    g = torus_grid(16, 1.0)
    X, _, _ = g.mesh()
    d = gradient(ScalarField(g, np.sin(2 * np.pi * X), None))
    np.testing.assert_allclose(d.data[0], 2 * np.pi * np.cos(2 * np.pi * X), atol=1e-10)
    assert np.max(np.abs(d.data[1:])) < 1e-12


def test_channel_curl_parities():
    u = init_random_divfree(channel_grid(16, 16, 17), seed=2)
    w = curl(u)
    assert w.parity == ("odd", "odd", "even")
    # omega_1, omega_2 are odd about the walls
    assert np.max(np.abs(w.data[:2][..., [0, -1]])) < 1e-12


def test_curl_rejects_ball():
    g = ball_grid(10)
    with pytest.raises(UnsupportedGridError):
        norm_w_co(vec(g, np.zeros((3,) + g.shape)))


def test_norm_of_zero():
    g = torus_grid(8)
    z = vec(g, np.zeros((3,) + g.shape))
    for m in (0, 1, 2):
        assert norm_w_tan(z, m) == 0.0
        assert norm_w_co(z, m, 2) == 0.0


def test_tan_norm_of_sine():
    g = torus_grid(16, 1.0)
    X, _, _ = g.mesh()
    u = vec(g, [np.sin(2 * np.pi * X), 0 * X, 0 * X])
    assert norm_w_tan(u, 1, np.inf) == pytest.approx(1 + 2 * np.pi, rel=1e-12)


def test_conormal_equals_tangential_for_horizontal_fields():
    g = torus_grid(16)
    X, Y, _ = g.mesh()
    u = vec(g, [np.sin(X) * np.cos(Y), np.cos(2 * X), np.sin(Y)])
    for m in (1, 2):
        for p in (2, np.inf):
            assert norm_w_co(u, m, p) == pytest.approx(norm_w_tan(u, m, p), rel=1e-12)


def test_half_space_normal_term_analytic_max():
    g = half_space_grid(8, 8, 401, lengths=(2 * np.pi, 2 * np.pi, 4.0))
    _, _, Z = g.mesh()
    u = vec(g, [Z / (1 + Z), 0 * Z, 0 * Z])
    terms = norm_terms(u, 1, np.inf)
    assert terms[(0, 0, 1)] == pytest.approx(4 / 27, abs=1e-8)  # max of z/(1+z)^3 at z=1/2
    assert norm_w_co(u, 1) == pytest.approx(0.8 + 4 / 27, abs=1e-8)


def test_second_conormal_matches_composition():
    g = half_space_grid(8, 8, 201, lengths=(2 * np.pi, 2 * np.pi, 2.0))
    z = g.coords(2)
    f = np.broadcast_to(np.sin(2 * z), g.shape)
    phi = z / (1 + z)
    # Z3 Z3 sin(2z) = phi d/dz (phi 2 cos 2z)
    exact = phi * (2 * np.cos(2 * z) / (1 + z) ** 2 - 4 * phi * np.sin(2 * z))
    np.testing.assert_allclose(conormal_derivative(f, g, (0, 0, 2))[0, 0], exact, atol=1e-7)


def test_order_above_two_unimplemented():
    g = torus_grid(8)
    with pytest.raises(UnimplementedOrderError):
        norm_w_co(vec(g, np.zeros((3,) + g.shape)), 3)


def test_multi_indices():
    assert len(multi_indices(1)) == 4
    assert len(multi_indices(2)) == 10
    assert len(multi_indices(2, tangential=True)) == 6


ORACLE_GRIDS = {
    "torus": lambda: torus_grid(8),
    "torus-L3": lambda: torus_grid(8, 3.0),
    "channel": lambda: channel_grid(8, 8, 9, lengths=(2 * np.pi, 2 * np.pi, 1.5)),
    "half-space": lambda: half_space_grid(8, 8, 8),
    "whole-space": lambda: whole_space_grid(8, 8, 8),
    "slab-fd": lambda: slab_fd_grid(8, 8, 9),
}


@pytest.mark.parametrize("name", ORACLE_GRIDS)
@pytest.mark.parametrize("m", [0, 1, 2])
@pytest.mark.parametrize("p", [2, np.inf], ids=["p2", "pinf"])
def test_norms_match_brute_force_oracle(name, m, p):
    g = ORACLE_GRIDS[name]()
    rng = np.random.default_rng(zlib.crc32(f"{name}{m}".encode()))
    data = rng.standard_normal((3,) + g.shape)
    parity = VELOCITY_PARITY if g.is_channel else NONE3
    if g.is_channel:
        data[2][..., [0, -1]] = 0.0
    u = vec(g, data, parity)
    desc = (g.kinds, g.shape, g.lengths, g.origins, g.domain.kind, g.domain.z_range)
    for tangential, fn in ((True, norm_w_tan), (False, norm_w_co)):
        ref = brute_norm(list(data), parity, desc, m, p, tangential)
        assert abs(fn(u, m, p) - ref) <= 1e-12 * max(1.0, ref)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 31), st.sampled_from([1, 2]), st.sampled_from([2.0, np.inf]))
def test_tangential_below_conormal(seed, m, p):
    g = channel_grid(8, 8, 9)
    u = init_random_divfree(g, seed=seed)
    assert norm_w_tan(u, m, p) <= norm_w_co(u, m, p)


def test_region_restricted_norm_is_smaller():
    from eulerbkm.domains import ZRegion
    u = init_random_divfree(channel_grid(16, 16, 17), seed=0)
    assert norm_w_co(u, 1, region=ZRegion(((0.0, 1.0),))) <= norm_w_co(u, 1)


def test_jacobian_and_enstrophy_of_shear():
    g = torus_grid(16)
    _, _, Z = g.mesh()
    u = vec(g, [np.sin(Z), 0 * Z, 0 * Z])
    J = jacobian(u)
    np.testing.assert_allclose(J[0, 2], np.cos(Z), atol=1e-12)
    # 0.5 * int cos^2 z over the 2 pi torus
    assert enstrophy(curl(u)) == pytest.approx(0.5 * (2 * np.pi) ** 3 / 2, rel=1e-12)
