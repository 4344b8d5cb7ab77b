"""Normal-derivative identities, explicit constants, stretching split and Hardy quotient."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eulerbkm.calculus import curl
from eulerbkm.domains import DomainSpec
from eulerbkm.errors import ContextError, DomainMismatchError, InadmissibleFieldError, InconsistencyError
from eulerbkm.grid import VELOCITY_PARITY, VectorField, ball_grid, channel_grid, slab_fd_grid, torus_grid
from eulerbkm.identities import (
    C1,
    C2,
    dz_identities,
    flat_stretch_split,
    hardy_quotient,
    vortex_stretch_split,
)
from eulerbkm.solver import init_random_divfree, init_taylor_green

NONE3 = (None, None, None)


def shear(n=32):
    g = torus_grid(n)
    _, _, Z = g.mesh()
    return VectorField(g, [np.sin(Z), 0 * Z, 0 * Z], NONE3)


@pytest.mark.parametrize("grid", [torus_grid(32), channel_grid(32, 32, 33)], ids=["torus", "channel"])
@pytest.mark.parametrize("seed", [0, 7])
def test_identities_on_random_fields(grid, seed):
    rep = dz_identities(init_random_divfree(grid, seed=seed))
    assert rep.max_residual < 1e-10
    assert rep.violations == []


def test_shear_inequality_is_sharp():
    rep = dz_identities(shear())
    dz = rep.checks[1]
    assert dz.lhs == pytest.approx(1.0, abs=1e-12)
    assert dz.rhs == pytest.approx(1.0, abs=1e-12)
    assert dz.slack == pytest.approx(0.0, abs=1e-12)


def test_shear_free_field_has_no_dz():
    g = torus_grid(16)
    X, Y, _ = g.mesh()
    u = VectorField(g, [np.sin(X) * np.cos(Y), -np.cos(X) * np.sin(Y), 0 * X], NONE3)
    rep = dz_identities(u)
    assert rep.checks[1].lhs < 1e-13
    assert rep.max_residual < 1e-12


def test_inconsistent_omega_rejected():
    u = shear(16)
    w = curl(u).data + 1e-3
    with pytest.raises(InconsistencyError):
        dz_identities(u, w)
    assert dz_identities(u, curl(u)).max_residual < 1e-12


def test_identities_need_flat_domain():
    g = ball_grid(10)
    with pytest.raises(ContextError):
        dz_identities(VectorField(g, np.zeros((3,) + g.shape)))


def test_constants():
    assert (C1, C2) == (3.0, 4.0)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2 ** 31), st.floats(-4.0, -1.0))
def test_explicit_constants_never_violated(seed, slope):
    u = init_random_divfree(channel_grid(12, 12, 13), seed=seed, spectrum_slope=slope)
    rep = dz_identities(u)
    assert rep.violations == []
    assert all(c.lhs <= c.rhs * (1 + 1e-12) for c in rep.checks)


@pytest.mark.parametrize("grid", [torus_grid(24), channel_grid(24, 24, 25)], ids=["torus", "channel"])
def test_flat_split_exact(grid):
    sp = flat_stretch_split(init_random_divfree(grid, seed=3))
    assert sp.residual < 1e-10
    assert sp.check.holds


def test_split_for_vertical_vorticity():
    # u = u(x_h), u3 = 0: omega = (0, 0, omega3), stretching vanishes
    g = torus_grid(16)
    X, Y, _ = g.mesh()
    u = VectorField(g, [np.sin(X) * np.cos(Y), -np.cos(X) * np.sin(Y), 0 * X], NONE3)
    sp = vortex_stretch_split(u)
    assert np.max(np.abs(sp.full)) < 1e-12
    assert np.max(np.abs(sp.vertical)) < 1e-12
    assert np.max(np.abs(sp.horizontal)) < 1e-12


def test_unknown_context():
    with pytest.raises(ContextError):
        vortex_stretch_split(shear(8), context="sphere")


def test_taylor_green_split():
    sp = vortex_stretch_split(init_taylor_green(torus_grid(16)))
    assert sp.residual < 1e-12


# -- Hardy quotient -----------------------------------------------------------------

def channel_u3(g, u3):
    zero = np.zeros(g.shape)
    return VectorField(g, [zero, zero, np.broadcast_to(u3, g.shape)], VELOCITY_PARITY)


def test_hardy_sine_limit():
    g = channel_grid(8, 8, 65, lengths=(2 * np.pi, 2 * np.pi, 1.0))
    h = hardy_quotient(channel_u3(g, np.sin(np.pi * g.coords(2))))
    assert h.quotient == pytest.approx(np.pi, abs=1e-6)
    assert h.ratio == pytest.approx(1.0, abs=1e-6)


def test_hardy_parabola_on_fd_slab():
    g = slab_fd_grid(8, 8, 33)
    z = g.coords(2)
    u = VectorField(g, [np.zeros(g.shape)] * 2 + [np.broadcast_to(z * (1 - z), g.shape)], NONE3)
    h = hardy_quotient(u)
    assert h.quotient == pytest.approx(1.0, abs=1e-10)
    assert h.dz_norm == pytest.approx(1.0, abs=1e-10)
    assert h.ratio == pytest.approx(1.0, abs=1e-10)


def test_hardy_zero():
    g = channel_grid(8, 8, 9)
    h = hardy_quotient(channel_u3(g, 0.0))
    assert h.quotient == 0.0 and h.ratio == 0.0


def test_hardy_inadmissible():
    g = slab_fd_grid(8, 8, 17)
    u = VectorField(g, [np.zeros(g.shape)] * 2 + [np.ones(g.shape)], NONE3)
    with pytest.raises(InadmissibleFieldError):
        hardy_quotient(u)


def test_hardy_domain_mismatch():
    g = channel_grid(8, 8, 9)
    with pytest.raises(DomainMismatchError):
        hardy_quotient(channel_u3(g, 0.0), DomainSpec.half_space())


@pytest.mark.parametrize("seed", range(3))
def test_hardy_bounded_by_dz(seed):
    h = hardy_quotient(init_random_divfree(channel_grid(32, 32, 33), seed=seed))
    assert h.ratio <= 1.01
