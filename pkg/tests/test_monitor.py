"""Criterion integrands, time integrals and Gronwall audits."""
import math

import numpy as np
import pytest
from fields import TrigField, fd_jacobian
from hypothesis import given, settings
from hypothesis import strategies as st

from eulerbkm.calculus import curl
from eulerbkm.domains import CompatibleTriplet, DomainSpec, make_slab_triplet
from eulerbkm.errors import ConfigError, DegenerateDirectionError, SeriesError, TripletError
from eulerbkm.grid import VELOCITY_PARITY, VectorField, channel_grid, half_space_grid, torus_grid
from eulerbkm.monitor import (
    CRITERIA,
    CriteriaMonitor,
    CriterionSeries,
    NormReport,
    direction_gradient,
    gronwall_audit,
    gronwall_audit_local,
    growth_exponent,
    integral_bkm,
    integral_cfm,
    integral_conormal,
    integral_mixed,
    integral_ponce,
    integral_tan2,
    measure,
    quadrature_error,
)
from eulerbkm.solver import Snapshot, SolverConfig, init_taylor_green, run

NONE3 = (None, None, None)


def synthetic(times, **cols):
    s = CriterionSeries()
    for i, t in enumerate(times):
        s.append(NormReport(time=t, **{k: v[i] for k, v in cols.items()}))
    return s


def zero_field(g):
    return VectorField(g, np.zeros((3,) + g.shape), VELOCITY_PARITY if g.is_channel else NONE3)


@pytest.fixture(scope="module")
def tg_series():
    mon = CriteriaMonitor()
    run(SolverConfig(n=(16, 16, 16), dt=1e-2, t_end=0.5, output_every=5), [mon])
    return mon.series


def test_zero_field_norms():
    rep = measure(zero_field(torus_grid(8)), with_direction=False)
    vals = [v for k, v in vars(rep).items() if k not in ("time",) and not math.isnan(v)]
    assert all(v == 0.0 for v in vals)


def test_taylor_green_vorticity_max():
    # omega3 = 2 sin x sin y cos z peaks at a grid node when N is a multiple of 4
    rep = measure(init_taylor_green(torus_grid(64)))
    assert rep.linf_omega == pytest.approx(2.0, abs=1e-12)


@pytest.mark.parametrize("seed", range(3))
def test_deformation_matches_nine_term_oracle(seed):
    g = torus_grid(16)
    X = np.stack(g.mesh())
    f = TrigField(seed)
    J = f.jacobian(X)
    oracle = sum(np.max(np.abs(J[j, i] + J[i, j])) for i in range(3) for j in range(3))
    rep = measure(VectorField(g, f(X), NONE3), with_direction=False)
    assert rep.deformation == pytest.approx(oracle, rel=1e-12)


def test_exact_jacobian_of_oracle_field():
    X = np.random.default_rng(0).uniform(0, 6, (3, 20))
    f = TrigField(1)
    np.testing.assert_allclose(f.jacobian(X), fd_jacobian(f, X), atol=1e-6)


def test_constant_integrand_integrates_exactly():
    t = np.linspace(0, 2.0, 7)
    s = synthetic(t, linf_omega=np.full(7, 1.5), w1inf_tan=np.full(7, 3.0))
    assert integral_bkm(s) == pytest.approx(3.0, rel=1e-15)
    assert integral_tan2(s) == pytest.approx(18.0, rel=1e-15)
    assert s.error_estimate("bkm") < 1e-12


def test_single_sample_rejected():
    s = synthetic([0.0], linf_omega=[1.0])
    with pytest.raises(SeriesError):
        integral_bkm(s)
    with pytest.raises(SeriesError):
        s.running("bkm")


def test_time_must_increase():
    s = synthetic([0.0, 1.0], linf_omega=[1.0, 1.0])
    with pytest.raises(SeriesError):
        s.append(NormReport(time=1.0))


def test_disabled_criterion():
    s = CriterionSeries(criteria=("bkm",))
    s.append(NormReport(0.0))
    s.append(NormReport(1.0))
    with pytest.raises(ConfigError):
        integral_ponce(s)


def test_unknown_criterion_and_bad_triplet():
    with pytest.raises(ConfigError):
        CriteriaMonitor(criteria=("bkm", "besov"))
    base = make_slab_triplet(DomainSpec.half_space(), 1.0, 2.0)
    bad = CompatibleTriplet(base.domain, base.omega1, base.omega2,
                            lambda x1, x2, z: base.chi(x1, x2, z) * (1 + 0.1 * np.sin(x1)), base.chi_dz, (1, 2))
    with pytest.raises(TripletError):
        CriteriaMonitor(bad)


def test_quadrature_error_estimate_tracks_true_error():
    t = np.linspace(0, 1, 21)
    f = np.exp(3 * t)
    exact = (math.exp(3) - 1) / 3
    from eulerbkm.monitor import trapezoid
    err = abs(trapezoid(t, f) - exact)
    assert 0.5 * err < quadrature_error(t, f) < 2 * err


def test_uz_field_has_only_zero_order_tangential_term():
    g = torus_grid(16)
    _, _, Z = g.mesh()
    u = VectorField(g, [np.sin(Z), np.cos(2 * Z), 0 * Z], NONE3)
    rep = measure(u, with_direction=False)
    assert rep.w1inf_tan == pytest.approx(1.0, abs=1e-14)
    assert rep.linf_grad_h_u < 1e-13


def test_cfm_constant_direction():
    g = torus_grid(16)
    _, _, Z = g.mesh()
    w = curl(VectorField(g, [np.sin(Z), 0 * Z, 0 * Z], NONE3))
    val, frac = direction_gradient(w)
    assert val < 1e-12
    assert frac < 0.2


def test_cfm_zero_field_degenerate():
    with pytest.raises(DegenerateDirectionError):
        direction_gradient(curl(zero_field(torus_grid(8))))


def test_cfm_matches_fd_oracle():
    # u = (sin z, cos z, eps sin x) has |omega| bounded away from zero
    eps = 0.3
    g = torus_grid(32)
    X = np.stack(g.mesh())
    u = VectorField(g, [np.sin(X[2]), np.cos(X[2]), eps * np.sin(X[0])], NONE3)

    def xi(x):
        w = np.stack([np.sin(x[2]), np.cos(x[2]) - eps * np.cos(x[0]), 0 * x[0]])
        return w / np.sqrt(np.sum(w * w, axis=0))

    oracle = float(np.max(np.abs(fd_jacobian(xi, X, h=1e-3))))
    val, frac = direction_gradient(curl(u))
    assert frac == 0.0
    assert val == pytest.approx(oracle, abs=1e-6)


def test_mixed_disjoint_support():
    g = half_space_grid(8, 8, 81)
    _, Y, Z = g.mesh()
    f = np.maximum(Z - 2.5, 0.0) ** 8
    u = VectorField(g, [f * np.sin(Y), 0 * Z, 0 * Z], NONE3)
    t = make_slab_triplet(g.domain, 1.0, 2.0)
    rep = measure(u, triplet=t, with_direction=False)
    assert rep.w1inf_co_omega1 == 0.0
    assert rep.linf_omega_omega2 == pytest.approx(rep.linf_omega)
    rep0 = measure(zero_field(g), triplet=t, with_direction=False)
    assert rep0.w1inf_co_omega1 == 0.0 and rep0.linf_omega_omega2 == 0.0


def test_conormal_one_dimensional_reduction():
    g = channel_grid(8, 8, 65)
    z = g.coords(2)
    H = g.lengths[2]
    f = np.broadcast_to(np.cos(z), g.shape)
    u = VectorField(g, [f, np.zeros(g.shape), np.zeros(g.shape)], VELOCITY_PARITY)
    phi = np.minimum(z, H - z)
    dphi = np.where(z <= H - z, 1.0, -1.0)
    z1 = np.max(np.abs(phi * np.sin(z)))
    z2 = np.max(np.abs(phi * (-dphi * np.sin(z) - phi * np.cos(z))))
    rep = measure(u, with_direction=False)
    assert rep.w1inf_co == pytest.approx(1.0 + z1, abs=1e-12)
    assert rep.w2inf_co == pytest.approx(1.0 + z1 + z2, abs=1e-11)
    s = synthetic([0.0, 1.0], w1inf_co=[rep.w1inf_co] * 2, w2inf_co=[rep.w2inf_co] * 2)
    assert integral_conormal(s) == pytest.approx((1 + z1) ** 2 + 1 + z1 + z2, abs=1e-10)


def test_running_integrals_nondecreasing(tg_series):
    for name in CRITERIA:
        r = tg_series.running(name)
        assert np.all(np.diff(r) >= 0), name


def test_conormal_dominates_tangential(tg_series):
    assert np.all(tg_series.column("w1inf_co") >= tg_series.column("w1inf_tan"))
    assert np.all(tg_series.column("w2inf_co") >= tg_series.column("w1inf_co"))


def test_mixed_without_triplet_is_conormal_square(tg_series):
    mi = integral_mixed(tg_series)
    assert mi.omega2_part == 0.0
    assert mi.total == pytest.approx(mi.omega1_part, rel=1e-15)
    assert integral_cfm(tg_series) > 0


def test_gronwall_zero_field():
    s = synthetic([0.0, 1.0, 2.0], linf_omega=[0.0] * 3, linf_grad_h_u=[0.0] * 3)
    rep = gronwall_audit(s)
    assert rep.min_margin == 0.0 and rep.passed


def test_gronwall_steady_shear():
    mon = CriteriaMonitor(criteria=("bkm",))
    run(SolverConfig(n=(16, 16, 16), dt=5e-2, t_end=1.0, initial="shear", output_every=4), [mon])
    w = mon.series.column("linf_omega")
    assert np.ptp(w) < 1e-12
    rep = gronwall_audit(mon.series)
    assert rep.min_margin >= 0.0
    assert np.all(np.diff(rep.bound) >= 0)


def test_gronwall_needs_columns():
    s = synthetic([0.0, 1.0], linf_omega=[1.0, 1.0], linf_grad_h_u=[math.nan, 1.0])
    with pytest.raises(ConfigError):
        gronwall_audit(s)
    with pytest.raises(ConfigError):
        gronwall_audit_local(synthetic([0.0, 1.0], linf_omega=[1.0, 1.0]))


def test_local_audit_equals_global_inside_chi_one():
    g = half_space_grid(16, 16, 81)
    _, Y, Z = g.mesh()
    f = np.maximum(0.5 - Z, 0.0) ** 8
    base = np.stack([f * np.sin(Y), 0 * Z, 0 * Z])
    t = make_slab_triplet(g.domain, 1.0, 2.0)
    mon = CriteriaMonitor(t, criteria=("bkm", "mixed"))
    for k, time in enumerate(np.linspace(0, 1, 5)):
        mon.record(Snapshot(time, k, VectorField(g, (1 + time ** 2) * base, NONE3)))
    glob, loc = gronwall_audit(mon.series), gronwall_audit_local(mon.series, t)
    np.testing.assert_allclose(loc.measured, glob.measured, atol=1e-10)
    np.testing.assert_allclose(loc.bound, glob.bound, atol=1e-10)
    assert np.all(np.isfinite(loc.ratio))


def test_growth_exponent_of_exponential():
    t = np.linspace(0, 2, 41)
    fit = growth_exponent(t, np.exp(t))
    assert fit["exponent"] == pytest.approx(1.0, abs=0.01)
    assert math.isnan(growth_exponent(t, np.zeros_like(t))["exponent"])


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(0.0, 10.0), min_size=3, max_size=30), st.floats(0.1, 5.0))
def test_running_integral_property(vals, T):
    t = np.linspace(0, T, len(vals))
    s = synthetic(t, linf_omega=vals)
    r = s.running("bkm")
    assert r[0] == 0.0
    assert np.all(np.diff(r) >= -1e-12)
    assert r[-1] == pytest.approx(s.integral("bkm"))
    assert s.integral("bkm") <= max(vals) * T * (1 + 1e-12)


def test_subsample_keeps_metadata(tg_series):
    sub = tg_series.subsample(2)
    assert len(sub) == (len(tg_series) + 1) // 2
    assert sub.metadata == tg_series.metadata
