"""Criterion integrands, running integrals and Gronwall audits along trajectories.

Six criteria are tracked, each as an integrand sampled at the output
cadence and integrated with the trapezoid rule:

========== ==============================================================
bkm        ``||omega||_inf``
ponce      ``sum_{i,j} ||d_i u_j + d_j u_i||_inf``
cfm        ``(1 + ||u||_inf) ||grad(omega / |omega|)||_inf``
tan2       ``||u||^2_{W^{1,inf}_tan}``
mixed      ``||u||^2_{W^{1,inf}_co(Omega_1)} + ||omega||_{L^inf(Omega_2)}``
conormal   ``||u||^2_{W^{1,inf}_co} + ||u||_{W^{2,inf}_co}``
========== ==============================================================

``tan2_h`` (``||grad_h u||^2_inf``) is carried as an extra column. Without a
triplet the mixed criterion uses ``Omega_1 = Omega`` and an empty
``Omega_2``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .calculus import (
    conormal_arrays,
    curl,
    deformation_sum,
    energy,
    enstrophy,
    helicity,
    jacobian,
    linf_array,
    norm_from_terms,
    region_mask,
    terms_from_arrays,
)
from .domains import CompatibleTriplet, validate_triplet
from .errors import ConfigError, DegenerateDirectionError, SeriesError, TripletError
from .grid import VectorField, deriv
from .identities import C1, C2

CRITERIA = ("bkm", "ponce", "cfm", "tan2", "mixed", "conormal")
EXTRA_INTEGRANDS = ("tan2_h",)
EPS_DIR = 1e-6
_EPS = np.finfo(float).eps


@dataclass
class NormReport:
    """Norms of one snapshot. Regional entries are NaN when no triplet is set."""

    time: float
    linf_u: float = 0.0
    linf_omega: float = 0.0
    linf_grad_h_u: float = 0.0
    linf_grad_u: float = 0.0
    w1inf_tan: float = 0.0
    w1inf_co: float = 0.0
    w2inf_co: float = 0.0
    deformation: float = 0.0
    grad_direction: float = 0.0
    direction_mask_fraction: float = 0.0
    energy: float = 0.0
    enstrophy: float = 0.0
    helicity: float = 0.0
    w1inf_co_omega1: float = math.nan
    linf_omega_omega1: float = math.nan
    linf_omega_omega2: float = math.nan
    linf_grad_h_omega1: float = math.nan
    linf_chi_omega: float = math.nan
    chi_advection: float = math.nan


NORM_COLUMNS = tuple(f.name for f in fields(NormReport))


def direction_gradient(omega: VectorField, eps_dir=EPS_DIR):
    """``max |d_j (omega_i / |omega|)|`` over nodes with ``|omega| >= eps_dir * max|omega|``.

    Uses ``d_j xi = (d_j omega - xi (xi . d_j omega)) / |omega|``.
    Returns (value, masked-out fraction).
    """
    w = omega.data
    mag = np.sqrt(np.sum(w * w, axis=0))
    top = float(np.max(mag))
    if top == 0.0 or not np.isfinite(top):
        raise DegenerateDirectionError("vorticity vanishes everywhere; direction undefined")
    mask = mag >= eps_dir * top
    xi = w / np.where(mask, mag, 1.0)
    worst = 0.0
    g = omega.grid
    for j in range(3):
        dw = np.stack([deriv(w[i], g, j, 1, omega.parity[i])[0] for i in range(3)])
        proj = np.sum(xi * dw, axis=0)
        dxi = (dw - xi * proj) / np.where(mask, mag, 1.0)
        worst = max(worst, float(np.max(np.abs(dxi[:, mask]))))
    return worst, 1.0 - float(np.mean(mask))


def measure(u: VectorField, time=0.0, triplet: CompatibleTriplet | None = None,
            eps_dir=EPS_DIR, with_direction=True) -> NormReport:
    """All monitored norms of one velocity snapshot."""
    g = u.grid
    J = jacobian(u)
    om = curl(u, check=False)
    w = om.data
    arrays = conormal_arrays(u, 2)
    terms = terms_from_arrays(arrays, g)
    rep = NormReport(
        time=float(time),
        linf_u=linf_array(u.data, g),
        linf_omega=linf_array(w, g),
        linf_grad_h_u=linf_array(J[:, :2], g),
        linf_grad_u=linf_array(J, g),
        w1inf_tan=norm_from_terms(terms, m=1, tangential=True),
        w1inf_co=norm_from_terms(terms, m=1),
        w2inf_co=norm_from_terms(terms, m=2),
        deformation=deformation_sum(J, g),
        energy=energy(u),
        enstrophy=enstrophy(om),
        helicity=helicity(u, om),
    )
    if with_direction:
        if rep.linf_omega > 0:
            rep.grad_direction, rep.direction_mask_fraction = direction_gradient(om, eps_dir)
        else:
            rep.grad_direction, rep.direction_mask_fraction = math.nan, 1.0
    if triplet is not None:
        m1 = region_mask(g, triplet.omega1)
        m2 = region_mask(g, triplet.omega2)
        first = {a: v for a, v in arrays.items() if sum(a) <= 1}
        rep.w1inf_co_omega1 = norm_from_terms(terms_from_arrays(first, g, region=m1))
        rep.linf_omega_omega1 = linf_array(w, g, m1)
        rep.linf_omega_omega2 = linf_array(w, g, m2)
        rep.linf_grad_h_omega1 = linf_array(J[:, :2], g, m1)
        z = g.coords(2)
        chi = np.asarray(triplet.chi_z(z), dtype=float)[None, None, :]
        dchi = np.asarray(triplet.chi_dz(0.0, 0.0, z), dtype=float)[None, None, :]
        rep.linf_chi_omega = linf_array(chi * w, g)
        rep.chi_advection = linf_array(u.data[2] * dchi * w, g, m1)
    return rep


def integrand(rep_cols: dict, name: str) -> np.ndarray:
    """Integrand samples of criterion ``name`` from column arrays."""
    c = {k: np.asarray(v, dtype=float) for k, v in rep_cols.items()}
    if name == "bkm":
        return c["linf_omega"]
    if name == "ponce":
        return c["deformation"]
    if name == "cfm":
        return (1.0 + c["linf_u"]) * c["grad_direction"]
    if name == "tan2":
        return c["w1inf_tan"] ** 2
    if name == "tan2_h":
        return c["linf_grad_h_u"] ** 2
    if name == "mixed":
        w1 = c["w1inf_co_omega1"]
        if np.all(np.isnan(w1)):
            return c["w1inf_co"] ** 2
        return w1 ** 2 + c["linf_omega_omega2"]
    if name == "conormal":
        return c["w1inf_co"] ** 2 + c["w2inf_co"]
    raise KeyError(f"unknown criterion {name!r}")


def mixed_parts(rep_cols: dict):
    """The two regional pieces of the mixed integrand."""
    w1 = np.asarray(rep_cols["w1inf_co_omega1"], dtype=float)
    if np.all(np.isnan(w1)):
        return np.asarray(rep_cols["w1inf_co"], dtype=float) ** 2, np.zeros(len(w1))
    return w1 ** 2, np.asarray(rep_cols["linf_omega_omega2"], dtype=float)


def running_integral(t, f):
    t = np.asarray(t, dtype=float)
    f = np.asarray(f, dtype=float)
    if len(t) < 2:
        raise SeriesError("a time integral needs at least two samples")
    return cumulative_trapezoid(f, t, initial=0.0)


def trapezoid(t, f):
    return float(running_integral(t, f)[-1])


def quadrature_error(t, f):
    """Richardson-style estimate from halving the cadence.

    Over the longest prefix with an odd sample count, the trapezoid value
    on every sample is compared with the value on every other sample;
    the estimate is ``|I_h - I_2h| / 3`` plus a rounding allowance. With
    fewer than three samples ``|I|`` is returned.

    The factor 1/3 assumes the integrand is resolved in time. Sup-norm
    integrands whose maximizing node jumps between samples are not, and
    the estimate can then fall below the true error.
    """
    t = np.asarray(t, dtype=float)
    f = np.asarray(f, dtype=float)
    total = trapezoid(t, f)
    n = len(t) if len(t) % 2 == 1 else len(t) - 1
    if n < 3:
        return abs(total)
    fine = trapezoid(t[:n], f[:n])
    coarse = trapezoid(t[:n:2], f[:n:2])
    return abs(fine - coarse) / 3.0 + 64 * _EPS * abs(total) * len(t)


@dataclass
class CriterionSeries:
    """Time-stamped norm columns plus metadata (domain, grid, seed, triplet, end time)."""

    columns: dict = field(default_factory=lambda: {k: [] for k in NORM_COLUMNS})
    metadata: dict = field(default_factory=dict)
    criteria: tuple = CRITERIA

    def append(self, rep: NormReport):
        times = self.columns["time"]
        if times and not rep.time > times[-1]:
            raise SeriesError(f"time {rep.time} does not increase past {times[-1]}")
        for k, v in asdict(rep).items():
            self.columns[k].append(float(v))

    def __len__(self):
        return len(self.columns["time"])

    @property
    def times(self):
        return np.asarray(self.columns["time"], dtype=float)

    def column(self, name):
        return np.asarray(self.columns[name], dtype=float)

    def has_triplet(self):
        return len(self) > 0 and not np.all(np.isnan(self.column("w1inf_co_omega1")))

    def integrand(self, name):
        return integrand(self.columns, name)

    def running(self, name):
        return running_integral(self.times, self.integrand(name))

    def integral(self, name):
        if len(self) < 2:
            raise SeriesError("a time integral needs at least two samples")
        return trapezoid(self.times, self.integrand(name))

    def error_estimate(self, name):
        return quadrature_error(self.times, self.integrand(name))

    def subsample(self, stride):
        out = CriterionSeries({k: list(v[::stride]) for k, v in self.columns.items()},
                              dict(self.metadata), self.criteria)
        return out

    def reports(self):
        return [NormReport(**{k: self.columns[k][i] for k in NORM_COLUMNS}) for i in range(len(self))]


class CriteriaMonitor:
    """Callback collecting a :class:`CriterionSeries` from solver snapshots."""

    def __init__(self, triplet: CompatibleTriplet | None = None, criteria=CRITERIA,
                 eps_dir=EPS_DIR, metadata=None):
        unknown = set(criteria) - set(CRITERIA)
        if unknown:
            raise ConfigError(f"unknown criteria {sorted(unknown)}")
        if triplet is not None:
            rep = validate_triplet(triplet)
            if not rep.passed:
                raise TripletError(f"triplet fails condition(s) {rep.failed}")
        self.triplet = triplet
        self.eps_dir = eps_dir
        self.series = CriterionSeries(metadata=dict(metadata or {}), criteria=tuple(criteria))
        if triplet is not None:
            a, b = triplet.transition_interval
            self.series.metadata.setdefault("triplet", [a, b])

    def record(self, snapshot) -> NormReport:
        u, t = (snapshot.u, snapshot.time) if hasattr(snapshot, "u") else (snapshot, 0.0)
        rep = measure(u, t, self.triplet, self.eps_dir, with_direction="cfm" in self.series.criteria)
        self.series.append(rep)
        self.series.metadata["termination_time"] = rep.time
        return rep

    __call__ = record


def _need(series, name):
    if len(series) < 2:
        raise SeriesError("a time integral needs at least two samples")
    if name not in series.criteria:
        raise ConfigError(f"criterion {name!r} is disabled for this series")
    return series.integral(name)


def integral_bkm(series):
    return _need(series, "bkm")


def integral_ponce(series):
    return _need(series, "ponce")


def integral_cfm(series):
    return _need(series, "cfm")


def integral_tan2(series, horizontal_only=False):
    if horizontal_only:
        _need(series, "tan2")
        return series.integral("tan2_h")
    return _need(series, "tan2")


@dataclass
class MixedIntegral:
    omega1_part: float
    omega2_part: float
    total: float


def integral_mixed(series) -> MixedIntegral:
    total = _need(series, "mixed")
    p1, p2 = mixed_parts(series.columns)
    return MixedIntegral(trapezoid(series.times, p1), trapezoid(series.times, p2), total)


def integral_conormal(series):
    return _need(series, "conormal")


# -- Gronwall audits -------------------------------------------------------------------

@dataclass
class GronwallReport:
    times: np.ndarray
    measured: np.ndarray
    bound: np.ndarray
    margin: np.ndarray       # (bound - measured) / max(measured_0, 1)
    tolerance: float
    ratio: np.ndarray | None = None

    @property
    def min_margin(self):
        return float(np.min(self.margin)) if len(self.margin) else 0.0

    @property
    def passed(self):
        return self.min_margin >= -self.tolerance

    def summary(self):
        out = {"min_margin": self.min_margin, "tolerance": self.tolerance, "passed": self.passed,
               "final_bound": float(self.bound[-1]), "final_measured": float(self.measured[-1])}
        if self.ratio is not None:
            out["max_ratio"] = float(np.max(self.ratio))
            out["final_ratio"] = float(self.ratio[-1])
        return out


def _columns(series, names):
    for n in names:
        col = series.columns.get(n)
        if col is None or len(col) == 0 or np.any(np.isnan(np.asarray(col, dtype=float))):
            raise ConfigError(f"series lacks the {n!r} samples the audit needs")
    return [series.column(n) for n in names]


def _audit(t, measured, rate, start, scale_ref):
    bound = start + running_integral(t, rate)
    scale = max(float(scale_ref), 1.0)
    tol = max(1e-3, quadrature_error(t, rate) / scale)
    return bound, (bound - measured) / scale, tol


def gronwall_audit(series, c1=C1, c2=C2) -> GronwallReport:
    """Compare ``||omega(t)||`` with ``||omega_0|| + int (c1 ||omega|| G + c2 G^2)``.

    ``G = ||grad_h u||_inf``. The tolerance is the larger of ``1e-3`` and
    the normalized quadrature-error estimate of the integral.
    """
    w, G = _columns(series, ("linf_omega", "linf_grad_h_u"))
    t = series.times
    bound, margin, tol = _audit(t, w, c1 * w * G + c2 * G * G, w[0], w[0])
    return GronwallReport(t, w, bound, margin, tol)


def gronwall_audit_local(series, triplet: CompatibleTriplet | None = None, c1=C1, c2=C2) -> GronwallReport:
    """Audit ``||chi omega(t)||`` against the cutoff form of the bound.

    ``B = ||chi omega_0|| + int (c1 ||chi omega|| G_1 + c2 G_1^2 + ||u3 chi' omega||_{Omega_1})``
    with ``G_1 = ||grad_h u||_{L^inf(Omega_1)}``. The ``ratio`` trajectory is
    ``||chi omega|| / (||chi omega_0|| + int (||chi omega|| W + W^2))`` with
    ``W = ||u||_{W^{1,inf}_co(Omega_1)}``; it is recorded, not asserted.
    """
    if triplet is not None:
        rep = validate_triplet(triplet)
        if not rep.passed:
            raise TripletError(f"triplet fails condition(s) {rep.failed}")
    if not series.has_triplet():
        raise ConfigError("the local audit needs a series recorded with a triplet")
    cw, G1, adv, W = _columns(series, ("linf_chi_omega", "linf_grad_h_omega1", "chi_advection",
                                        "w1inf_co_omega1"))
    t = series.times
    bound, margin, tol = _audit(t, cw, c1 * cw * G1 + c2 * G1 * G1 + adv, cw[0], cw[0])
    denom = cw[0] + running_integral(t, cw * W + W * W)
    ratio = np.divide(cw, denom, out=np.zeros_like(cw), where=denom > 0)
    return GronwallReport(t, cw, bound, margin, tol, ratio)


def growth_exponent(t, values, window=0.5):
    """Least-squares slope of ``log values`` over the trailing ``window`` fraction."""
    t = np.asarray(t, dtype=float)
    v = np.asarray(values, dtype=float)
    n = max(2, int(math.ceil(window * len(t))))
    tt, vv = t[-n:], v[-n:]
    ok = vv > 0
    if ok.sum() < 2:
        return {"exponent": math.nan, "intercept": math.nan, "window_start": float(tt[0]) if len(tt) else math.nan}
    slope, icpt = np.polyfit(tt[ok], np.log(vv[ok]), 1)
    return {"exponent": float(slope), "intercept": float(icpt), "window_start": float(tt[0])}
