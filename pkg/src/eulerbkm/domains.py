"""Flat domain catalogue, boundary-distance weights and compatible triplets.

Points are written ``x = (x1, x2, z)``; the third axis is always the one
carrying the boundary (or, for the torus and whole space, the distinguished
axis on which the weight vanishes).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import (
    DomainMismatchError,
    InvalidIntervalError,
    TripletError,
    UnsupportedKindError,
)

KINDS = (
    "half-space",
    "whole-space",
    "torus3",
    "slab-channel-periodic",
    "slab-channel-infinite",
    "ball",
)
FLAT_KINDS = KINDS[:-1]
SLAB_KINDS = ("slab-channel-periodic", "slab-channel-infinite")

_INF = np.inf
_TOL = 1e-12


@dataclass(frozen=True)
class DomainSpec:
    """A catalogued spatial domain.

    ``extents`` holds one ``(lo, hi)`` pair per axis; for periodic axes the
    pair is one period. ``periodic`` flags the periodic axes.
    """

    kind: str
    extents: tuple
    periodic: tuple = (False, False, False)
    boundary_axes: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise UnsupportedKindError(f"unknown domain kind {self.kind!r}")
        ext = tuple((float(lo), float(hi)) for lo, hi in self.extents)
        object.__setattr__(self, "extents", ext)
        object.__setattr__(self, "periodic", tuple(bool(p) for p in self.periodic))
        object.__setattr__(self, "boundary_axes", frozenset(self.boundary_axes))
        if len(ext) != 3:
            raise ValueError("extents must have three (lo, hi) pairs")
        for (lo, hi), per in zip(ext, self.periodic):
            if not hi > lo:
                raise ValueError(f"empty extent ({lo}, {hi})")
            if per and not np.isfinite(hi - lo):
                raise ValueError("periodic axes need a finite period")
        no_boundary = self.kind in ("whole-space", "torus3")
        if no_boundary != (len(self.boundary_axes) == 0):
            raise ValueError(f"boundary_axes inconsistent with kind {self.kind}")

    # -- constructors -----------------------------------------------------
    @classmethod
    def half_space(cls):
        return cls("half-space", ((-_INF, _INF), (-_INF, _INF), (0.0, _INF)),
                   boundary_axes={2})

    @classmethod
    def whole_space(cls):
        return cls("whole-space", ((-_INF, _INF),) * 3)

    @classmethod
    def torus(cls, periods=1.0):
        p = np.broadcast_to(np.asarray(periods, dtype=float), (3,))
        return cls("torus3", tuple((0.0, float(L)) for L in p), (True, True, True))

    @classmethod
    def slab_periodic(cls, period1=1.0, period2=1.0, height=1.0):
        return cls("slab-channel-periodic",
                   ((0.0, period1), (0.0, period2), (0.0, height)),
                   (True, True, False), {2})

    @classmethod
    def slab_infinite(cls, height=1.0):
        return cls("slab-channel-infinite",
                   ((-_INF, _INF), (-_INF, _INF), (0.0, height)), boundary_axes={2})

    @classmethod
    def ball(cls):
        return cls("ball", ((-1.0, 1.0),) * 3, boundary_axes={0, 1, 2})

    # -- queries ----------------------------------------------------------
    @property
    def z_range(self):
        return self.extents[2]

    @property
    def is_flat(self):
        return self.kind != "ball"

    def contains(self, x, tol=1e-12) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == "ball":
            return np.linalg.norm(x, axis=-1) <= 1.0 + tol
        ok = np.ones(x.shape[:-1], dtype=bool)
        for ax, ((lo, hi), per) in enumerate(zip(self.extents, self.periodic)):
            if per:
                continue
            scale = tol * max(1.0, abs(lo) if np.isfinite(lo) else 1.0,
                              abs(hi) if np.isfinite(hi) else 1.0)
            ok &= (x[..., ax] >= lo - scale) & (x[..., ax] <= hi + scale)
        return ok

    def weight_zeros(self):
        """z-coordinates where the weight vanishes."""
        lo, hi = self.z_range
        if self.kind == "half-space":
            return (0.0,)
        if self.kind == "whole-space":
            return (0.0,)
        if self.kind == "torus3":
            return (lo, lo + 0.5 * (hi - lo), hi)
        if self.kind in SLAB_KINDS:
            return (lo, hi)
        raise UnsupportedKindError("ball weight vanishes on the sphere, not on z-levels")


def _as_points(x):
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != 3:
        raise ValueError("points must have a trailing axis of length 3")
    return x


def weight_of_z(domain: DomainSpec, z, absolute=False):
    """Weight as a function of the boundary-normal coordinate alone."""
    z = np.asarray(z, dtype=float)
    kind = domain.kind
    lo, hi = domain.z_range
    if kind == "half-space":
        phi = z / (1.0 + z)
    elif kind == "whole-space":
        # z/(1+z) above the plane, z/(1-z) below
        phi = z / (1.0 + np.abs(z))
    elif kind == "torus3":
        phi = np.sin(2.0 * np.pi * (z - lo) / (hi - lo))
    elif kind in SLAB_KINDS:
        phi = np.minimum(z - lo, hi - z)
    else:
        raise UnsupportedKindError("the ball weight depends on |x|; use weight_phi")
    return np.abs(phi) if absolute else phi


def weight_dz(domain: DomainSpec, z, absolute=False):
    """z-derivative of the weight.

    At the slab midpoint, where ``min(z, 1 - z)`` has a corner, the left
    limit ``+1`` is used.
    """
    z = np.asarray(z, dtype=float)
    kind = domain.kind
    lo, hi = domain.z_range
    if kind in ("half-space", "whole-space"):
        d = 1.0 / (1.0 + np.abs(z)) ** 2
    elif kind == "torus3":
        L = hi - lo
        d = 2.0 * np.pi / L * np.cos(2.0 * np.pi * (z - lo) / L)
    elif kind in SLAB_KINDS:
        d = np.where(z - lo <= hi - z, 1.0, -1.0)
    else:
        raise UnsupportedKindError("ball weight has no z-derivative rule")
    if absolute:
        phi = weight_of_z(domain, z)
        d = np.where(phi < 0, -d, d)
    return d


def weight_phi(domain: DomainSpec, x, absolute=False):
    """Boundary-distance weight at point(s) ``x`` (trailing axis of length 3).

    Half-space ``z/(1+z)``; whole space ``z/(1+z)`` for ``z >= 0`` and
    ``z/(1-z)`` below, which is negative there; slab ``min(z, H - z)``;
    torus ``sin(2 pi z / L)``; ball ``1 - |x|``. Set ``absolute`` to get
    ``|phi|``, which is what the norms use.
    """
    x = _as_points(x)
    if not np.all(domain.contains(x)):
        raise DomainMismatchError(f"point(s) outside the {domain.kind} domain")
    if domain.kind == "ball":
        phi = 1.0 - np.linalg.norm(x, axis=-1)
        return np.abs(phi) if absolute else phi
    out = weight_of_z(domain, x[..., 2], absolute=absolute)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ConormalFrame:
    """The conormal fields ``Z1 = d1, Z2 = d2, Z3 = phi dz`` of a flat domain."""

    domain: DomainSpec
    absolute: bool = False

    def weight(self, z):
        return weight_of_z(self.domain, z, absolute=self.absolute)

    def weight_dz(self, z):
        return weight_dz(self.domain, z, absolute=self.absolute)

    def coefficients(self, x) -> np.ndarray:
        """Direction vectors of ``Z1, Z2, Z3`` at ``x``: shape ``(..., 3, 3)``."""
        x = _as_points(x)
        out = np.zeros(x.shape[:-1] + (3, 3))
        out[..., 0, 0] = 1.0
        out[..., 1, 1] = 1.0
        out[..., 2, 2] = self.weight(x[..., 2])
        return out


def conormal_frame(domain: DomainSpec, absolute=False) -> ConormalFrame:
    if domain.kind == "ball":
        raise UnsupportedKindError("the ball needs chart frames (see charts.ball_chart)")
    return ConormalFrame(domain, absolute)


# ---------------------------------------------------------------------------
# regions along the weight axis
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ZRegion:
    """Union of z-intervals ``{x : z in (lo, hi)}`` (axis-aligned slabs).

    Distances and membership tests treat the intervals as closed where that
    matters; open versus closed makes no difference to any distance.
    """

    intervals: tuple

    def __post_init__(self):
        ivs = sorted((float(lo), float(hi)) for lo, hi in self.intervals if hi > lo)
        merged = []
        for lo, hi in ivs:
            if merged and lo <= merged[-1][1]:
                merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
            else:
                merged.append((lo, hi))
        object.__setattr__(self, "intervals", tuple(merged))

    @property
    def empty(self):
        return not self.intervals

    def contains(self, z, closed=False):
        z = np.asarray(z, dtype=float)
        out = np.zeros(z.shape, dtype=bool)
        for lo, hi in self.intervals:
            if closed:
                out |= (z >= lo) & (z <= hi)
            else:
                out |= (z > lo) & (z < hi)
        return out

    def complement(self, z_range):
        lo, hi = z_range
        pieces, cur = [], lo
        for a, b in self.intervals:
            if a > cur:
                pieces.append((cur, min(a, hi)))
            cur = max(cur, b)
        if cur < hi:
            pieces.append((cur, hi))
        return ZRegion(tuple(p for p in pieces if p[1] > p[0]))

    def mask(self, z, closed=False):
        return self.contains(z, closed=closed)


def _point_set_distance(A, B, period=None):
    """Distance between two closed interval unions (optionally on a circle)."""
    if not A or not B:
        return np.inf
    shifts = (0.0,) if period is None else (-period, 0.0, period)
    best = np.inf
    for a0, a1 in A:
        for b0, b1 in B:
            for s in shifts:
                c0, c1 = b0 + s, b1 + s
                if a0 <= c1 and c0 <= a1:
                    return 0.0
                gap = c0 - a1 if c0 > a1 else a0 - c1
                best = min(best, gap)
    return float(best)


def region_distance(A: ZRegion, B: ZRegion, domain: DomainSpec | None = None):
    period = None
    if domain is not None and domain.periodic[2]:
        lo, hi = domain.z_range
        period = hi - lo
    return _point_set_distance(A.intervals, B.intervals, period)


# ---------------------------------------------------------------------------
# compatible triplets
# ---------------------------------------------------------------------------

def smoothstep(t):
    """Quintic step: 0 for t <= 0, 1 for t >= 1, C^2 at both ends."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    return t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)


def smoothstep_dt(t):
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    return 30.0 * t * t * (1.0 - t) ** 2


@dataclass(frozen=True)
class CompatibleTriplet:
    """Regions ``omega1``, ``omega2`` and a cutoff ``chi(x1, x2, z)``.

    ``chi_dz`` is the z-derivative of the cutoff; ``transition_interval``
    is the ``(a, b)`` pair measured as distance from the weight's zero set.
    """

    domain: DomainSpec
    omega1: ZRegion
    omega2: ZRegion
    chi: Callable
    chi_dz: Callable
    transition_interval: tuple

    def chi_z(self, z):
        z = np.asarray(z, dtype=float)
        return np.broadcast_to(self.chi(np.zeros_like(z), np.zeros_like(z), z), z.shape)


def _zero_set_distance(domain, z):
    """Distance from z to the zero set of the domain's weight."""
    lo, hi = domain.z_range
    z = np.asarray(z, dtype=float)
    if domain.kind == "half-space":
        return z
    if domain.kind == "whole-space":
        return np.abs(z)
    if domain.kind in SLAB_KINDS:
        return np.minimum(z - lo, hi - z)
    if domain.kind == "torus3":
        half = 0.5 * (hi - lo)
        r = np.mod(z - lo, half)
        return np.minimum(r, half - r)
    raise UnsupportedKindError("triplets on the ball are replaced by atlas partitions")


def _zero_set_distance_dz(domain, z):
    lo, hi = domain.z_range
    z = np.asarray(z, dtype=float)
    if domain.kind == "half-space":
        return np.ones_like(z)
    if domain.kind == "whole-space":
        return np.where(z >= 0, 1.0, -1.0)
    if domain.kind in SLAB_KINDS:
        return np.where(z - lo <= hi - z, 1.0, -1.0)
    half = 0.5 * (hi - lo)
    r = np.mod(z - lo, half)
    return np.where(r <= half - r, 1.0, -1.0)


def make_slab_triplet(domain: DomainSpec, a: float, b: float, profile="quintic"):
    """Build the standard slab triplet with transition on ``a < d(z) < b``.

    ``d(z)`` is the distance from the weight's zero set. Near that set the
    cutoff is 1 for the half-space and slab (``chi`` is 1 next to the wall)
    and 0 for the whole space and torus, where ``omega1`` must stay away
    from the zero set.
    """
    if profile != "quintic":
        raise ValueError(f"unknown profile {profile!r}")
    a, b = float(a), float(b)
    if not a < b:
        raise InvalidIntervalError(f"need a < b, got a={a}, b={b}")
    kind = domain.kind
    if kind == "ball":
        raise UnsupportedKindError("use build_ball_atlas for the ball")
    if kind in ("whole-space", "torus3") and a <= 0.0:
        raise TripletError("omega1 would touch the zero set of the weight (condition iii)")
    if a < 0.0 or (kind not in ("whole-space", "torus3") and a <= 0.0):
        raise InvalidIntervalError("need 0 < a")
    lo, hi = domain.z_range
    width = b - a

    if kind == "half-space":
        omega1 = ZRegion(((0.0, b),))
        omega2 = ZRegion(((a, _INF),))
        near_is_one = True
    elif kind in SLAB_KINDS:
        if not b < 0.5 * (hi - lo):
            raise InvalidIntervalError("b must be below half the channel height")
        omega1 = ZRegion(((lo, lo + b), (hi - b, hi)))
        omega2 = ZRegion(((lo + a, hi - a),))
        near_is_one = True
    elif kind == "whole-space":
        omega1 = ZRegion(((-_INF, -a), (a, _INF)))
        omega2 = ZRegion(((-b, b),))
        near_is_one = False
    else:  # torus3: weight sin(2 pi z / L) vanishes at 0 and L/2
        L = hi - lo
        if not b < 0.25 * L:
            raise InvalidIntervalError("b must be below a quarter period on the torus")
        h = 0.5 * L
        omega1 = ZRegion(((lo + a, lo + h - a), (lo + h + a, hi - a)))
        omega2 = ZRegion(((lo, lo + b), (lo + h - b, lo + h + b), (hi - b, hi)))
        near_is_one = False

    def chi(x1, x2, z):
        s = smoothstep((_zero_set_distance(domain, z) - a) / width)
        return 1.0 - s if near_is_one else s

    def chi_dz(x1, x2, z):
        z = np.asarray(z, dtype=float)
        ds = smoothstep_dt((_zero_set_distance(domain, z) - a) / width) / width
        ds = ds * _zero_set_distance_dz(domain, z)
        return -ds if near_is_one else ds

    return CompatibleTriplet(domain, omega1, omega2, chi, chi_dz, (a, b))


@dataclass
class TripletReport:
    """Outcome of checking conditions (i)-(iii) for a triplet."""

    condition_i: bool
    distance_i: float
    condition_ii: bool
    chi_error_omega2c: float
    chi_error_omega1c: float
    tangential_variation: float
    condition_iii: bool | None
    distance_iii: float | None
    failed: list

    @property
    def passed(self):
        return not self.failed


def _sample_intervals(region: ZRegion, n, clip=25.0):
    zs = []
    for lo, hi in region.intervals:
        lo_c = lo if np.isfinite(lo) else (hi - clip if np.isfinite(hi) else -clip)
        hi_c = hi if np.isfinite(hi) else lo_c + clip
        zs.append(np.linspace(lo_c, hi_c, n))
    return np.concatenate(zs) if zs else np.zeros(0)


def validate_triplet(t: CompatibleTriplet, domain: DomainSpec | None = None,
                     n_samples=257, tol=1e-12, seed=0) -> TripletReport:
    """Check a triplet against conditions (i), (ii) and (iii).

    Condition (ii) is sampled on ``omega2^c \\ omega1^c`` and
    ``omega1^c \\ omega2^c``: where the two complements overlap no cutoff can
    be both 0 and 1, and that is reported as a failure of (i).
    """
    domain = t.domain if domain is None else domain
    rng = np.random.default_rng(seed)
    zr = domain.z_range
    c1 = t.omega1.complement(zr)
    c2 = t.omega2.complement(zr)
    period = (zr[1] - zr[0]) if domain.periodic[2] else None
    dist_i = _point_set_distance(c1.intervals, c2.intervals, period)
    cond_i = dist_i > tol

    z2 = _sample_intervals(c2, n_samples)
    z2 = z2[~c1.contains(z2, closed=True)]
    z1 = _sample_intervals(c1, n_samples)
    z1 = z1[~c2.contains(z1, closed=True)]

    def horiz(n):
        return rng.uniform(-10.0, 10.0, n), rng.uniform(-10.0, 10.0, n)

    err2 = 0.0
    if z2.size:
        x1, x2 = horiz(z2.size)
        err2 = float(np.max(np.abs(t.chi(x1, x2, z2) - 1.0)))
    err1 = 0.0
    if z1.size:
        x1, x2 = horiz(z1.size)
        err1 = float(np.max(np.abs(t.chi(x1, x2, z1))))

    # tangential dependence: compare chi at shifted horizontal positions
    lo, hi = zr
    lo_c = lo if np.isfinite(lo) else -25.0
    hi_c = hi if np.isfinite(hi) else 25.0
    zs = np.linspace(lo_c, hi_c, n_samples)
    var = 0.0
    base = t.chi(np.zeros_like(zs), np.zeros_like(zs), zs)
    for _ in range(8):
        x1, x2 = horiz(zs.size)
        var = max(var, float(np.max(np.abs(t.chi(x1, x2, zs) - base))))
    h = 1e-4
    x1, x2 = horiz(zs.size)
    d1 = (t.chi(x1 + h, x2, zs) - t.chi(x1 - h, x2, zs)) / (2 * h)
    d2 = (t.chi(x1, x2 + h, zs) - t.chi(x1, x2 - h, zs)) / (2 * h)
    var = max(var, float(np.max(np.abs(d1))), float(np.max(np.abs(d2))))
    cond_ii = err1 <= 1e-10 and err2 <= 1e-10 and var <= 1e-10

    cond_iii = dist_iii = None
    if domain.kind in ("whole-space", "torus3"):
        zeros = tuple((z0, z0) for z0 in domain.weight_zeros())
        dist_iii = _point_set_distance(t.omega1.intervals, zeros, period)
        cond_iii = dist_iii > tol

    failed = []
    if not cond_i:
        failed.append("i")
    if not cond_ii:
        failed.append("ii")
    if cond_iii is False:
        failed.append("iii")
    return TripletReport(cond_i, dist_i, cond_ii, err2, err1, var, cond_iii, dist_iii, failed)
