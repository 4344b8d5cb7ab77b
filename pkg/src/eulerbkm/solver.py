"""Pseudo-spectral incompressible Euler solver on the torus and the free-slip channel.

The velocity is advanced in rotational form,

    du/dt = P [ trunc(u x omega) ],

with ``P`` the Leray projector, ``trunc`` the 2/3-rule truncation and the
classical four-stage Runge-Kutta scheme. The truncated Galerkin system
conserves energy and helicity, so drifts measure time-stepping error.

On the channel ``T^2 x [0, H]`` the free-slip walls are built into the
basis: ``u1, u2`` are cosine series and ``u3`` a sine series in z, so
``u3 = 0`` on the walls holds exactly. A cosine/sine mode pair is
projected through ``v = (a1, a2, -i b3)``, which turns the divergence
``i k1 a1 + i k2 a2 + kappa b3`` into ``i k . v``.
"""
from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.fft as sfft

from .calculus import curl
from .errors import DivergenceFailure, EulerBKMError, UnsupportedGridError
from .grid import (
    VELOCITY_PARITY,
    Grid3,
    VectorField,
    channel_grid,
    cos_analysis,
    cos_synthesis,
    sin_analysis,
    sin_synthesis,
    torus_grid,
)

MAX_N = 128
BLOWUP_FACTOR = 1e6


class ParameterError(EulerBKMError, ValueError):
    pass


class CFLWarning(UserWarning):
    pass


@dataclass(frozen=True)
class SolverConfig:
    """Run parameters. ``n`` is the node count per axis (channel: ``n3 = M + 1``)."""

    n: tuple = (32, 32, 32)
    dt: float = 1e-3
    t_end: float = 1.0
    domain: str = "torus3"
    lengths: tuple = (2 * np.pi, 2 * np.pi, 2 * np.pi)
    initial: str = "taylor_green"
    params: dict = field(default_factory=dict)
    output_every: int = 10
    seed: int = 0
    dealias: str = "2/3"
    cfl_max: float = 0.5

    def __post_init__(self):
        if not self.dt > 0:
            raise ParameterError("dt must be positive")
        if self.t_end < 0:
            raise ParameterError("t_end must be non-negative")
        if self.output_every < 1:
            raise ParameterError("output_every must be >= 1")
        if self.domain not in ("torus3", "channel"):
            raise ParameterError(f"solver domain must be torus3 or channel, not {self.domain!r}")
        if self.dealias not in ("2/3", "none"):
            raise ParameterError("dealias must be '2/3' or 'none'")
        if max(self.n) > MAX_N + 1:
            raise ParameterError(f"desk scale is capped at {MAX_N} points per axis")

    def make_grid(self) -> Grid3:
        if self.domain == "torus3":
            if len(set(self.n)) == 1 and len(set(self.lengths)) == 1:
                return torus_grid(self.n[0], self.lengths[0])
            from .domains import DomainSpec
            return Grid3(tuple(self.n), tuple(self.lengths), DomainSpec.torus(tuple(self.lengths)))
        return channel_grid(*self.n, lengths=tuple(self.lengths))


@dataclass(frozen=True)
class Snapshot:
    """Immutable copy of the state handed to callbacks."""

    time: float
    step: int
    u: VectorField


class SpectralBasis:
    """Transforms, wavenumbers and projection for a torus or channel grid."""

    def __init__(self, grid: Grid3, dealias="2/3"):
        if not grid.transformable:
            raise UnsupportedGridError("the solver needs periodic or parity axes")
        self.grid = grid
        self.channel = grid.is_channel
        n1, n2, n3 = grid.shape
        L1, L2, L3 = grid.lengths
        k1 = 2 * np.pi / L1 * sfft.fftfreq(n1, 1.0 / n1)
        i1 = sfft.fftfreq(n1, 1.0 / n1)
        if self.channel:
            k2 = 2 * np.pi / L2 * np.arange(n2 // 2 + 1)
            i2 = np.arange(n2 // 2 + 1)
            M = n3 - 1
            k3 = np.pi / L3 * np.arange(M + 1)
            self.M = M
            keep3 = np.arange(M + 1) < 2.0 * M / 3.0
        else:
            k2 = 2 * np.pi / L2 * sfft.fftfreq(n2, 1.0 / n2)
            i2 = sfft.fftfreq(n2, 1.0 / n2)
            k3 = 2 * np.pi / L3 * np.arange(n3 // 2 + 1)
            i3 = np.arange(n3 // 2 + 1)
            keep3 = np.abs(i3) < n3 / 3.0
        # Nyquist modes carry no derivative information on even grids
        if n1 % 2 == 0:
            k1[n1 // 2] = 0.0
        if n2 % 2 == 0:
            k2[n2 // 2] = 0.0
        if not self.channel and n3 % 2 == 0:
            k3[n3 // 2] = 0.0
        self.k = (k1[:, None, None], k2[None, :, None], k3[None, None, :])
        if dealias == "2/3":
            keep = ((np.abs(i1) < n1 / 3.0)[:, None, None]
                    & (np.abs(i2) < n2 / 3.0)[None, :, None]
                    & keep3[None, None, :])
        else:
            keep = np.ones((n1, len(k2), len(k3)), dtype=bool)
            if n1 % 2 == 0:
                keep[n1 // 2] = False
            if n2 % 2 == 0:
                keep[:, n2 // 2] = False
            if self.channel:
                keep[:, :, -1] = False
            elif n3 % 2 == 0:
                keep[:, :, -1] = False
        self.keep = keep
        kz = self.k[2].copy()
        if self.channel:
            kz[..., -1] = 0.0  # sine mode M vanishes on the nodes
        self.kproj = (self.k[0], self.k[1], kz)
        k2sum = self.kproj[0] ** 2 + self.kproj[1] ** 2 + self.kproj[2] ** 2
        self.k2 = np.where(k2sum == 0, 1.0, k2sum)
        self.zero_mode = k2sum == 0

    # -- transforms ------------------------------------------------------------------
    def forward(self, u):
        """Physical (3, n1, n2, n3) -> coefficient array."""
        u = np.asarray(u, dtype=float)
        if not self.channel:
            return sfft.rfftn(u, axes=(1, 2, 3))
        c12 = cos_analysis(u[:2], axis=-1)
        c3 = sin_analysis(u[2:], axis=-1)
        c = np.concatenate([c12, c3])
        return sfft.rfftn(c, axes=(1, 2))

    def inverse(self, c, parities=VELOCITY_PARITY):
        n1, n2, n3 = self.grid.shape
        if not self.channel:
            return sfft.irfftn(c, s=(n1, n2, n3), axes=(1, 2, 3))
        f = sfft.irfftn(c, s=(n1, n2), axes=(1, 2))
        out = np.empty((len(parities), n1, n2, n3))
        for i, p in enumerate(parities):
            out[i] = cos_synthesis(f[i]) if p == "even" else sin_synthesis(f[i])
        return out

    # -- spectral calculus -----------------------------------------------------------
    def curl(self, c):
        """Vorticity coefficients (channel: parities odd, odd, even)."""
        k1, k2, k3 = self.k
        if not self.channel:
            return np.stack([1j * k2 * c[2] - 1j * k3 * c[1],
                             1j * k3 * c[0] - 1j * k1 * c[2],
                             1j * k1 * c[1] - 1j * k2 * c[0]])
        dz_even = -k3 * c[:2]  # cos -> sin
        dz_even[..., 0] = 0.0
        dz_even[..., -1] = 0.0
        w1 = 1j * k2 * c[2] - dz_even[1]
        w2 = dz_even[0] - 1j * k1 * c[2]
        w3 = 1j * k1 * c[1] - 1j * k2 * c[0]
        return np.stack([w1, w2, w3])

    def divergence(self, c):
        k1, k2, k3 = self.k
        if not self.channel:
            return 1j * (k1 * c[0] + k2 * c[1] + k3 * c[2])
        return 1j * (k1 * c[0] + k2 * c[1]) + k3 * c[2]

    def project(self, c):
        """Leray projection ``I - k k^T / |k|^2`` mode by mode; the mean is untouched."""
        k1, k2, k3 = self.kproj
        v = c.copy()
        if self.channel:
            v[2] = -1j * c[2]
        kv = (k1 * v[0] + k2 * v[1] + k3 * v[2]) / self.k2
        kv = np.where(self.zero_mode, 0.0, kv)
        out = np.stack([v[0] - k1 * kv, v[1] - k2 * kv, v[2] - k3 * kv])
        if self.channel:
            out[2] = 1j * out[2]
            out[2][..., 0] = 0.0
            out[2][..., -1] = 0.0
        return out

    def truncate(self, c):
        return c * self.keep

    def rhs(self, c):
        u = self.inverse(c)
        w = self.inverse(self.curl(c), ("odd", "odd", "even"))
        nl = np.cross(u, w, axis=0)
        return self.project(self.truncate(self.forward(nl)))

    def max_divergence(self, c):
        return float(np.max(np.abs(self.inverse(self.divergence(c)[None], ("even",))[0])))

    def velocity(self, c) -> VectorField:
        return VectorField(self.grid, self.inverse(c), VELOCITY_PARITY, admissible=True)


@dataclass
class SolverState:
    coeffs: np.ndarray
    time: float = 0.0
    step: int = 0


def leray_project(uhat, basis: SpectralBasis):
    return basis.project(uhat)


def rk4_step(state: SolverState, dt: float, basis: SpectralBasis) -> SolverState:
    """One classical RK4 step; raises DivergenceFailure on non-finite or runaway values."""
    if dt == 0:
        return SolverState(state.coeffs.copy(), state.time, state.step)
    c = state.coeffs
    a = basis.rhs(c)
    b = basis.rhs(c + 0.5 * dt * a)
    d = basis.rhs(c + 0.5 * dt * b)
    e = basis.rhs(c + dt * d)
    new = basis.project(c + dt / 6.0 * (a + 2 * b + 2 * d + e))
    if not np.all(np.isfinite(new)):
        raise DivergenceFailure(f"non-finite coefficients at step {state.step + 1}", state.time)
    return SolverState(new, state.time + dt, state.step + 1)


def cfl_number(u: VectorField, dt):
    g = u.grid
    return dt * float(np.max(sum(np.abs(u.data[i]) / g.spacing(i) for i in range(3))))


# -- initial conditions ----------------------------------------------------------------

def _require_torus(grid):
    if grid.domain.kind != "torus3" or not grid.transformable:
        raise UnsupportedGridError("this initial condition needs a torus grid")


def init_taylor_green(grid: Grid3, amplitude=1.0) -> VectorField:
    """``u = (sin x cos y cos z, -cos x sin y cos z, 0)``, rescaled to the periods."""
    _require_torus(grid)
    X, Y, Z = [2 * np.pi * c / L for c, L in zip(grid.mesh(), grid.lengths)]
    u = amplitude * np.stack([np.sin(X) * np.cos(Y) * np.cos(Z),
                              -np.cos(X) * np.sin(Y) * np.cos(Z), np.zeros_like(X)])
    return VectorField(grid, u, VELOCITY_PARITY, admissible=True)


def init_shear(grid: Grid3) -> VectorField:
    """Steady shear ``u = (sin z, 0, 0)``."""
    _require_torus(grid)
    Z = 2 * np.pi * grid.mesh()[2] / grid.lengths[2]
    u = np.stack([np.sin(Z), np.zeros_like(Z), np.zeros_like(Z)])
    return VectorField(grid, u, VELOCITY_PARITY, admissible=True)


def init_random_divfree(grid: Grid3, seed=0, spectrum_slope=-3.0, rms=1.0) -> VectorField:
    """Solenoidal random field with modal amplitudes ``~ |k|^((slope - 2) / 2)``.

    White noise is filtered to the dealiased band, shaped, projected and
    scaled to the requested rms. On the channel the z-basis gives
    ``u3 = 0`` on the walls exactly.
    """
    basis = SpectralBasis(grid)
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((3,) + grid.shape)
    if basis.channel:
        noise[2, :, :, 0] = 0.0
        noise[2, :, :, -1] = 0.0
    c = basis.forward(noise)
    kk = np.sqrt(basis.k[0] ** 2 + basis.k[1] ** 2 + basis.k[2] ** 2)
    env = np.where(kk > 0, np.where(kk > 0, kk, 1.0) ** ((spectrum_slope - 2.0) / 2.0), 0.0)
    c = basis.project(basis.truncate(c * env))
    u = basis.inverse(c)
    scale = np.sqrt(np.mean(u ** 2))
    if scale > 0:
        c = c * (rms / scale)
    return VectorField(grid, basis.inverse(c), VELOCITY_PARITY, admissible=True)


def init_channel_taylor_green(grid: Grid3, noise=0.1, seed=0) -> VectorField:
    """Taylor-Green cells fitted to the channel walls plus a random solenoidal perturbation."""
    if not grid.is_channel:
        raise UnsupportedGridError("needs a channel grid")
    X, Y, Z = grid.mesh()
    L1, L2, H = grid.lengths
    x, y, z = 2 * np.pi * X / L1, 2 * np.pi * Y / L2, np.pi * Z / H
    # u2 is scaled by L2 / L1 so that the field stays solenoidal for unequal periods
    u = np.stack([np.sin(x) * np.cos(y) * np.cos(z),
                  -np.cos(x) * np.sin(y) * np.cos(z) * (L2 / L1), np.zeros_like(x)])
    if noise:
        u = u + noise * init_random_divfree(grid, seed).data
    basis = SpectralBasis(grid)
    c = basis.project(basis.truncate(basis.forward(u)))
    return VectorField(grid, basis.inverse(c), VELOCITY_PARITY, admissible=True)


def _tube_vorticity(grid, separation, core, circulation, perturbation, sign_mirror=False):
    X, Y, Z = grid.mesh()
    L1, L2, L3 = grid.lengths
    x = 2 * np.pi * X / L1
    yc = 0.5 * L2 + 0.5 * separation - perturbation * np.cos(x)
    zc = 0.5 * L3
    dy = (Y - yc + 0.5 * L2) % L2 - 0.5 * L2
    dz = (Z - zc + 0.5 * L3) % L3 - 0.5 * L3
    prof = circulation / (np.pi * core ** 2) * np.exp(-(dy ** 2 + dz ** 2) / core ** 2)
    # tangent of the centre line y = yc(x)
    slope = perturbation * 2 * np.pi / L1 * np.sin(x)
    norm = np.sqrt(1.0 + slope ** 2)
    return np.stack([prof / norm, prof * slope / norm, np.zeros_like(prof)])


def init_antiparallel_tubes(grid: Grid3, separation=np.pi / 4, core_radius=0.3,
                            circulation=1.0, perturbation=0.1) -> VectorField:
    """Two counter-rotating Gaussian tubes along x1, mirror images about ``y = L2/2``.

    The second tube is the mirror image ``omega(Rx) = -R omega(x)`` of the
    first with ``R = diag(1, -1, 1)``. The velocity follows from the
    Biot-Savart law in Fourier space, which also removes the divergent
    part of the sampled vorticity.
    """
    _require_torus(grid)
    if not core_radius > 0:
        raise ParameterError("core radius must be positive")
    if separation <= 2.0 * core_radius:
        raise ParameterError(
            f"tubes overlap: separation {separation} <= 2 * core radius {2 * core_radius}")
    w1 = _tube_vorticity(grid, separation, core_radius, circulation, perturbation)
    # mirror: index j -> (N - j) mod N about y = L2 / 2
    n2 = grid.shape[1]
    idx = (-np.arange(n2)) % n2
    w2 = -w1[:, :, idx, :] * np.array([1.0, -1.0, 1.0])[:, None, None, None]
    w = w1 + w2
    basis = SpectralBasis(grid, dealias="none")
    wh = basis.forward(w)
    k1, k2, k3 = basis.k
    uh = np.stack([1j * k2 * wh[2] - 1j * k3 * wh[1],
                   1j * k3 * wh[0] - 1j * k1 * wh[2],
                   1j * k1 * wh[1] - 1j * k2 * wh[0]]) / basis.k2
    uh = basis.project(np.where(basis.zero_mode, 0.0, uh))
    return VectorField(grid, basis.inverse(uh), VELOCITY_PARITY, admissible=True)


def mirror_asymmetry(omega: VectorField) -> float:
    """``max |omega(Rx) + R omega(x)|`` for ``R = diag(1, -1, 1)`` on the grid."""
    n2 = omega.grid.shape[1]
    idx = (-np.arange(n2)) % n2
    R = np.array([1.0, -1.0, 1.0])[:, None, None, None]
    return float(np.max(np.abs(omega.data[:, :, idx, :] + R * omega.data)))


def initial_field(config: SolverConfig, grid: Grid3 | None = None) -> VectorField:
    grid = grid or config.make_grid()
    p = dict(config.params)
    kind = config.initial
    if kind == "taylor_green":
        return init_taylor_green(grid, p.get("amplitude", 1.0))
    if kind == "channel_taylor_green":
        return init_channel_taylor_green(grid, p.get("noise", 0.1), config.seed)
    if kind == "random":
        return init_random_divfree(grid, config.seed, p.get("spectrum_slope", -3.0), p.get("rms", 1.0))
    if kind == "tubes":
        return init_antiparallel_tubes(grid, p.get("separation", np.pi / 4), p.get("core_radius", 0.3),
                                       p.get("circulation", 1.0), p.get("perturbation", 0.1))
    if kind == "shear":
        return init_shear(grid)
    if kind == "zero":
        return VectorField(grid, np.zeros((3,) + grid.shape), VELOCITY_PARITY, admissible=True)
    raise ParameterError(f"unknown initial condition {kind!r}")


# -- driver ----------------------------------------------------------------------------

@dataclass
class RunSummary:
    steps: int
    t_final: float
    wall_clock: float
    termination: str
    max_divergence: float
    energy0: float
    energy_final: float
    message: str = ""
    cfl_max_seen: float = 0.0


def _energy(basis, c):
    u = basis.inverse(c)
    return 0.5 * float(np.sum(basis.grid.cell_weights() * np.sum(u * u, axis=0)))


def run(config: SolverConfig, callbacks=(), u0: VectorField | None = None,
        check_divergence_every=1) -> RunSummary:
    """Integrate to ``t_end``, calling ``cb(snapshot)`` every ``output_every`` steps.

    Raises
    ------
    DivergenceFailure
        With ``summary`` attached; snapshots already delivered stay valid.
    """
    t0 = time.perf_counter()
    grid = config.make_grid() if u0 is None else u0.grid
    basis = SpectralBasis(grid, config.dealias)
    u0 = u0 if u0 is not None else initial_field(config, grid)
    c = basis.project(basis.truncate(basis.forward(u0.data)))
    state = SolverState(c)
    nsteps = int(round(config.t_end / config.dt))
    limit = BLOWUP_FACTOR * max(1.0, float(np.max(np.abs(c))))
    e0 = _energy(basis, c)
    max_div = 0.0
    cfl_seen = 0.0

    def emit(st):
        nonlocal cfl_seen
        u = basis.velocity(st.coeffs)
        cfl = cfl_number(u, config.dt)
        cfl_seen = max(cfl_seen, cfl)
        if cfl > config.cfl_max:
            warnings.warn(f"CFL number {cfl:.3f} exceeds {config.cfl_max} at t={st.time:.4g}",
                          CFLWarning, stacklevel=3)
        snap = Snapshot(st.time, st.step, u)
        for cb in callbacks:
            cb(snap)

    emit(state)
    try:
        for _ in range(nsteps):
            new = rk4_step(state, config.dt, basis)
            if check_divergence_every and new.step % check_divergence_every == 0:
                div = basis.max_divergence(new.coeffs)
                max_div = max(max_div, div)
            if float(np.max(np.abs(new.coeffs))) > limit:
                raise DivergenceFailure(f"coefficients exceeded {limit:.3g} at step {new.step}",
                                        state.time)
            state = replace(new, time=new.step * config.dt)
            if state.step % config.output_every == 0 or state.step == nsteps:
                emit(state)
    except DivergenceFailure as exc:
        exc.summary = RunSummary(state.step, state.time, time.perf_counter() - t0, "divergence",
                                 max_div, e0, float("nan"), str(exc), cfl_seen)
        raise
    return RunSummary(state.step, state.time, time.perf_counter() - t0, "completed", max_div,
                      e0, _energy(basis, state.coeffs), "", cfl_seen)


def steady_shear_residual(grid: Grid3) -> float:
    """``max |P(u x omega)|`` for the shear; zero for a steady state."""
    u = init_shear(grid)
    basis = SpectralBasis(grid)
    return float(np.max(np.abs(basis.inverse(basis.rhs(basis.forward(u.data))))))


def vorticity(u: VectorField) -> VectorField:
    return curl(u, check=False)
