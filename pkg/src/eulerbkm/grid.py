"""Structured grids, sampled fields and one-dimensional derivative operators.

Each axis of a :class:`Grid3` is one of

``periodic``
    uniform nodes ``x_j = x0 + j L / N`` (endpoint excluded), Fourier
    differentiation;
``parity``
    nodes ``x_j = x0 + j L / (N - 1)`` including both walls, cosine/sine
    series chosen per component from its parity about the walls;
``fd``
    the same inclusive nodes, differentiated with 6th-order finite
    differences (centred in the interior, one-sided near the ends).

First derivatives on periodic axes drop the Nyquist mode; higher
derivatives are repeated first derivatives, so the convention is the same
for every order.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft as sfft

from .domains import DomainSpec
from .errors import PeriodicityError, UnsupportedGridError

AXIS_KINDS = ("periodic", "parity", "fd")
FD_ORDER = 6
MIN_POINTS = 4

VELOCITY_PARITY = ("even", "even", "odd")
VORTICITY_PARITY = ("odd", "odd", "even")


def flip(parity):
    if parity is None:
        return None
    return "odd" if parity == "even" else "even"


@dataclass(frozen=True)
class Grid3:
    shape: tuple
    lengths: tuple
    domain: DomainSpec
    kinds: tuple = ("periodic", "periodic", "periodic")
    origins: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        shape = tuple(int(n) for n in self.shape)
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "lengths", tuple(float(L) for L in self.lengths))
        object.__setattr__(self, "origins", tuple(float(o) for o in self.origins))
        object.__setattr__(self, "kinds", tuple(self.kinds))
        if len(shape) != 3 or min(shape) < MIN_POINTS:
            raise UnsupportedGridError(f"need at least {MIN_POINTS} points per axis, got {shape}")
        for k in self.kinds:
            if k not in AXIS_KINDS:
                raise UnsupportedGridError(f"unknown axis kind {k!r}")
        for n, k in zip(shape, self.kinds):
            if k == "fd" and n < FD_ORDER + 2:
                raise UnsupportedGridError(f"fd axes need at least {FD_ORDER + 2} points")

    # -- geometry ---------------------------------------------------------
    def coords(self, axis):
        n, L, x0 = self.shape[axis], self.lengths[axis], self.origins[axis]
        if self.kinds[axis] == "periodic":
            return x0 + np.arange(n) * (L / n)
        return x0 + np.linspace(0.0, L, n)

    def spacing(self, axis):
        n, L = self.shape[axis], self.lengths[axis]
        return L / n if self.kinds[axis] == "periodic" else L / (n - 1)

    def mesh(self):
        return np.meshgrid(*(self.coords(a) for a in range(3)), indexing="ij")

    def points(self):
        return np.stack(self.mesh(), axis=-1)

    def quad_weights(self, axis):
        """Nodal quadrature weights: uniform on periodic axes, trapezoid otherwise."""
        n, h = self.shape[axis], self.spacing(axis)
        w = np.full(n, h)
        if self.kinds[axis] != "periodic":
            w[0] = w[-1] = 0.5 * h
        return w

    def cell_weights(self):
        w = [self.quad_weights(a) for a in range(3)]
        return w[0][:, None, None] * w[1][None, :, None] * w[2][None, None, :]

    @property
    def transformable(self):
        return all(k in ("periodic", "parity") for k in self.kinds)

    @property
    def is_channel(self):
        return self.kinds[2] == "parity"


# -- factories -----------------------------------------------------------------

def torus_grid(n, length=2 * np.pi):
    n = np.broadcast_to(np.asarray(n), (3,))
    L = np.broadcast_to(np.asarray(length, dtype=float), (3,))
    return Grid3(tuple(n), tuple(L), DomainSpec.torus(tuple(L)))


def channel_grid(n1, n2, n3, lengths=(2 * np.pi, 2 * np.pi, np.pi), z_kind="parity"):
    """Slab ``T^2 x [0, H]`` with ``n3`` nodes including both walls."""
    L1, L2, H = lengths
    dom = DomainSpec.slab_periodic(L1, L2, H)
    return Grid3((n1, n2, n3), (L1, L2, H), dom, ("periodic", "periodic", z_kind))


def half_space_grid(n1, n2, n3, lengths=(2 * np.pi, 2 * np.pi, 4.0)):
    """Periodic horizontal window over the truncated half-space ``0 <= z <= Z``."""
    return Grid3((n1, n2, n3), lengths, DomainSpec.half_space(),
                 ("periodic", "periodic", "fd"))


def whole_space_grid(n1, n2, n3, lengths=(2 * np.pi, 2 * np.pi, 8.0)):
    """Periodic horizontal window over ``-Z/2 <= z <= Z/2``."""
    return Grid3((n1, n2, n3), lengths, DomainSpec.whole_space(),
                 ("periodic", "periodic", "fd"), (0.0, 0.0, -0.5 * lengths[2]))


def slab_fd_grid(n1, n2, n3, lengths=(2 * np.pi, 2 * np.pi, 1.0), periodic_window=True):
    L1, L2, H = lengths
    dom = (DomainSpec.slab_periodic(L1, L2, H) if periodic_window
           else DomainSpec.slab_infinite(H))
    return Grid3((n1, n2, n3), lengths, dom, ("periodic", "periodic", "fd"))


def ball_grid(n, half_width=1.0):
    """Cartesian box ``[-w, w]^3`` around the unit ball with fd axes."""
    w = float(half_width)
    return Grid3((n, n, n), (2 * w,) * 3, DomainSpec.ball(), ("fd",) * 3, (-w,) * 3)


# -- fields --------------------------------------------------------------------

def _frozen(a):
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ScalarField:
    grid: Grid3
    data: np.ndarray
    parity: str | None = "even"

    def __post_init__(self):
        object.__setattr__(self, "data", _frozen(self.data))
        if self.data.shape != self.grid.shape:
            raise ValueError(f"sample shape {self.data.shape} != grid {self.grid.shape}")


@dataclass(frozen=True, eq=False)
class VectorField:
    """Three components sampled on a grid; ``parity`` matters on channel axes."""

    grid: Grid3
    data: np.ndarray
    parity: tuple = VELOCITY_PARITY
    admissible: bool = False

    def __post_init__(self):
        object.__setattr__(self, "data", _frozen(self.data))
        if self.data.shape != (3,) + self.grid.shape:
            raise ValueError(f"sample shape {self.data.shape} != (3,) + {self.grid.shape}")
        object.__setattr__(self, "parity", tuple(self.parity))

    def component(self, i) -> ScalarField:
        return ScalarField(self.grid, self.data[i], self.parity[i])

    def __getitem__(self, i):
        return self.data[i]


# -- finite differences --------------------------------------------------------

def fornberg_weights(z0, xs, m):
    """Weights of the derivatives 0..m at ``z0`` on nodes ``xs`` (Fornberg 1988)."""
    n = len(xs)
    c = np.zeros((n, m + 1))
    c1, c4 = 1.0, xs[0] - z0
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2, c5, c4 = 1.0, c4, xs[i] - z0
        for j in range(i):
            c3 = xs[i] - xs[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c


@lru_cache(maxsize=64)
def fd_matrix(n, h, deriv=1, order=FD_ORDER):
    """Dense ``n x n`` differentiation matrix on uniform nodes with spacing h.

    Each row uses ``order + deriv`` consecutive nodes, as centred as the
    ends of the axis allow.
    """
    width = order + deriv
    if n < width:
        raise UnsupportedGridError(f"fd stencil needs {width} points, axis has {n}")
    xs = np.arange(n, dtype=float)
    D = np.zeros((n, n))
    half = width // 2
    for i in range(n):
        start = min(max(i - half, 0), n - width)
        idx = np.arange(start, start + width)
        D[i, idx] = fornberg_weights(float(i), xs[idx], deriv)[:, deriv]
    D /= h ** deriv
    D.setflags(write=False)
    return D


# -- one-dimensional derivatives ----------------------------------------------

def check_periodic(f, axis, ratio=4.0):
    """Reject samples whose wrap-around jump dwarfs every interior increment."""
    f = np.asarray(f)
    inner = np.max(np.abs(np.diff(f, axis=axis))) if f.shape[axis] > 1 else 0.0
    first = np.take(f, 0, axis=axis)
    last = np.take(f, -1, axis=axis)
    jump = np.max(np.abs(first - last))
    scale = max(np.max(np.abs(f)), 1e-300)
    if jump > ratio * inner and jump > 1e-10 * scale:
        raise PeriodicityError(
            f"samples along axis {axis} are not periodic "
            f"(wrap jump {jump:.3g} vs largest step {inner:.3g})")


def _periodic_deriv(f, axis, L, order):
    n = f.shape[axis]
    fh = sfft.rfft(f, axis=axis)
    k = 2.0 * np.pi / L * np.arange(n // 2 + 1)
    if n % 2 == 0:
        k[-1] = 0.0
    mult = (1j * k) ** order
    shape = [1] * f.ndim
    shape[axis] = -1
    return sfft.irfft(fh * mult.reshape(shape), n=n, axis=axis)


def cos_analysis(f, axis=-1):
    """Coefficients a_k with ``f_n = sum_k a_k cos(pi k n / M)``, k = 0..M."""
    f = np.moveaxis(np.asarray(f), axis, -1)
    M = f.shape[-1] - 1
    a = sfft.dct(f, type=1, axis=-1) / M
    a[..., 0] *= 0.5
    a[..., M] *= 0.5
    return np.moveaxis(a, -1, axis)


def cos_synthesis(a, axis=-1):
    a = np.moveaxis(np.asarray(a), axis, -1)
    M = a.shape[-1] - 1
    y = a * M
    y[..., 0] *= 2.0
    y[..., M] *= 2.0
    return np.moveaxis(sfft.idct(y, type=1, axis=-1), -1, axis)


def sin_analysis(f, axis=-1):
    """Coefficients b_k with ``f_n = sum_k b_k sin(pi k n / M)``; b_0 = b_M = 0.

    Wall samples are ignored (they vanish for odd fields).
    """
    f = np.moveaxis(np.asarray(f), axis, -1)
    M = f.shape[-1] - 1
    b = np.zeros(f.shape, dtype=np.result_type(f, float))
    b[..., 1:M] = sfft.dst(f[..., 1:M], type=1, axis=-1) / M
    return np.moveaxis(b, -1, axis)


def sin_synthesis(b, axis=-1):
    b = np.moveaxis(np.asarray(b), axis, -1)
    M = b.shape[-1] - 1
    f = np.zeros(b.shape, dtype=b.dtype)
    f[..., 1:M] = sfft.idst(b[..., 1:M] * M, type=1, axis=-1)
    return np.moveaxis(f, -1, axis)


def parity_analysis(f, parity, axis=-1):
    return cos_analysis(f, axis) if parity == "even" else sin_analysis(f, axis)


def parity_synthesis(c, parity, axis=-1):
    return cos_synthesis(c, axis) if parity == "even" else sin_synthesis(c, axis)


def parity_wavenumbers(M, L):
    return np.pi / L * np.arange(M + 1)


def parity_deriv_coeffs(c, parity, L, axis=-1):
    """Differentiate cosine/sine coefficients; returns (coeffs, new parity)."""
    c = np.moveaxis(np.asarray(c), axis, -1)
    M = c.shape[-1] - 1
    kap = parity_wavenumbers(M, L)
    if parity == "even":
        out = -kap * c
        out[..., 0] = 0.0
        out[..., M] = 0.0
    else:
        out = kap * c
    return np.moveaxis(out, -1, axis), flip(parity)


def _parity_deriv(f, axis, L, order, parity):
    if parity not in ("even", "odd"):
        raise UnsupportedGridError("channel-axis derivatives need a component parity")
    c = parity_analysis(f, parity, axis)
    for _ in range(order):
        c, parity = parity_deriv_coeffs(c, parity, L, axis)
    return parity_synthesis(c, parity, axis), parity


def _fd_deriv(f, axis, h, order):
    D = fd_matrix(f.shape[axis], h, order)
    return np.moveaxis(np.tensordot(D, np.moveaxis(f, axis, 0), axes=(1, 0)), 0, axis)


def deriv(f, grid: Grid3, axis, order=1, parity=None):
    """Derivative of samples ``f`` along ``axis``; returns (values, parity)."""
    if order == 0:
        return np.asarray(f, dtype=float), parity
    f = np.asarray(f, dtype=float)
    kind = grid.kinds[axis]
    if kind == "periodic":
        return _periodic_deriv(f, axis, grid.lengths[axis], order), parity
    if kind == "parity":
        return _parity_deriv(f, axis, grid.lengths[axis], order, parity)
    return _fd_deriv(f, axis, grid.spacing(axis), order), parity
