"""Differential operators and tangential/conormal norms on flat grids.

Vector ``L^inf`` norms use the component maximum,
``||v||_inf = max_i max_x |v_i(x)|``, and gradient norms the maximum over
all entries of the relevant block of the Jacobian. Grid maxima are lower
bounds of the true suprema.
"""
from __future__ import annotations

import itertools

import numpy as np

from .domains import ZRegion, weight_dz, weight_of_z
from .errors import UnimplementedOrderError, UnsupportedGridError
from .grid import (
    Grid3,
    ScalarField,
    VectorField,
    check_periodic,
    deriv,
    flip,
)

MAX_ORDER = 2


def _d(f, grid, axis, parity, order=1):
    return deriv(f, grid, axis, order, parity)[0]


def _check(field):
    grid = field.grid
    data = field.data if field.data.ndim == 4 else field.data[None]
    for axis, kind in enumerate(grid.kinds):
        if kind == "periodic":
            check_periodic(data, axis + 1)


def _components(field):
    if isinstance(field, VectorField):
        return [field.data[i] for i in range(3)], list(field.parity)
    if isinstance(field, ScalarField):
        return [field.data], [field.parity]
    raise TypeError("expected a ScalarField or VectorField")


def jacobian(u: VectorField, check=False) -> np.ndarray:
    """``J[i, j] = d_j u_i`` as an array of shape (3, 3) + grid.shape."""
    if check:
        _check(u)
    g = u.grid
    return np.stack([np.stack([_d(u.data[i], g, j, u.parity[i]) for j in range(3)])
                     for i in range(3)])


def curl_from_jacobian(J):
    return np.stack([J[2, 1] - J[1, 2], J[0, 2] - J[2, 0], J[1, 0] - J[0, 1]])


def curl(u: VectorField, check=True) -> VectorField:
    """Vorticity ``curl u``; spectral on periodic/parity axes, 6th-order fd otherwise."""
    if check:
        _check(u)
    g, p = u.grid, u.parity
    w1 = _d(u.data[2], g, 1, p[2]) - _d(u.data[1], g, 2, p[1])
    w2 = _d(u.data[0], g, 2, p[0]) - _d(u.data[2], g, 0, p[2])
    w3 = _d(u.data[1], g, 0, p[1]) - _d(u.data[0], g, 1, p[0])
    return VectorField(g, np.stack([w1, w2, w3]), (flip(p[1]), flip(p[0]), p[1]))


def divergence(u: VectorField, check=True) -> ScalarField:
    if check:
        _check(u)
    g, p = u.grid, u.parity
    div = sum(_d(u.data[i], g, i, p[i]) for i in range(3))
    return ScalarField(g, div, p[0])


def gradient(f: ScalarField, check=True) -> VectorField:
    if check:
        _check(f)
    g, p = f.grid, f.parity
    comps = [_d(f.data, g, i, p) for i in range(3)]
    return VectorField(g, np.stack(comps), (p, p, flip(p)))


# -- regions -------------------------------------------------------------------

def region_mask(grid: Grid3, region=None):
    """Boolean node mask for ``region`` (None, a ZRegion, or a mask array)."""
    if region is None:
        return np.ones(grid.shape, dtype=bool)
    if isinstance(region, ZRegion):
        z = grid.coords(2)
        return np.broadcast_to(region.contains(z, closed=True)[None, None, :], grid.shape)
    mask = np.asarray(region, dtype=bool)
    if mask.shape != grid.shape:
        raise ValueError("region mask does not match the grid")
    return mask


def _masked_max(a, mask):
    if not mask.any():
        return 0.0
    return float(np.max(np.abs(a[..., mask]))) if a.ndim > mask.ndim else float(np.max(np.abs(a[mask])))


def linf(field, region=None) -> float:
    """Component-max sup norm over the region's nodes."""
    comps, _ = _components(field)
    mask = region_mask(field.grid, region)
    return max(_masked_max(c, mask) for c in comps)


def linf_array(a, grid, region=None):
    return _masked_max(np.asarray(a), region_mask(grid, region))


# -- conormal derivatives -----------------------------------------------------

def multi_indices(m, tangential=False):
    """All ``alpha`` in N^3 with ``|alpha| <= m`` (``alpha_3 = 0`` if tangential)."""
    out = []
    for a in itertools.product(range(m + 1), repeat=3):
        if sum(a) <= m and not (tangential and a[2]):
            out.append(a)
    return sorted(out, key=lambda a: (sum(a), [-x for x in a]))


def weight_on_grid(grid: Grid3):
    """``|phi|`` and ``d|phi|/dz`` sampled on the z nodes (broadcastable)."""
    z = grid.coords(2)
    phi = weight_of_z(grid.domain, z, absolute=True)
    dphi = weight_dz(grid.domain, z, absolute=True)
    return phi[None, None, :], dphi[None, None, :]


def conormal_derivative(f, grid: Grid3, alpha, parity=None):
    """``Z^alpha f`` for ``Z = (d1, d2, |phi| dz)`` on a flat grid.

    The weight depends on z only, so the three fields commute and the
    horizontal derivatives are applied first. Two normal factors use
    ``Z3 Z3 f = phi (phi' f_z + phi f_zz)``.
    """
    a1, a2, a3 = alpha
    if a3 > MAX_ORDER:
        raise UnimplementedOrderError("Z3 applied more than twice")
    g = np.asarray(f, dtype=float)
    if a1:
        g = _d(g, grid, 0, parity, a1)
    if a2:
        g = _d(g, grid, 1, parity, a2)
    if a3 == 0:
        return g
    phi, dphi = weight_on_grid(grid)
    gz, pz = deriv(g, grid, 2, 1, parity)
    if a3 == 1:
        return phi * gz
    gzz = _d(gz, grid, 2, pz)
    return phi * (dphi * gz + phi * gzz)


def conormal_arrays(field, m, tangential=False):
    """``{alpha: [Z^alpha f_i for each component]}`` for all ``|alpha| <= m``."""
    if m > MAX_ORDER or m < 0:
        raise UnimplementedOrderError(f"order m={m} not implemented (m <= {MAX_ORDER})")
    grid = field.grid
    if not grid.domain.is_flat:
        raise UnsupportedGridError("use curved.ball_norm on the ball")
    comps, parities = _components(field)
    return {alpha: [conormal_derivative(c, grid, alpha, par) for c, par in zip(comps, parities)]
            for alpha in multi_indices(m, tangential)}


def terms_from_arrays(arrays, grid, p=np.inf, region=None):
    """Reduce conormal derivative arrays to per-multi-index norm contributions."""
    mask = region_mask(grid, region)
    out = {}
    if np.isfinite(p):
        weights = grid.cell_weights()
        for alpha, vals in arrays.items():
            out[alpha] = float(sum(np.sum((weights * np.abs(v) ** p)[mask]) for v in vals))
    else:
        for alpha, vals in arrays.items():
            out[alpha] = max(_masked_max(v, mask) for v in vals)
    return out


def norm_from_terms(terms, p=np.inf, m=None, tangential=False):
    """Sum the contributions with ``|alpha| <= m`` (and ``alpha_3 = 0`` if tangential)."""
    sel = [v for a, v in terms.items()
           if (m is None or sum(a) <= m) and not (tangential and a[2])]
    if np.isfinite(p):
        return float(sum(sel) ** (1.0 / p))
    return float(sum(sel))


def norm_terms(field, m, p=np.inf, tangential=False, region=None):
    """Per-multi-index contributions to the W^{m,p} norm.

    Returns ``{alpha: value}`` where value is the component-max sup for
    ``p = inf`` and ``sum_i sum_x w |Z^alpha f_i|^p`` otherwise.
    """
    return terms_from_arrays(conormal_arrays(field, m, tangential), field.grid, p, region)


def _norm(field, m, p, tangential, region):
    return norm_from_terms(norm_terms(field, m, p, tangential, region), p)


def norm_w_tan(field, m=1, p=np.inf, region=None) -> float:
    """Tangential Sobolev norm: multi-indices with ``alpha_3 = 0``, ``|alpha| <= m``."""
    return _norm(field, m, p, True, region)


def norm_w_co(field, m=1, p=np.inf, region=None) -> float:
    """Conormal Sobolev norm including the weighted normal field ``Z3``."""
    return _norm(field, m, p, False, region)


# -- derived quantities used by the monitor ---------------------------------------

def linf_grad_h(J, grid, region=None):
    """``max |d_j u_i|`` over horizontal j in {1, 2}."""
    return linf_array(J[:, :2], grid, region)


def linf_grad(J, grid, region=None):
    return linf_array(J, grid, region)


def deformation_sum(J, grid, region=None):
    """``sum_{i,j} ||d_i u_j + d_j u_i||_inf`` (nine terms, symmetric pairs twice)."""
    total = 0.0
    for i in range(3):
        for j in range(3):
            total += linf_array(J[j, i] + J[i, j], grid, region)
    return total


def energy(u: VectorField) -> float:
    w = u.grid.cell_weights()
    return 0.5 * float(np.sum(w * np.sum(u.data ** 2, axis=0)))


def enstrophy(omega: VectorField) -> float:
    w = omega.grid.cell_weights()
    return 0.5 * float(np.sum(w * np.sum(omega.data ** 2, axis=0)))


def helicity(u: VectorField, omega: VectorField) -> float:
    w = u.grid.cell_weights()
    return float(np.sum(w * np.sum(u.data * omega.data, axis=0)))
