"""Frame calculus on ball charts: normal-derivative reconstruction and the
chart form of the vortex stretching term.

Fields live on a Cartesian box grid around the unit ball (``ball_grid``)
and are differentiated with 6th-order finite differences. Frame
components are ``u^psi = g^T u`` and chart derivatives are
``d^psi_l = g_jl d_j``.

Normal derivatives of the tangential frame components follow from the
vorticity and tangential derivatives alone:

    omega - L = tau_bar d3 u1^psi - tau d3 u2^psi,
    L_i = eps_ijk (d_j g_km) u_m^psi + eps_ijk sum_{l<3} g_jl g_km d_l u_m^psi,

so ``d3 u1^psi = (omega - L) . tau_bar`` and ``d3 u2^psi = -(omega - L) . tau``.
The normal component follows from ``div u = 0``:

    d3 u3^psi = -d1 u1^psi - d2 u2^psi - (div g_k) u_k^psi.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .calculus import curl_from_jacobian, jacobian
from .charts import Atlas, Chart
from .errors import ConditioningError, ContextError, UnimplementedOrderError
from .grid import VectorField, _fd_deriv

_EPS3 = np.zeros((3, 3, 3))
_EPS3[0, 1, 2] = _EPS3[1, 2, 0] = _EPS3[2, 0, 1] = 1.0
_EPS3[0, 2, 1] = _EPS3[2, 1, 0] = _EPS3[1, 0, 2] = -1.0


def sample_vector(grid, func) -> VectorField:
    """Sample ``func(x) -> (..., 3)`` at the grid points (x of shape (..., 3))."""
    x = grid.points()
    vals = np.asarray(func(x), dtype=float)
    return VectorField(grid, np.moveaxis(vals, -1, 0), (None, None, None))


def _require_ball(u):
    if u.grid.domain.kind != "ball":
        raise ContextError("chart calculus needs a field sampled on a ball grid")


def _grad_fd(f, grid):
    return np.stack([_fd_deriv(f, a, grid.spacing(a), 1) for a in range(3)], axis=-1)


@dataclass
class ChartData:
    """Frame quantities on the nodes of one chart (flattened to the mask)."""

    mask: np.ndarray
    x: np.ndarray
    g: np.ndarray      # (n, 3, 3)
    dg: np.ndarray     # (n, 3, 3, 3), dg[:, i, m, j] = d_j g_im
    u: np.ndarray      # (n, 3)
    J: np.ndarray      # (n, 3, 3), J[:, i, j] = d_j u_i
    omega: np.ndarray  # (n, 3)


def chart_data(chart: Chart, u: VectorField, omega=None, J=None, tol=1e-10) -> ChartData:
    if chart is None:
        raise ContextError("a Chart is required for the curved context")
    _require_ball(u)
    grid = u.grid
    pts = grid.points()
    mask = chart.contains(pts)
    x = pts[mask]
    g = chart.frame(x)
    orth = np.max(np.abs(np.einsum("nij,nik->njk", g, g) - np.eye(3))) if len(x) else 0.0
    if len(x):
        v = chart.ref - (x @ chart.ref / np.linalg.norm(x, axis=1))[:, None] \
            * x / np.linalg.norm(x, axis=1)[:, None]
        vmin = float(np.min(np.linalg.norm(v, axis=1)))
    else:
        vmin = 1.0
    if orth > tol or vmin < 1e-6:
        raise ConditioningError(
            f"chart frame ill-conditioned (orthogonality error {orth:.2e}, min |v| {vmin:.2e})")
    if J is None:
        J = jacobian(u)
    if omega is None:
        w = curl_from_jacobian(J)
    else:
        w = omega.data if isinstance(omega, VectorField) else np.asarray(omega)
    Jm = np.moveaxis(J[:, :, mask], -1, 0)
    return ChartData(mask, x, g, chart.frame_jacobian(x), u.data[:, mask].T, Jm, w[:, mask].T)


def frame_tangential_derivatives(cd: ChartData):
    """``T[:, m, l] = d^psi_l u_m^psi`` for all l via the product rule."""
    # d_j u_m^psi = dg[k, m, j] u_k + g_km J[k, j]
    du_psi = np.einsum("nkmj,nk->nmj", cd.dg, cd.u) + np.einsum("nkm,nkj->nmj", cd.g, cd.J)
    return np.einsum("nmj,njl->nml", du_psi, cd.g)


def _comp_max(a):
    return float(np.max(np.abs(a))) if a.size else 0.0


def w1_tan_chart(cd: ChartData):
    """``||u|| + ||d_tau u|| + ||d_tau_bar u||`` (component max on the chart nodes)."""
    d = np.einsum("nij,njl->nil", cd.J, cd.g)
    return _comp_max(cd.u) + _comp_max(d[:, :, 0]) + _comp_max(d[:, :, 1])


@dataclass
class NormalReconstruction:
    d3_u1: np.ndarray
    d3_u2: np.ndarray
    dn_un: np.ndarray
    direct: np.ndarray      # (n, 3) comparison values of d3 u_m^psi
    error: float            # max |reconstructed - direct|
    normal_norm: float      # ||d_n u||_inf on the chart
    omega_norm: float
    w1_tan: float
    ratio: float
    mask: np.ndarray

    @property
    def reconstructed(self):
        return np.column_stack([self.d3_u1, self.d3_u2, self.dn_un])


def reconstruct_normal(cd: ChartData):
    """Normal derivatives of ``u^psi`` from omega and tangential data only."""
    T = frame_tangential_derivatives(cd)
    u_psi = np.einsum("nkm,nk->nm", cd.g, cd.u)
    L = (np.einsum("ijk,nkmj,nm->ni", _EPS3, cd.dg, u_psi)
         + np.einsum("ijk,njl,nkm,nml->ni", _EPS3, cd.g[:, :, :2], cd.g, T[:, :, :2]))
    r = cd.omega - L
    tau, tbar = cd.g[:, :, 0], cd.g[:, :, 1]
    d3u1 = np.einsum("ni,ni->n", r, tbar)
    d3u2 = -np.einsum("ni,ni->n", r, tau)
    div_g = np.einsum("nkmk->nm", cd.dg)
    d3u3 = -T[:, 0, 0] - T[:, 1, 1] - np.einsum("nm,nm->n", div_g, u_psi)
    return d3u1, d3u2, d3u3


def normal_reconstruction(chart: Chart, u: VectorField, omega=None, exact=None) -> NormalReconstruction:
    """Reconstruct ``d3 u1^psi``, ``d3 u2^psi`` and ``d_n u_n`` on the chart.

    Parameters
    ----------
    exact : callable, optional
        ``exact(x) -> (u, J)`` giving the velocity and its Jacobian
        ``J[..., i, j] = d_j u_i`` at points ``x``. When given, the
        comparison value is the exact normal derivative. Otherwise the
        sampled frame components ``g^T u`` are differentiated along ``n``
        with finite differences, which is much less accurate near the
        region where the extended frame turns quickly.
    """
    cd = chart_data(chart, u, omega)
    d3u1, d3u2, d3u3 = reconstruct_normal(cd)
    recon = np.column_stack([d3u1, d3u2, d3u3])
    n = cd.g[:, :, 2]
    if exact is not None:
        ue, Je = exact(cd.x)
        direct = analytic_normal_derivatives(chart, cd.x, ue, Je)
    else:
        grid = u.grid
        g_all = chart.frame(grid.points())
        u_psi_all = np.einsum("...km,k...->m...", g_all, u.data)
        direct = np.column_stack([
            np.einsum("nj,nj->n", _grad_fd(u_psi_all[m], grid)[cd.mask], n) for m in range(3)])
    err = _comp_max(recon - direct)
    dn_u = np.einsum("nij,nj->ni", cd.J, n)
    normal_norm = _comp_max(dn_u)
    wn = _comp_max(cd.omega)
    w1 = w1_tan_chart(cd)
    denom = wn + w1
    ratio = normal_norm / denom if denom > 0 else 0.0
    return NormalReconstruction(d3u1, d3u2, d3u3, direct, err, normal_norm, wn, w1, ratio, cd.mask)


def analytic_normal_derivatives(chart: Chart, x, u, J):
    """``d3 u_m^psi`` from exact ``u`` and Jacobian ``J[..., i, j]`` at points ``x``."""
    g = chart.frame(x)
    dg = chart.frame_jacobian(x)
    du_psi = np.einsum("nkmj,nk->nmj", dg, u) + np.einsum("nkm,nkj->nmj", g, J)
    return np.einsum("nmj,nj->nm", du_psi, g[:, :, 2])


@dataclass
class CurvedStretchSplit:
    full: np.ndarray
    mixed_normal: np.ndarray    # sum over tangential alpha, normal derivative in the coefficient
    mixed_tangential: np.ndarray  # sum over tangential beta, times d3 u
    rest: np.ndarray            # L-bar
    residual: float
    bound_ratio: float
    mask: np.ndarray


def curved_stretch_split(chart: Chart, u: VectorField, omega=None) -> CurvedStretchSplit:
    """Split ``omega . grad u`` on a chart into two mixed normal-tangential sums and a rest.

    With ``d3`` the normal frame derivative and alpha, beta tangential::

        A = sum_a [g_a . (n x w)] d_a u,            w = sum_m g_m d3 u_m^psi
        B = sum_b [n . (g_b x d_b u)] d3 u
        L = sum_a [g_a . (n x q)] d_a u + sum_{a,b} [g_a . (g_b x d_b u)] d_a u,
            q = sum_m (d3 g_m) u_m^psi

    The residual compares ``A + B + L`` with ``omega . grad u`` built from the curl.
    """
    cd = chart_data(chart, u, omega)
    g, n = cd.g, cd.g[:, :, 2]
    full = np.einsum("ni,nci->nc", cd.omega, cd.J)
    d_psi = np.einsum("ncj,njl->ncl", cd.J, g)  # d^psi_l u (Cartesian components)
    u_psi = np.einsum("nkm,nk->nm", g, cd.u)
    dg3 = np.einsum("nkmj,nj->nkm", cd.dg, n)    # d3 of frame columns
    d3u_psi = np.einsum("nkm,nk->nm", dg3, cd.u) + np.einsum("nkm,nk->nm", g, d_psi[:, :, 2])
    w = np.einsum("nkm,nm->nk", g, d3u_psi)
    q = np.einsum("nkm,nm->nk", dg3, u_psi)
    A = np.zeros_like(full)
    B = np.zeros_like(full)
    Lb = np.zeros_like(full)
    for a in range(2):
        ga = g[:, :, a]
        A += np.einsum("ni,ni->n", ga, np.cross(n, w))[:, None] * d_psi[:, :, a]
        Lb += np.einsum("ni,ni->n", ga, np.cross(n, q))[:, None] * d_psi[:, :, a]
        for b in range(2):
            coeff = np.einsum("ni,ni->n", ga, np.cross(g[:, :, b], d_psi[:, :, b]))
            Lb += coeff[:, None] * d_psi[:, :, a]
    for b in range(2):
        coeff = np.einsum("ni,ni->n", n, np.cross(g[:, :, b], d_psi[:, :, b]))
        B += coeff[:, None] * d_psi[:, :, 2]
    residual = _comp_max(full - A - B - Lb)
    W = w1_tan_chart(cd)
    wn = _comp_max(cd.omega)
    denom = wn * W + W * W
    ratio = _comp_max(full) / denom if denom > 0 else 0.0
    return CurvedStretchSplit(full, A, B, Lb, residual, ratio, cd.mask)


# -- norms on the ball -----------------------------------------------------------------

def _chart_fields(chart, x, J, u, conormal):
    g = chart.frame(x)
    d = np.einsum("nij,njl->nil", J, g)
    out = [u, d[:, :, 0], d[:, :, 1]]
    if conormal:
        out.append(chart.weight(x)[:, None] * d[:, :, 2])
    return out


def ball_norm(u: VectorField, atlas: Atlas, m=1, p=np.inf, conormal=True, members=None):
    """Chart-summed ``W^{m,p}_tan`` / ``W^{m,p}_co`` norm on the unit ball.

    ``||f|| = ||f||_{W^{m,p}(U0)} + sum_i sum_{|alpha|<=m} ||Z^alpha f||_{L^p(U_i)}``
    with ``Z = (d_tau, d_tau_bar, phi d_n)`` on each cap. ``members``
    restricts the sum to a subset of {0 (interior), 1..n (caps)}.
    """
    if m > 1 or m < 0:
        raise UnimplementedOrderError("ball norms are implemented for m <= 1")
    _require_ball(u)
    grid = u.grid
    pts = grid.points()
    r = np.linalg.norm(pts, axis=-1)
    J = jacobian(u) if m else None
    w = grid.cell_weights()
    members = range(len(atlas.charts) + 1) if members is None else members

    def norm(vals, wts):
        if not np.isfinite(p):
            return _comp_max(vals)
        return float(np.sum(wts[:, None] * np.abs(vals) ** p) ** (1.0 / p))

    total = 0.0
    for i in members:
        if i == 0:
            mask = r < atlas.interior_outer
            fields = [u.data[:, mask].T]
            if m:
                fields += [J[:, j][:, mask].T for j in range(3)]
        else:
            chart = atlas.charts[i - 1]
            mask = chart.contains(pts) & (r <= 1.0)
            x = pts[mask]
            uu = u.data[:, mask].T
            if m:
                fields = _chart_fields(chart, x, np.moveaxis(J[:, :, mask], -1, 0), uu, conormal)
            else:
                fields = [uu]
        total += sum(norm(f, w[mask]) for f in fields)
    return total


# -- manufactured ball fields with exact Jacobians ---------------------------------

def rigid_rotation(x):
    """``u = e3 x x`` and its constant Jacobian."""
    x = np.asarray(x, dtype=float)
    u = np.stack([-x[..., 1], x[..., 0], np.zeros(x.shape[:-1])], axis=-1)
    J = np.zeros(x.shape[:-1] + (3, 3))
    J[..., 0, 1] = -1.0
    J[..., 1, 0] = 1.0
    return u, J


def gaussian_swirl(x):
    """``u = curl(0, 0, psi)`` with ``psi = -exp(-|x|^2) / 2``; tangent to spheres."""
    x = np.asarray(x, dtype=float)
    f = np.exp(-np.sum(x * x, axis=-1))
    u = np.stack([f * x[..., 1], -f * x[..., 0], np.zeros_like(f)], axis=-1)
    J = np.zeros(x.shape[:-1] + (3, 3))
    for j in range(3):
        J[..., 0, j] = -2.0 * f * x[..., j] * x[..., 1]
        J[..., 1, j] = 2.0 * f * x[..., j] * x[..., 0]
    J[..., 0, 1] += f
    J[..., 1, 0] -= f
    return u, J


BALL_FIELDS = {"rigid_rotation": rigid_rotation, "gaussian_swirl": gaussian_swirl}
