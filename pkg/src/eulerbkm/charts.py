"""Boundary charts and a compatible covering of the unit ball.

A cap chart is centred on a unit axis ``c``. Its neighbourhood is the part
of the shell ``inner <= |x| <= 1`` within ``angular_radius`` of ``c``; in
coordinates rotated so that ``c`` is the third axis, the sphere is the graph
``psi(s1, s2) = sqrt(1 - s1^2 - s2^2)``.

The frame ``(tau, tau_bar, n)`` is extended off the sphere by
``n = x / |x|``, ``tau`` = normalized projection of a fixed unit vector
``a`` perpendicular to ``c`` onto the plane normal to ``n``, and
``tau_bar = n x tau``. The frame matrix ``g`` has these as columns, so
``d_i = g_ij d^psi_j`` and ``u = g u^psi``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domains import smoothstep, smoothstep_dt
from .errors import CoverageError, GraphFailureError, InvalidIntervalError

_EPS_V = 1e-300


def _unit(v):
    v = np.asarray(v, dtype=float)
    nrm = np.linalg.norm(v)
    if nrm == 0:
        raise ValueError("zero vector")
    return v / nrm


def _perpendicular(c):
    e = np.eye(3)[int(np.argmin(np.abs(c)))]
    return _unit(e - np.dot(e, c) * c)


@dataclass(frozen=True, eq=False)
class Chart:
    axis: np.ndarray
    angular_radius: float
    inner_radius: float
    ref: np.ndarray

    @property
    def rotation(self):
        """Columns: local s1, s2 and the cap axis, in ambient coordinates."""
        return np.column_stack([self.ref, np.cross(self.axis, self.ref), self.axis])

    def psi(self, s1, s2):
        r2 = np.asarray(s1) ** 2 + np.asarray(s2) ** 2
        if np.any(r2 > np.sin(self.angular_radius) ** 2 + 1e-12):
            raise GraphFailureError("point outside the cap's graph domain")
        return np.sqrt(1.0 - r2)

    def weight(self, x):
        """Distance to the unit sphere."""
        return 1.0 - np.linalg.norm(x, axis=-1)

    def contains(self, x, tol=1e-12):
        x = np.asarray(x, dtype=float)
        r = np.linalg.norm(x, axis=-1)
        with np.errstate(invalid="ignore", divide="ignore"):
            cosang = np.where(r > 0, x @ self.axis / np.where(r > 0, r, 1.0), -1.0)
        return ((r >= self.inner_radius - tol) & (r <= 1.0 + tol)
                & (cosang >= np.cos(self.angular_radius) - tol))

    def frame(self, x):
        """Frame matrix ``g`` with columns (tau, tau_bar, n): shape (..., 3, 3)."""
        return self._frame(np.asarray(x, dtype=float))[0]

    def _frame(self, x):
        r = np.linalg.norm(x, axis=-1)[..., None]
        n = x / np.maximum(r, _EPS_V)
        a = self.ref
        an = (n @ a)[..., None]
        v = a - an * n
        vn = np.maximum(np.linalg.norm(v, axis=-1)[..., None], 1e-150)
        tau = v / vn
        tbar = np.cross(n, tau)
        g = np.stack([tau, tbar, n], axis=-1)
        return g, r, n, v, vn, tau, tbar

    def frame_jacobian(self, x):
        """``dg[..., i, m, j] = d_j g_im`` (derivative of column m, entry i)."""
        x = np.asarray(x, dtype=float)
        g, r, n, v, vn, tau, tbar = self._frame(x)
        eye = np.eye(3)
        dn = (eye - n[..., :, None] * n[..., None, :]) / np.maximum(r, _EPS_V)[..., None]
        a = self.ref
        adn = np.einsum("k,...kj->...j", a, dn)  # d_j (a . n)
        an = (n @ a)[..., None, None]
        dv = -n[..., :, None] * adn[..., None, :] - an * dn
        dtau = (dv - tau[..., :, None] * np.einsum("...k,...kj->...j", tau, dv)[..., None, :]) \
            / vn[..., None]
        # d_j (n x tau) = d_j n x tau + n x d_j tau, column-wise in j
        dtbar = (np.cross(dn, tau[..., :, None], axisa=-2, axisb=-2, axisc=-2)
                 + np.cross(n[..., :, None], dtau, axisa=-2, axisb=-2, axisc=-2))
        return np.stack([dtau, dtbar, dn], axis=-2)

    def bump(self, x):
        """Angular bump: 1 on the axis, 0 at and beyond the cap edge."""
        x = np.asarray(x, dtype=float)
        r = np.linalg.norm(x, axis=-1)
        cosang = np.where(r > 0, x @ self.axis / np.where(r > 0, r, 1.0), 1.0)
        c0 = np.cos(self.angular_radius)
        return smoothstep((cosang - c0) / (1.0 - c0))


def ball_chart(cap_axis, angular_radius, inner_radius=0.5) -> Chart:
    """Cap chart of the unit ball around ``cap_axis``."""
    if not 0.0 < angular_radius < 0.5 * np.pi:
        raise GraphFailureError(
            f"angular radius {angular_radius} must lie in (0, pi/2) for a graph chart")
    if not 0.0 < inner_radius < 1.0:
        raise InvalidIntervalError("inner radius must lie in (0, 1)")
    c = _unit(cap_axis)
    return Chart(c, float(angular_radius), float(inner_radius), _perpendicular(c))


def _fibonacci_sphere(n):
    i = np.arange(n) + 0.5
    polar = np.arccos(1.0 - 2.0 * i / n)
    az = np.pi * (1.0 + 5 ** 0.5) * i
    return np.column_stack([np.cos(az) * np.sin(polar), np.sin(az) * np.sin(polar), np.cos(polar)])


@dataclass(frozen=True, eq=False)
class Atlas:
    """Interior chart ``U0 = B(0, b)``, boundary caps, and a partition of unity.

    With ``compatible=True`` the partition is the radial pair
    ``phi_0 = 1 - s((r-a)/(b-a))`` on ``U0`` and ``phi_1 = s((r-a)/(b-a))``
    on the shell ``|x| > a`` covered by the caps; both have vanishing
    tangential derivatives. Otherwise ``phi_1`` is split among the caps by
    angular bumps, which is a valid partition but not a compatible one.
    """

    charts: tuple
    interior_radius: float
    interior_outer: float
    compatible: bool = True

    def _radial(self, r):
        a, b = self.interior_radius, self.interior_outer
        return smoothstep((r - a) / (b - a))

    def partition(self, x):
        """Partition functions at ``x``; shape (n_members,) + x.shape[:-1]."""
        x = np.asarray(x, dtype=float)
        r = np.linalg.norm(x, axis=-1)
        shell = self._radial(r)
        parts = [1.0 - shell]
        if self.compatible:
            parts.append(shell)
        else:
            bumps = np.stack([c.bump(x) for c in self.charts])
            total = bumps.sum(axis=0)
            safe = np.where(total > 0, total, 1.0)
            parts.extend(shell * bumps / safe)
        return np.stack(parts)

    def partition_gradient(self, x, h=1e-6):
        """Ambient gradients of the partition, shape (n_members,) + x.shape."""
        x = np.asarray(x, dtype=float)
        if self.compatible:
            a, b = self.interior_radius, self.interior_outer
            r = np.linalg.norm(x, axis=-1)
            ds = smoothstep_dt((r - a) / (b - a)) / (b - a)
            n = x / np.maximum(r, _EPS_V)[..., None]
            return np.stack([-ds[..., None] * n, ds[..., None] * n])
        grads = []
        for j in range(3):
            e = np.zeros(3)
            e[j] = h
            grads.append((self.partition(x + e) - self.partition(x - e)) / (2 * h))
        return np.stack(grads, axis=-1)

    def member_support(self, i, x):
        """Node mask of the open set ``U_i`` that partition member i lives in."""
        x = np.asarray(x, dtype=float)
        r = np.linalg.norm(x, axis=-1)
        inside = r <= 1.0 + 1e-12
        if i == 0:
            return inside & (r < self.interior_outer)
        if self.compatible:
            return inside & (r > self.interior_radius)
        return self.charts[i - 1].contains(x) & (r > self.interior_radius)

    def tangential_derivatives(self, x):
        """Max of |tau . grad phi_i| and |tau_bar . grad phi_i| over the shell charts."""
        x = np.asarray(x, dtype=float)
        grads = self.partition_gradient(x)
        worst = 0.0
        for chart in self.charts:
            mask = chart.contains(x)
            if not mask.any():
                continue
            g = chart.frame(x[mask])
            for grad in grads:
                gm = grad[mask]
                worst = max(worst, float(np.max(np.abs(np.einsum("...i,...ij->...j", gm, g)[..., :2]))))
        return worst


def build_ball_atlas(n_caps=6, interior_radius=0.5, angular_radius=None,
                     compatible=True, n_check=20000) -> Atlas:
    """Cover the unit ball by an interior ball and ``n_caps`` boundary caps."""
    if not 0.0 < interior_radius < 1.0:
        raise InvalidIntervalError("interior radius must lie in (0, 1)")
    if n_caps < 1:
        raise CoverageError("at least one cap is needed to cover the boundary shell")
    if n_caps == 6:
        axes = np.vstack([np.eye(3), -np.eye(3)])
    else:
        axes = _fibonacci_sphere(n_caps)
    if angular_radius is None:
        # widest angular gap of the axis set, plus a margin
        dirs = _fibonacci_sphere(n_check)
        gap = np.max(np.arccos(np.clip(np.max(dirs @ axes.T, axis=1), -1, 1)))
        angular_radius = min(1.15 * gap + 0.05, 0.5 * np.pi - 1e-3)
    charts = tuple(ball_chart(ax, angular_radius, interior_radius) for ax in axes)
    dirs = np.vstack([_fibonacci_sphere(n_check), np.eye(3), -np.eye(3),
                      _unit_rows(np.array(np.meshgrid([-1, 1], [-1, 1], [-1, 1])).reshape(3, -1).T)])
    cos_best = np.max(dirs @ np.array([c.axis for c in charts]).T, axis=1)
    if np.any(cos_best < np.cos(angular_radius) + 1e-9):
        raise CoverageError(
            f"{n_caps} caps of angular radius {angular_radius:.3f} leave the shell uncovered")
    b = interior_radius + 0.5 * (1.0 - interior_radius)
    return Atlas(charts, float(interior_radius), float(b), bool(compatible))


def _unit_rows(a):
    return a / np.linalg.norm(a, axis=1, keepdims=True)
