"""Independent reference implementations used by the tests.

Nothing here imports the package's derivative or norm code. Derivative
matrices are assembled from explicit trigonometric sums or Vandermonde
solves, and norms are summed node by node.
"""
import itertools
import math
from fractions import Fraction

import numpy as np


def dft_deriv_matrix(n, L):
    """First-derivative matrix of trigonometric interpolation, Nyquist mode dropped."""
    j = np.arange(n)
    F = np.exp(-2j * np.pi * np.outer(j, j) / n)
    k = np.fft.fftfreq(n, d=L / n) * 2 * np.pi
    if n % 2 == 0:
        k[n // 2] = 0.0
    Finv = np.conj(F) / n
    return np.real(Finv @ np.diag(1j * k) @ F)


def cos_sin_deriv_matrices(n, L):
    """Node-to-node first derivatives for even (cosine) and odd (sine) samples.

    Returns ``(D_even, D_odd)``. Each interpolates the samples with the
    series of its parity, differentiates term by term, and samples at the
    nodes.
    """
    M = n - 1
    j = np.arange(n)
    k = np.arange(M + 1)
    kap = np.pi * k / L
    C = np.cos(np.pi * np.outer(j, k) / M)
    S = np.sin(np.pi * np.outer(j, k) / M)
    # even: f = C a, f' = S (-kap a)
    a_of_f = np.linalg.inv(C)
    D_even = S @ np.diag(-kap) @ a_of_f
    # odd: interior nodes determine b_1..b_{M-1}; f' = C (kap b)
    inner = slice(1, M)
    Sin = S[inner, inner]
    b_of_f = np.zeros((M + 1, n))
    b_of_f[inner, inner] = np.linalg.inv(Sin)
    D_odd = C @ np.diag(kap) @ b_of_f
    return D_even, D_odd


def _solve_exact(A, b):
    """Gauss-Jordan elimination over the rationals."""
    n = len(b)
    M = [[Fraction(x) for x in row] + [Fraction(y)] for row, y in zip(A, b)]
    for c in range(n):
        piv = next(r for r in range(c, n) if M[r][c] != 0)
        M[c], M[piv] = M[piv], M[c]
        inv = 1 / M[c][c]
        M[c] = [x * inv for x in M[c]]
        for r in range(n):
            if r != c and M[r][c] != 0:
                f = M[r][c]
                M[r] = [x - f * y for x, y in zip(M[r], M[c])]
    return [M[r][n] for r in range(n)]


def vandermonde_deriv_matrix(n, h, order=6):
    """6th-order first-derivative matrix from exact Vandermonde solves per row.

    Each row matches derivatives of ``1, x, ..., x^order`` on
    ``order + 1`` integer offsets, as centred as the ends allow.
    """
    width = order + 1
    half = width // 2
    D = np.zeros((n, n))
    for i in range(n):
        start = min(max(i - half, 0), n - width)
        offs = [q - i for q in range(start, start + width)]
        V = [[Fraction(o) ** p for o in offs] for p in range(width)]
        rhs = [0] * width
        rhs[1] = 1
        w = _solve_exact(V, rhs)
        D[i, start:start + width] = [float(x) for x in w]
    return D / h


def apply(D, f, axis):
    return np.moveaxis(np.tensordot(D, np.moveaxis(f, axis, 0), axes=(1, 0)), 0, axis)


class AxisOps:
    """First-derivative operator along one axis, tracking parity on channel axes."""

    def __init__(self, kind, n, L):
        self.kind = kind
        if kind == "periodic":
            self.D = dft_deriv_matrix(n, L)
        elif kind == "parity":
            self.De, self.Do = cos_sin_deriv_matrices(n, L)
        else:
            self.D = vandermonde_deriv_matrix(n, L / (n - 1))

    def d(self, f, axis, parity):
        if self.kind == "parity":
            if parity == "even":
                return apply(self.De, f, axis), "odd"
            return apply(self.Do, f, axis), "even"
        return apply(self.D, f, axis), parity


def weight_and_slope(kind, z, lo, hi):
    """``|phi|`` and ``d|phi|/dz`` written out per domain kind."""
    phi, dphi = np.zeros_like(z), np.zeros_like(z)
    for i, zz in enumerate(z):
        if kind == "half-space":
            p, d = zz / (1 + zz), 1 / (1 + zz) ** 2
        elif kind == "whole-space":
            p, d = zz / (1 + abs(zz)), 1 / (1 + abs(zz)) ** 2
        elif kind == "torus3":
            L = hi - lo
            p, d = math.sin(2 * math.pi * (zz - lo) / L), 2 * math.pi / L * math.cos(2 * math.pi * (zz - lo) / L)
        else:
            below = (zz - lo) <= (hi - zz)
            p, d = (zz - lo, 1.0) if below else (hi - zz, -1.0)
        if p < 0:
            p, d = -p, -d
        phi[i], dphi[i] = p, d
    return phi, dphi


def conormal(f, parity, alpha, axes, phi, dphi):
    """``Z^alpha f``: horizontal derivatives, then ``phi dz`` or ``phi (phi' dz + phi dzz)``."""
    g = f
    for ax, count in ((0, alpha[0]), (1, alpha[1])):
        for _ in range(count):
            g, parity = axes[ax].d(g, ax, parity)
    if alpha[2] == 0:
        return g
    P, dP = phi[None, None, :], dphi[None, None, :]
    gz, pz = axes[2].d(g, 2, parity)
    if alpha[2] == 1:
        return P * gz
    gzz, _ = axes[2].d(gz, 2, pz)
    return P * (dP * gz + P * gzz)


def trapezoid_weights(kind, n, L):
    if kind == "periodic":
        return np.full(n, L / n)
    w = np.full(n, L / (n - 1))
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def brute_norm(comps, parities, grid_desc, m, p, tangential):
    """Direct-summation ``W^{m,p}`` norm.

    ``grid_desc`` is ``(kinds, shape, lengths, origins, domain_kind, z_range)``.
    """
    kinds, shape, lengths, origins, dkind, (lo, hi) = grid_desc
    axes = [AxisOps(kinds[a], shape[a], lengths[a]) for a in range(3)]
    z = origins[2] + (np.arange(shape[2]) * lengths[2] / shape[2] if kinds[2] == "periodic"
                      else np.linspace(0, lengths[2], shape[2]))
    phi, dphi = weight_and_slope(dkind, z, lo, hi)
    w = [trapezoid_weights(kinds[a], shape[a], lengths[a]) for a in range(3)]
    total = 0.0
    for alpha in itertools.product(range(m + 1), repeat=3):
        if sum(alpha) > m or (tangential and alpha[2]):
            continue
        vals = [conormal(f, par, alpha, axes, phi, dphi) for f, par in zip(comps, parities)]
        if p == np.inf:
            best = 0.0
            for v in vals:
                for idx in itertools.product(*(range(s) for s in shape)):
                    best = max(best, abs(v[idx]))
            total += best
        else:
            acc = 0.0
            for v in vals:
                for i, j, k in itertools.product(*(range(s) for s in shape)):
                    acc += w[0][i] * w[1][j] * w[2][k] * abs(v[i, j, k]) ** p
            total += acc
    return total if p == np.inf else total ** (1.0 / p)
