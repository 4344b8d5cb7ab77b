"""Pointwise identities and explicit-constant inequalities on flat grids.

With ``G = max_{i, j<=2} |d_j u_i|`` (horizontal gradient, component max)
and ``W = ||omega||_inf``:

* ``omega_3 = d1 u2 - d2 u1`` gives ``||omega_3|| <= 2 G``.
* ``dz u1 = omega_2 + d1 u3``, ``dz u2 = -omega_1 + d2 u3`` and
  ``dz u3 = -d1 u1 - d2 u2`` give ``||dz u|| <= W + 2 G``.
* For the stretching term write ``omega . grad u = S omega``. With
  ``S13 = d1 u3 + omega_2 / 2`` and ``S23 = d2 u3 - omega_1 / 2`` the first
  two components are bounded by ``3 W G + 2 G^2``; the third, expanded
  directly with ``dz u3 = -div_h u_h``, by ``2 W G + 4 G^2``. Hence
  ``||omega . grad u|| <= 3 W G + 4 G^2``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .calculus import curl, jacobian, linf_array, region_mask
from .charts import Chart
from .curved import curved_stretch_split
from .domains import DomainSpec, weight_dz, weight_of_z
from .errors import ContextError, DomainMismatchError, InadmissibleFieldError, InconsistencyError
from .grid import VectorField, deriv

C1 = 3.0
C2 = 4.0
INEQ_RTOL = 1e-9


def _omega_for(u, omega, rtol=1e-8):
    w = curl(u, check=False)
    if omega is None:
        return w
    data = omega.data if isinstance(omega, VectorField) else np.asarray(omega)
    scale = max(1.0, float(np.max(np.abs(w.data))))
    gap = float(np.max(np.abs(data - w.data)))
    if gap > rtol * scale:
        raise InconsistencyError(f"omega differs from curl u by {gap:.3e}")
    return VectorField(u.grid, data, w.parity)


@dataclass
class InequalityCheck:
    name: str
    lhs: float
    rhs: float

    @property
    def slack(self):
        return self.rhs - self.lhs

    @property
    def holds(self):
        return self.lhs <= self.rhs + INEQ_RTOL * max(1.0, self.rhs)


@dataclass
class IdentityReport:
    residuals: dict
    checks: list = field(default_factory=list)

    @property
    def max_residual(self):
        return max(self.residuals.values())

    @property
    def violations(self):
        return [c.name for c in self.checks if not c.holds]


def explicit_constant_checks(J, omega, grid, region=None):
    """The three explicit-constant inequalities, evaluated from a Jacobian."""
    G = linf_array(J[:, :2], grid, region)
    W = linf_array(omega, grid, region)
    stretch = np.einsum("i...,ci...->c...", omega, J)
    return [
        InequalityCheck("omega3 <= 2 grad_h", linf_array(omega[2], grid, region), 2 * G),
        InequalityCheck("dz u <= omega + 2 grad_h", linf_array(J[:, 2], grid, region), W + 2 * G),
        InequalityCheck("stretch <= 3 omega grad_h + 4 grad_h^2",
                        linf_array(stretch, grid, region), C1 * W * G + C2 * G * G),
    ]


def dz_identities(u: VectorField, omega=None, region=None) -> IdentityReport:
    """Residuals of the four normal-derivative identities and the constant checks.

    Raises
    ------
    InconsistencyError
        If ``omega`` is given and does not match ``curl u``.
    """
    if not u.grid.domain.is_flat:
        raise ContextError("dz identities are stated for flat domains")
    w = _omega_for(u, omega).data
    J = jacobian(u)
    mask = region_mask(u.grid, region)
    res = {
        "omega3": w[2] - (J[1, 0] - J[0, 1]),
        "dz_u1": J[0, 2] - (w[1] + J[2, 0]),
        "dz_u2": J[1, 2] - (-w[0] + J[2, 1]),
        "dz_u3": J[2, 2] - (-J[0, 0] - J[1, 1]),
    }
    residuals = {k: float(np.max(np.abs(v[mask]))) if mask.any() else 0.0 for k, v in res.items()}
    return IdentityReport(residuals, explicit_constant_checks(J, w, u.grid, region))


@dataclass
class FlatStretchSplit:
    full: np.ndarray
    horizontal: np.ndarray  # omega_h . grad_h u
    vertical: np.ndarray    # omega_3 dz u
    residual: float
    check: InequalityCheck


def flat_stretch_split(u: VectorField, omega=None) -> FlatStretchSplit:
    w = _omega_for(u, omega).data
    J = jacobian(u)
    full = np.einsum("i...,ci...->c...", w, J)
    g, p = u.grid, u.parity
    horiz = np.stack([w[0] * deriv(u.data[c], g, 0, 1, p[c])[0]
                      + w[1] * deriv(u.data[c], g, 1, 1, p[c])[0] for c in range(3)])
    vert = np.stack([w[2] * deriv(u.data[c], g, 2, 1, p[c])[0] for c in range(3)])
    residual = float(np.max(np.abs(full - horiz - vert)))
    return FlatStretchSplit(full, horiz, vert, residual, explicit_constant_checks(J, w, g)[2])


def vortex_stretch_split(u: VectorField, omega=None, context="flat"):
    """Split ``omega . grad u``: flat (horizontal + vertical) or chart form.

    ``context`` is ``"flat"`` or a :class:`~eulerbkm.charts.Chart`.
    """
    if isinstance(context, Chart):
        return curved_stretch_split(context, u, omega)
    if context in (None, "flat"):
        if not u.grid.domain.is_flat:
            raise ContextError("a ball field needs a Chart context")
        return flat_stretch_split(u, omega)
    raise ContextError(f"unknown context {context!r}; pass 'flat' or a Chart")


@dataclass
class HardyResult:
    quotient: float
    dz_norm: float

    @property
    def ratio(self):
        if self.dz_norm == 0:
            return 0.0
        return self.quotient / self.dz_norm


def hardy_quotient(u: VectorField, domain: DomainSpec | None = None, region=None,
                   wall_tol=1e-10) -> HardyResult:
    """``||u3 / phi||_inf`` over a region with the wall limit filled in.

    At nodes where ``phi = 0`` the quotient is replaced by its limit
    ``|dz u3 / phi'|``, with ``dz u3`` taken from the grid derivative
    (spectral on parity axes, 6th-order fd otherwise).
    """
    grid = u.grid
    if domain is None:
        domain = grid.domain
    elif domain.kind != grid.domain.kind:
        raise DomainMismatchError(f"field lives on {grid.domain.kind}, not {domain.kind}")
    if not domain.is_flat:
        raise ContextError("the Hardy quotient is implemented for flat domains")
    z = grid.coords(2)
    phi = weight_of_z(domain, z, absolute=True)
    dphi = np.abs(weight_dz(domain, z, absolute=True))
    u3 = u.data[2]
    zero = phi <= 1e-14
    scale = max(1.0, float(np.max(np.abs(u3))))
    if zero.any():
        trace = float(np.max(np.abs(u3[:, :, zero])))
        if trace > wall_tol * scale:
            raise InadmissibleFieldError(f"u3 does not vanish where phi = 0 (|u3| = {trace:.3e})")
    dz = deriv(u3, grid, 2, 1, u.parity[2])[0]
    safe = np.where(zero, 1.0, phi)
    q = np.where(zero[None, None, :], np.abs(dz) / np.where(zero, dphi, 1.0)[None, None, :],
                 np.abs(u3) / safe[None, None, :])
    mask = region_mask(grid, region)
    return HardyResult(linf_array(q, grid, mask), linf_array(dz, grid, mask))
