"""Desk-scale incompressible 3D Euler toolkit with continuation-criteria monitoring.

Subpackages by layer: :mod:`domains`, :mod:`grid`, :mod:`charts` (geometry);
:mod:`calculus`, :mod:`curved`, :mod:`identities` (field calculus);
:mod:`solver`; :mod:`monitor`; :mod:`config`, :mod:`snapshot`,
:mod:`report`, :mod:`verify`, :mod:`cli` (IO).
"""
__version__ = "0.1.0"

from .domains import DomainSpec, make_slab_triplet, validate_triplet  # noqa: E402
from .grid import ScalarField, VectorField, channel_grid, torus_grid  # noqa: E402
from .monitor import CriteriaMonitor, CriterionSeries, NormReport, gronwall_audit  # noqa: E402
from .solver import SolverConfig, run  # noqa: E402

__all__ = ["DomainSpec", "make_slab_triplet", "validate_triplet", "ScalarField", "VectorField",
           "channel_grid", "torus_grid", "CriteriaMonitor", "CriterionSeries", "NormReport",
           "gronwall_audit", "SolverConfig", "run", "__version__"]
