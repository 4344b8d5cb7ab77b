"""Normal-derivative identities, explicit constants and weighted norms.

Run with ``python demos/01_identities_and_norms.py``.
"""
# %%
import numpy as np

from eulerbkm.calculus import norm_terms, norm_w_co, norm_w_tan
from eulerbkm.grid import VectorField, channel_grid, half_space_grid, torus_grid
from eulerbkm.identities import dz_identities, flat_stretch_split, hardy_quotient
from eulerbkm.solver import init_random_divfree

# %% [markdown]
# On flat domains the normal derivative of the velocity is fixed by the
# vorticity and the horizontal gradient. We check the four identities on
# a random solenoidal field in a free-slip channel.

# %%
u = init_random_divfree(channel_grid(32, 32, 33), seed=4)
rep = dz_identities(u)
for name, r in rep.residuals.items():
    print(f"{name:8s} residual {r:.2e}")

# %% [markdown]
# The same identities bound ``||dz u||``, ``||omega_3||`` and the stretching
# term with explicit constants (component-max norms).

# %%
for c in rep.checks:
    print(f"{c.name:42s} {c.lhs:9.4f} <= {c.rhs:9.4f}  slack {c.slack:.4f}")
print("stretching split residual", flat_stretch_split(u).residual)

# %% [markdown]
# The Hardy step: ``u3 / phi`` stays below ``||dz u3||`` because ``u3``
# vanishes on the walls.

# %%
h = hardy_quotient(u)
print(f"||u3/phi|| = {h.quotient:.4f}, ||dz u3|| = {h.dz_norm:.4f}, ratio {h.ratio:.4f}")

# %% [markdown]
# Tangential norms use only horizontal derivatives. Conormal norms add
# ``phi dz``, which degenerates at the boundary. For ``u1 = z/(1+z)`` on
# the half-space the weighted term is ``z/(1+z)^3`` with maximum 4/27.

# %%
g = half_space_grid(8, 8, 401)
_, _, Z = g.mesh()
v = VectorField(g, [Z / (1 + Z), 0 * Z, 0 * Z], (None, None, None))
print("Z3 term", norm_terms(v, 1)[(0, 0, 1)], "expected", 4 / 27)
w = init_random_divfree(torus_grid(16), seed=1)
for m in (0, 1, 2):
    print(f"m={m}: W_tan {norm_w_tan(w, m):8.3f}   W_co {norm_w_co(w, m):8.3f}   "
          f"L2-type W_co {norm_w_co(w, m, 2):8.3f}")
