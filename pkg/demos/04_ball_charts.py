"""Boundary charts on the unit ball and normal-derivative reconstruction.

Six caps cover the boundary shell; a radial partition of unity has no
tangential derivatives. On each cap the normal derivatives of the
tangential velocity components follow from the vorticity and tangential
derivatives alone.
"""
# %%
import numpy as np

from eulerbkm.charts import build_ball_atlas
from eulerbkm.curved import BALL_FIELDS, normal_reconstruction, sample_vector
from eulerbkm.grid import ball_grid

atlas = build_ball_atlas(6, 0.5)
rng = np.random.default_rng(0)
x = rng.standard_normal((20000, 3))
x *= (rng.uniform(0.5, 1.0, (len(x), 1)) / np.linalg.norm(x, axis=1)[:, None])
print("partition sum error", np.max(np.abs(atlas.partition(x).sum(axis=0) - 1)))
print("tangential derivative of the partition", atlas.tangential_derivatives(x))

# %% [markdown]
# Reconstruction error against exact normal derivatives under grid
# refinement. The rigid rotation is linear, so the finite differences are
# exact and only rounding remains.

# %%
for name, fn in BALL_FIELDS.items():
    errs = []
    for n in (16, 24, 32, 48):
        u = sample_vector(ball_grid(n), lambda p: fn(p)[0])
        errs.append(max(normal_reconstruction(c, u, exact=fn).error for c in atlas.charts))
    print(name, " ".join(f"{e:.2e}" for e in errs))
