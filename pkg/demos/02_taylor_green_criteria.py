"""Blow-up criteria along a Taylor-Green trajectory.

Integrates the Taylor-Green vortex on a 32^3 torus to t = 1 and prints the
six criterion integrals, the Gronwall audit and the growth exponent of
``||omega||_inf``. Plots go to ``demo_output/taylor_green``.
"""
# %%
from pathlib import Path

from eulerbkm.monitor import CRITERIA, CriteriaMonitor, gronwall_audit, growth_exponent
from eulerbkm.report import summary_text, write_csv, write_plots
from eulerbkm.solver import SolverConfig, run

cfg = SolverConfig(n=(32, 32, 32), dt=5e-3, t_end=1.0, output_every=4)
mon = CriteriaMonitor(metadata={"demo": "taylor_green"})
res = run(cfg, [mon])
series = mon.series
print(f"{res.steps} steps in {res.wall_clock:.1f} s, energy drift "
      f"{abs(res.energy_final - res.energy0) / res.energy0:.1e}, max div {res.max_divergence:.1e}")

# %% [markdown]
# Each criterion is a time integral of a norm; the error estimate comes
# from halving the output cadence.

# %%
for name in CRITERIA:
    print(f"{name:9s} {series.integral(name):10.4f}  +- {series.error_estimate(name):.1e}")

# %% [markdown]
# The vorticity bound ``||omega(t)|| <= ||omega_0|| + int (3 ||omega|| G + 4 G^2)``
# with ``G = ||grad_h u||`` holds with room to spare. ``||omega||_inf``
# actually drops early on: at the cell centre the pressure makes
# ``d3 u3`` negative, which compresses the vertical vortex.

# %%
audit = gronwall_audit(series)
print("min margin", audit.min_margin, "final bound", audit.bound[-1], "measured", audit.measured[-1])
print("growth exponent", growth_exponent(series.times, series.column("linf_omega"))["exponent"])
print("enstrophy", series.column("enstrophy")[0], "->", series.column("enstrophy")[-1])

# %%
out = Path("demo_output/taylor_green")
out.mkdir(parents=True, exist_ok=True)
write_csv(series, out / "series.csv")
print([p.name for p in write_plots(series, out / "plots")])
print(summary_text(series))
