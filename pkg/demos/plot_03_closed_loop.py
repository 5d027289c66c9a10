"""
Three controller tunings in closed loop
=======================================

Runs three laps with each of the standard tunings under the same sensor
noise seed and compares their tracking errors.  The long lookahead without
derivative action keeps oscillating on the straights.
"""

# %%
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from lanekeep import ScenarioConfig, compare_configurations, run_scenario, standard_variants

OUT = Path(__file__).with_name("output")
OUT.mkdir(exist_ok=True)

base = ScenarioConfig(laps=3)
for name, m in compare_configurations(base).rows:
    print(f"{name:7s} e_y_max {m.e_y_max:.4f} m  e_psi_max {m.e_psi_max:.4f} rad  "
          f"lap {m.lap_time:.2f} s")

# %%
fig, axes = plt.subplots(2, 1, sharex=True, figsize=(8, 5))
for name, cfg in standard_variants(base).items():
    trace = run_scenario(cfg)
    axes[0].plot(trace["t"], trace["e_y"], lw=0.8, label=name)
    axes[1].plot(trace["t"], trace["v"], lw=0.8)
axes[0].set_ylabel("e_y [m]")
axes[1].set_ylabel("speed [m/s]")
axes[1].set_xlabel("t [s]")
axes[0].legend()
fig.savefig(OUT / "closed_loop.png", dpi=120)
