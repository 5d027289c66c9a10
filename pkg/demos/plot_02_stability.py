"""
Delay margin of the straight-line loop
======================================

For the linearised straight-road loop the analyser returns the smallest
actuator dead time that destabilises it.  Sweeping the derivative gain
shows a clear optimum; sweeping speed shows the margin shrinking.
"""

# %%
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from lanekeep import StraightLoopParams, critical_delay, sweep_critical_delay, tune_kd

OUT = Path(__file__).with_name("output")
OUT.mkdir(exist_ok=True)

kd = np.linspace(0.0, 1.0, 101)
fig, ax = plt.subplots()
for ld in (0.3, 0.5, 0.8):
    rows = sweep_critical_delay({"v": [1.0], "L_d": [ld], "K_D": kd})
    ax.plot(kd, [r.critical_delay for r in rows], label=f"L_d = {ld} m")
    best = tune_kd(1.0, ld)
    print(f"L_d = {ld}: best K_D = {best:.3f}, "
          f"critical delay {critical_delay(StraightLoopParams(1.0, ld, best)):.3f} s")
ax.axhline(0.15, color="grey", ls=":", label="dead time of the car")
ax.set_xlabel("K_D")
ax.set_ylabel("critical delay [s]")
ax.legend()
fig.savefig(OUT / "kd_sweep.png", dpi=120)

# %%
# Faster driving eats the margin.  At 1 m/s the tuned loop tolerates about
# 0.27 s of dead time.

v = np.linspace(0.3, 2.0, 35)
rows = sweep_critical_delay({"v": v, "L_d": [0.5], "K_D": [0.2]})
fig, ax = plt.subplots()
ax.plot(v, [r.critical_delay for r in rows])
ax.set_xlabel("speed [m/s]")
ax.set_ylabel("critical delay [s]")
fig.savefig(OUT / "speed_sweep.png", dpi=120)
