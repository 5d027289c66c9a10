"""
Test track and lookahead geometry
=================================

Builds the six-piece test track, draws the centreline with both lane
boundaries, and shows how the lookahead heading error changes as a pose
slides sideways off the first straight.
"""

# %%
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from lanekeep import PoseG, build_test_track, lhe_global, point_at

OUT = Path(__file__).with_name("output")
OUT.mkdir(exist_ok=True)

centre = build_test_track()
print(f"centreline length: {centre.total_length:.4f} m")
for sec in centre.sections:
    print(f"  {sec.kind:8s} s = {sec.s_start:6.3f} .. {sec.s_end:6.3f}  kappa = {sec.curvature:+.3f}")

# %%
# The two lanes are offsets of the centreline.  Curvature is signed, so on
# the clockwise track every arc has negative curvature.

fig, ax = plt.subplots(figsize=(5, 6))
for lane, style in (("centerline", "k-"), ("inner_lane", "b--"), ("outer_lane", "r--")):
    poly = build_test_track(lane=lane).polyline(0.02)
    ax.plot(poly[:, 1], poly[:, 2], style, lw=1, label=lane)
ax.set_aspect("equal")
ax.legend(loc="upper right")
fig.savefig(OUT / "track.png", dpi=120)

# %%
# Heading error against lateral offset on the first straight, for three
# lookahead distances.  Offsets to the left give negative errors because
# the lookahead point then lies to the right.

straight = centre.sections[1]
s0 = straight.s_start + 0.9
p = point_at(centre, s0)
offsets = np.linspace(-0.18, 0.18, 73)
fig, ax = plt.subplots()
for ld in (0.3, 0.5, 0.8):
    alphas = [lhe_global(centre, PoseG(p.x - e * math.sin(p.psi), p.y + e * math.cos(p.psi), p.psi),
                         ld, s0) for e in offsets]
    ax.plot(offsets, np.degrees(alphas), label=f"L_d = {ld} m")
ax.set_xlabel("lateral offset e_y [m]")
ax.set_ylabel("heading error [deg]")
ax.legend()
fig.savefig(OUT / "lhe_vs_offset.png", dpi=120)
