"""
Training data and the command line
==================================

Generates perturbed poses labelled with the heading error at several
lookahead distances, then drives the same features through the
``lanekeep`` command.
"""

# %%
import json
import math
import subprocess
import sys
import tempfile
from pathlib import Path

import numpy as np

from lanekeep import DatasetConfig, build_test_track, generate_dataset

track = build_test_track()
cfg = DatasetConfig(n_samples=5000, lookaheads=(0.3, 0.5, 0.8), rng_seed=1)
records = generate_dataset(track, cfg)
labels = np.array([[r.labels[ld] if r.labels[ld] is not None else np.nan
                    for ld in cfg.lookaheads] for r in records])
print("label std per lookahead [deg]:", np.degrees(np.nanstd(labels, axis=0)).round(2))
print("lateral std:", np.std([r.lateral_offset for r in records]).round(4),
      "heading std [deg]:", round(math.degrees(np.std([r.heading_offset for r in records])), 2))

# %%
# The same operations from the shell.  ``simulate`` exits with 3 when the
# car leaves the lane and ``tune`` with 4 when no gain works.

with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)
    (tmp / "run.json").write_text(json.dumps({"laps": 1, "controller": {"lookahead": 0.5,
                                                                         "kd": 0.2}}))
    for argv in (["tune", "--v", "1.0", "--Ld", "0.5"],
                 ["simulate", "--config", str(tmp / "run.json"), "--out", str(tmp / "run")]):
        res = subprocess.run([sys.executable, "-m", "lanekeep.cli", *argv],
                             capture_output=True, text=True)
        print("$ lanekeep", " ".join(argv[:3]), "->", res.returncode)
        print(res.stdout.strip())
