# %% [markdown]
# # What a far-field model costs near the surface
#
# `gain_vs_distance` correlates far-field supports with the true spherical
# ones. Bigger surfaces keep their near field further out, so the loss lasts
# longer.

# %%
import numpy as np

from xlris import SystemConfig
from xlris.bench import gain_vs_distance

cfg = SystemConfig()
dists = [5.0, 10.0, 20.0, 40.0, 80.0]
pts = gain_vs_distance(cfg, [128, 256, 512], dists, draws=200)

# %%
table = np.array([p.gain for p in pts]).reshape(3, len(dists))
print("size     " + "  ".join(f"{d:6.0f} m" for d in dists))
for n, row in zip((128, 256, 512), table):
    print(f"{n}x4   " + "  ".join(f"{g:8.4f}" for g in row))
