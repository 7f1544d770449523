# %% [markdown]
# # One channel, five estimators
#
# A reduced configuration (64x4 RIS, 4x2 user, K = 8) keeps this under a
# minute. Every method sees the same channel draw and noise. The transmit
# power is well above the desk default so the rank structure is visible; at
# 30 dBm the cascaded path loss leaves every entry below the noise floor.

# %%
import numpy as np

from xlris import SystemConfig
from xlris.bench import TrialRunner, angle_errors
from xlris.estimators import DictionaryPair, estimate_komp, lower_bound, mmpsr, svd_subspace

cfg = SystemConfig(ris_ny=64, ris_nz=4, user_ny=4, user_nz=2, K=8, Q=32, n_x=16, P=2,
                   g_r_z=16, sigma_p2_dbm=70.0, trials=1)
runner = TrialRunner(cfg)
ch, meas, _ = runner.draw(0)
print(f"G_R = {runner.dicts.ris.size}, G_U = {runner.dicts.user.size}, Y is {meas.Y.shape}")

# %% [markdown]
# ## Common support shows up in the singular values
#
# With P paths the per-subcarrier measurement is rank P plus noise.

# %%
sub = svd_subspace(meas.Y, cfg.P)
print("leading singular values, k = 0:", np.round(np.linalg.svd(meas.Y[0], compute_uv=False)[:4] /
                                                   sub.sigma[0, 0], 3))

# %% [markdown]
# ## Matching, refinement, rebuild

# %%
for matcher in ("CC", "IN"):
    res = mmpsr(meas, runner.dicts, cfg.P, matcher, runner.refine, runner.context(meas)).score(ch.H_U)
    errs = angle_errors(ch.paths, res.support)
    print(f"{res.method}: NMSE {res.nmse:.3e}  stage times "
          + ", ".join(f"{k} {v * 1e3:.0f} ms" for k, v in res.timings.items())
          + f"  theta_t MSE {errs['theta_t']:.2e}")

# %%
small = DictionaryPair.from_config(cfg.replace(g_r_y=32, g_r_z=4, g_u_y=8, g_u_z=4))
print("K-OMP (coarser grids):", f"{estimate_komp(meas, small, cfg.P).score(ch.H_U).nmse:.3e}")

# %%
out = runner.run_trial(0, ["2D-OLS", "2D-LS", "LB"])
for m, v in out.items():
    print(f"{m:6s} NMSE {v['nmse']:.3e}")
print("bound from the raw helper:", f"{lower_bound(cfg, ch, runner.sched, meas.noise_var):.3e}")
