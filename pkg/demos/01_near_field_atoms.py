# %% [markdown]
# # Near-field atoms and the spherical-domain dictionary
#
# A 128x4 surface at 28 GHz has a Rayleigh distance of a few metres to tens of
# metres, depending on the direction. Inside it a planar steering vector no
# longer describes the array response; distance matters too.

# %%
import numpy as np

from xlris import SphericalPoint, SystemConfig
from xlris.dictionary import atom_coherence, build_spherical_dictionary
from xlris.geometry import exact_spherical_response, fresnel_spherical_response, planar_response

cfg = SystemConfig()
shape = cfg.ris
print(f"RIS {shape.n_y}x{shape.n_z}, d = {shape.spacing_d * 1e3:.2f} mm, "
      f"Rayleigh distance {shape.rayleigh_distance(cfg.f_c):.1f} m")

# %% [markdown]
# ## Planar vs spherical correlation against distance
#
# Spherical responses are conjugate-planar in the far field, so compare against
# `conj(planar)`.

# %%
theta, phi = np.radians(60.0), np.radians(20.0)
for r in (2.0, 5.0, 10.0, 20.0, 50.0, 200.0):
    p = SphericalPoint(theta, phi, r)
    b = exact_spherical_response(shape, cfg.f_c, p)
    a = planar_response(shape, cfg.f_c, p.theta_t, p.phi_t).conj()
    bf = fresnel_spherical_response(shape, cfg.f_c, p)
    print(f"r = {r:6.1f} m  |<planar, exact>| = {atom_coherence(a, b):.3f}  "
          f"|<fresnel, exact>| = {atom_coherence(bf, b):.4f}")

# %% [markdown]
# ## Distance rings at a target coherence
#
# Each direction gets rings spaced evenly in 1/r, with the step chosen so that
# neighbouring rings have coherence mu_m. Broadside directions get more rings
# than grazing ones.

# %%
for mu in (0.3, 0.5, 0.7):
    d = build_spherical_dictionary(cfg.replace(mu_m=mu))
    rings = np.array([len(g) for g in d.direction_groups().values()])
    print(f"mu_m = {mu}: G_R = {d.size}, atoms per direction min/median/max "
          f"{rings.min()}/{int(np.median(rings))}/{rings.max()}")

# %%
d = build_spherical_dictionary(cfg)
B = d.atoms(cfg.f_c)
g = max(d.direction_groups().values(), key=len)
print("one direction:", f"theta_t = {d.theta_t[g[0]]:.3f}, phi_t = {d.phi_t[g[0]]:.3f}")
for a, b in zip(g[:-2], g[1:-1]):
    print(f"  r = {1 / d.inv_r[a]:7.2f} m -> {1 / d.inv_r[b]:7.2f} m  coherence {atom_coherence(B[:, a], B[:, b]):.3f}")
