"""Wideband dictionaries: 2D-DFT angular atoms for the user and spherical-domain atoms for the RIS.

Spherical atoms share one label list across all subcarriers. Per direction the
inverse distance is sampled on rings ``1/r_min - i * step`` where ``step`` is
the inverse-distance separation at which the separable Fresnel gain model
drops to the target coherence ``mu_m``; a far-field atom closes each ring.
"""
from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import SystemConfig
from .geometry import (SPEED_OF_LIGHT, UpaShape, fresnel_path_difference, iter_wideband_responses,
                       planar_path_term, response_from_path)
from .squint import fresnel_gain

CACHE_ENV = "XLRIS_CACHE_DIR"


def grid_angles(G: int, offset: int = 0) -> np.ndarray:
    """``-1 + 2 (i + offset) / G`` for ``i = 0..G-1``."""
    return -1.0 + 2.0 * (np.arange(G) + offset) / G


@dataclass
class AngularDictionary:
    theta_t: np.ndarray  # (G_U,) z-axis virtual angle per atom
    phi_t: np.ndarray    # (G_U,) y-axis virtual angle per atom
    g_y: int
    g_z: int
    path: np.ndarray     # (N_U, G_U) planar path terms
    shape: UpaShape

    @property
    def size(self) -> int:
        return self.theta_t.size

    def atoms(self, f: float) -> np.ndarray:
        return response_from_path(self.path, f)

    def iter_atoms(self, freqs, dtype=np.complex128):
        return iter_wideband_responses(self.path, freqs, dtype)


def build_angular_dictionary(cfg: SystemConfig) -> AngularDictionary:
    """User-side planar atoms on a uniform virtual-angle grid starting at -1."""
    if cfg.g_u_y < 1 or cfg.g_u_z < 1:
        raise ValueError("grid sizes must be >= 1")
    ty = grid_angles(cfg.g_u_y)
    tz = grid_angles(cfg.g_u_z)
    phi, theta = (a.ravel() for a in np.meshgrid(ty, tz, indexing="ij"))
    return AngularDictionary(theta, phi, cfg.g_u_y, cfg.g_u_z, planar_path_term(cfg.user, theta, phi), cfg.user)


def ring_coherence(delta, theta_t, phi_t, cfg: SystemConfig):
    """Gain-model coherence of two same-direction atoms ``delta`` apart in inverse distance."""
    base = SPEED_OF_LIGHT / (4.0 * cfg.f_c)
    zp = base * (1 - np.square(phi_t)) * delta
    zt = base * (1 - np.square(theta_t)) * delta
    return fresnel_gain(zp, cfg.ris_ny) * fresnel_gain(zt, cfg.ris_nz)


def distance_ring_steps(mu_m: float, theta_t, phi_t, cfg: SystemConfig,
                        scan: int = 600, iters: int = 100) -> np.ndarray:
    """Vectorised :func:`distance_ring_step` over directions."""
    if not 0 < mu_m < 1:
        raise ValueError("mu_m must lie in (0, 1)")
    theta_t, phi_t = np.broadcast_arrays(np.asarray(theta_t, float), np.asarray(phi_t, float))
    theta_t, phi_t = theta_t.ravel(), phi_t.ravel()
    base = SPEED_OF_LIGHT / (4.0 * cfg.f_c)
    a = base * (1 - phi_t ** 2) * cfg.ris_ny ** 2
    b = base * (1 - theta_t ** 2) * cfg.ris_nz ** 2
    scale = np.maximum(a, b)
    out = np.full(theta_t.shape, np.inf)
    ok = scale > 1e-14
    if not np.any(ok):
        return out
    # delta = t / scale puts the faster-decaying axis at u ~ sqrt(t / 2)
    t = np.logspace(-8, 6, scan)
    d = t[None, :] / scale[ok, None]
    vals = ring_coherence(d, theta_t[ok, None], phi_t[ok, None], cfg)
    below = vals < mu_m
    has = below.any(axis=1)
    first = np.argmax(below, axis=1)
    rows = np.flatnonzero(has)
    hi = d[rows, first[rows]]
    lo = np.where(first[rows] > 0, d[rows, np.maximum(first[rows] - 1, 0)], 0.0)
    tt, pt = theta_t[ok][rows], phi_t[ok][rows]
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        above = ring_coherence(mid, tt, pt, cfg) >= mu_m
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    res = np.full(ok.sum(), np.inf)
    res[rows] = 0.5 * (lo + hi)
    out[ok] = res
    return out


def distance_ring_step(mu_m: float, theta_t: float, phi_t: float, cfg: SystemConfig) -> float:
    """Smallest inverse-distance separation whose modelled coherence equals ``mu_m``.

    Returns ``inf`` for directions where distance has no quadratic effect.
    """
    return float(distance_ring_steps(mu_m, theta_t, phi_t, cfg)[0])


@dataclass
class SphericalDictionary:
    theta_t: np.ndarray  # (G_R,)
    phi_t: np.ndarray
    inv_r: np.ndarray    # 0 marks the far-field atom of a direction
    i_z: np.ndarray
    i_y: np.ndarray
    i_r: np.ndarray
    ring_step: np.ndarray  # inverse-distance step of each atom's direction
    mu_m: float
    r_min: float
    g_y: int
    g_z: int
    path: np.ndarray     # (N_R, G_R) Fresnel path differences
    shape: UpaShape

    @property
    def size(self) -> int:
        return self.theta_t.size

    def atoms(self, f: float) -> np.ndarray:
        return response_from_path(self.path, f)

    def iter_atoms(self, freqs, dtype=np.complex128):
        return iter_wideband_responses(self.path, freqs, dtype)

    def direction_groups(self) -> dict[tuple[int, int], np.ndarray]:
        """Atom indices per ``(i_z, i_y)`` direction, ordered by ring index."""
        keys = self.i_z * (self.g_y + 1) + self.i_y
        order = np.lexsort((self.i_r, keys))
        _, starts = np.unique(keys[order], return_index=True)
        groups = np.split(order, starts[1:])
        return {(int(self.i_z[g[0]]), int(self.i_y[g[0]])): g for g in groups}

    def labels(self) -> np.ndarray:
        """Structured label table ``(theta_t, phi_t, inv_r, i_z, i_y, i_r)``."""
        return np.rec.fromarrays([self.theta_t, self.phi_t, self.inv_r, self.i_z, self.i_y, self.i_r],
                                 names="theta_t,phi_t,inv_r,i_z,i_y,i_r")


def _spherical_labels(cfg: SystemConfig):
    # directions at -1 + 2 i / G for i = 1..G
    tz = grid_angles(cfg.g_r_z, offset=1)
    ty = grid_angles(cfg.g_r_y, offset=1)
    iz, iy = (a.ravel() for a in np.meshgrid(np.arange(1, cfg.g_r_z + 1), np.arange(1, cfg.g_r_y + 1),
                                             indexing="ij"))
    theta, phi = tz[iz - 1], ty[iy - 1]
    steps = distance_ring_steps(cfg.mu_m, theta, phi, cfg)
    cols = {k: [] for k in ("theta_t", "phi_t", "inv_r", "i_z", "i_y", "i_r", "ring_step")}

    def add(j, inv_r, i_r):
        for name, v in (("theta_t", theta[j]), ("phi_t", phi[j]), ("inv_r", inv_r), ("i_z", iz[j]),
                        ("i_y", iy[j]), ("i_r", i_r), ("ring_step", steps[j])):
            cols[name].append(v)

    x0 = 1.0 / cfg.r_min
    for j in range(theta.size):
        n_rings = 0
        if np.isfinite(steps[j]):
            n_rings = int(np.floor(x0 / steps[j] * (1 - 1e-12))) + 1
            # drop a ring landing on 1/r = 0 within rounding
            if x0 - (n_rings - 1) * steps[j] <= 1e-12 * x0:
                n_rings -= 1
        for i_r in range(n_rings):
            add(j, x0 - i_r * steps[j], i_r)
        add(j, 0.0, n_rings)
    return {k: np.asarray(v) for k, v in cols.items()}


def spherical_cache_key(cfg: SystemConfig) -> str:
    keys = ("ris_ny", "ris_nz", "f_c", "g_r_y", "g_r_z", "mu_m", "r_min")
    blob = json.dumps({k: getattr(cfg, k) for k in keys}, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def build_spherical_dictionary(cfg: SystemConfig, cache_dir=None) -> SphericalDictionary:
    """Spherical-domain dictionary over ``G_R^z x G_R^y`` directions with coherence-spaced rings.

    Labels are cached under ``cache_dir`` (or ``$XLRIS_CACHE_DIR``) keyed by a
    hash of the parameters they depend on; atoms are regenerated on demand.
    """
    cache_dir = cache_dir or os.environ.get(CACHE_ENV)
    labels = None
    path = None
    if cache_dir:
        path = Path(cache_dir) / f"spherical_{spherical_cache_key(cfg)}.npz"
        if path.exists():
            with np.load(path) as z:
                labels = {k: z[k] for k in z.files}
    if labels is None:
        labels = _spherical_labels(cfg)
        if path is not None:
            path.parent.mkdir(parents=True, exist_ok=True)
            np.savez(path, **labels)
    D = fresnel_path_difference(cfg.ris, labels["theta_t"], labels["phi_t"], labels["inv_r"])
    return SphericalDictionary(
        theta_t=labels["theta_t"], phi_t=labels["phi_t"], inv_r=labels["inv_r"],
        i_z=labels["i_z"].astype(int), i_y=labels["i_y"].astype(int), i_r=labels["i_r"].astype(int),
        ring_step=labels["ring_step"], mu_m=cfg.mu_m, r_min=cfg.r_min,
        g_y=cfg.g_r_y, g_z=cfg.g_r_z, path=D, shape=cfg.ris,
    )


def save_spherical_dictionary(d: SphericalDictionary, path) -> None:
    np.savez(path, theta_t=d.theta_t, phi_t=d.phi_t, inv_r=d.inv_r, i_z=d.i_z, i_y=d.i_y,
             i_r=d.i_r, ring_step=d.ring_step)


def atom_coherence(a: np.ndarray, b: np.ndarray) -> float:
    return float(abs(np.vdot(a, b)) / (np.linalg.norm(a) * np.linalg.norm(b)))
