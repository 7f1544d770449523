"""System configuration shared by every stage of the pipeline."""
from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .geometry import CarrierGrid, UpaShape, half_wavelength


def dbm_to_watts(x_dbm):
    return 10.0 ** ((np.asarray(x_dbm, dtype=float) - 30.0) / 10.0)


def watts_to_dbm(x_w):
    return 10.0 * np.log10(np.asarray(x_w, dtype=float)) + 30.0


@dataclass
class SystemConfig:
    """Physical and simulation hyperparameters.

    Defaults follow the desk-scale setup: a 128x4 RIS, an 8x4 user array and a
    16x16 BS array at 28 GHz with 2 GHz bandwidth. Angles are in degrees,
    powers in dBm, distances in metres.
    """

    ris_ny: int = 128
    ris_nz: int = 4
    user_ny: int = 8
    user_nz: int = 4
    bs_ny: int = 16
    bs_nz: int = 16
    f_c: float = 28e9
    f_s: float = 2e9
    K: int = 32
    P: int = 3
    Q: int = 48
    n_x: int = 32
    sigma_p2_dbm: float = 30.0
    sigma_n2_dbm: float = -90.0
    # dictionary grids; None means the default multiple of the array size
    g_r_y: int | None = None
    g_r_z: int | None = None
    g_u_y: int | None = None
    g_u_z: int | None = None
    mu_m: float = 0.5
    r_min: float = 5.0
    dist_min: float = 5.0
    dist_max: float = 20.0
    # extra NLoS path length beyond the RIS-scatterer leg
    nlos_excess_min: float = 5.0
    nlos_excess_max: float = 20.0
    elev_range: tuple[float, float] = (30.0, 150.0)
    azim_range: tuple[float, float] = (-60.0, 60.0)
    bs_ris_distance: float = 45.0
    # BS-RIS link: angles of the RIS seen from the BS and of the BS seen from the RIS
    bs_theta: float = 70.0
    bs_phi: float = 20.0
    ris_bs_theta: float = 60.0
    ris_bs_phi: float = -35.0
    step_theta: float = 0.005
    step_phi: float = 0.005
    step_vartheta: float = 0.005
    step_varphi: float = 0.005
    step_inv_r: float = 0.005
    trials: int = 100
    seed: int = 0

    def __post_init__(self):
        for name in ("ris_ny", "ris_nz", "user_ny", "user_nz", "bs_ny", "bs_nz", "K", "Q", "n_x"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.P < 0:
            raise ValueError("P must be >= 0")
        if not 0 < self.mu_m < 1:
            raise ValueError("mu_m must lie in (0, 1)")
        if self.r_min <= 0:
            raise ValueError("r_min must be positive")
        if not 0 < self.dist_min <= self.dist_max:
            raise ValueError("bad distance range")
        self.elev_range = tuple(float(v) for v in self.elev_range)
        self.azim_range = tuple(float(v) for v in self.azim_range)
        self.g_r_y = self.g_r_y or self.ris_ny
        self.g_r_z = self.g_r_z or 8 * self.ris_nz
        self.g_u_y = self.g_u_y or 8 * self.user_ny
        self.g_u_z = self.g_u_z or 8 * self.user_nz
        CarrierGrid(self.f_c, self.f_s, self.K)

    @property
    def d(self) -> float:
        return half_wavelength(self.f_c)

    @property
    def ris(self) -> UpaShape:
        return UpaShape(self.ris_ny, self.ris_nz, self.d)

    @property
    def user(self) -> UpaShape:
        return UpaShape(self.user_ny, self.user_nz, self.d)

    @property
    def bs(self) -> UpaShape:
        return UpaShape(self.bs_ny, self.bs_nz, self.d)

    @property
    def n_r(self) -> int:
        return self.ris_ny * self.ris_nz

    @property
    def n_u(self) -> int:
        return self.user_ny * self.user_nz

    @property
    def grid(self) -> CarrierGrid:
        return CarrierGrid(self.f_c, self.f_s, self.K)

    @property
    def freqs(self) -> np.ndarray:
        return self.grid.frequencies

    @property
    def sigma_p2(self) -> float:
        return float(dbm_to_watts(self.sigma_p2_dbm))

    @property
    def sigma_n2(self) -> float:
        return float(dbm_to_watts(self.sigma_n2_dbm))

    def replace(self, **changes) -> "SystemConfig":
        # grid sizes left at their defaults follow array-size changes
        base = self.to_dict()
        for g, (arr, mult) in {"g_r_y": ("ris_ny", 1), "g_r_z": ("ris_nz", 8),
                               "g_u_y": ("user_ny", 8), "g_u_z": ("user_nz", 8)}.items():
            if g not in changes and arr in changes and base[g] == mult * base[arr]:
                base[g] = None
        base.update(changes)
        return SystemConfig(**base)

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["elev_range"] = list(self.elev_range)
        out["azim_range"] = list(self.azim_range)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "SystemConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise KeyError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()[:16]
