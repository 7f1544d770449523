"""Wideband RIS-user (near field) and BS-RIS (far field, LoS) channel synthesis."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .config import SystemConfig
from .geometry import (SPEED_OF_LIGHT, SphericalPoint, exact_path_difference,
                       fresnel_path_difference, planar_path_term, planar_responses,
                       response_from_path)

# (a1, a2, shadowing std in dB) of the 28 GHz path-loss fit
LOS_PATHLOSS = (61.4, 2.0, 5.8)
NLOS_PATHLOSS = (72.0, 2.92, 8.7)
# the cluster-power offset K2 is drawn in dB with variance 16
K2_STD_DB = 4.0


@dataclass
class ChannelPath:
    """One Saleh-Valenzuela path of the RIS-user channel."""

    beta: complex
    tau: float
    ris_point: SphericalPoint
    user_theta_t: float
    user_phi_t: float
    los: bool = False

    def __post_init__(self):
        if self.tau < 0:
            raise ValueError("path delay must be nonnegative")
        if not np.isfinite(abs(self.beta)):
            raise ValueError("path gain must be finite")

    def to_dict(self) -> dict:
        return {
            "beta": [float(np.real(self.beta)), float(np.imag(self.beta))],
            "tau": self.tau,
            "ris_point": [self.ris_point.theta, self.ris_point.phi, self.ris_point.r],
            "user_theta_t": self.user_theta_t,
            "user_phi_t": self.user_phi_t,
            "los": self.los,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ChannelPath":
        return cls(complex(*d["beta"]), d["tau"], SphericalPoint(*d["ris_point"]),
                   d["user_theta_t"], d["user_phi_t"], bool(d["los"]))


@dataclass
class BsRisLink:
    """Far-field LoS link between the BS and the RIS."""

    alpha: complex
    tau0: float
    bs_theta_t: float
    bs_phi_t: float
    ris_theta_t: float
    ris_phi_t: float

    def __post_init__(self):
        if self.tau0 < 0:
            raise ValueError("link delay must be nonnegative")

    def to_dict(self) -> dict:
        d = dict(vars(self))
        d["alpha"] = [float(np.real(self.alpha)), float(np.imag(self.alpha))]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "BsRisLink":
        d = dict(d)
        d["alpha"] = complex(*d["alpha"])
        return cls(**d)


@dataclass
class ChannelRealization:
    paths: list[ChannelPath]
    bs_link: BsRisLink
    H_U: np.ndarray  # (K, N_R, N_U)
    H_B: np.ndarray  # (K, N_B, N_R)
    config_hash: str = ""
    seed: int | None = None
    response: str = "exact"
    meta: dict = field(default_factory=dict)

    @property
    def kappa(self) -> float:
        return float(sum(abs(p.beta) ** 2 for p in self.paths))

    def to_json(self) -> str:
        return json.dumps({
            "schema": "xlris.channel/1",
            "config_hash": self.config_hash,
            "seed": self.seed,
            "response": self.response,
            "paths": [p.to_dict() for p in self.paths],
            "bs_link": self.bs_link.to_dict(),
        }, indent=2)

    @classmethod
    def from_json(cls, text: str, cfg: SystemConfig) -> "ChannelRealization":
        """Rebuild the matrices from the stored parameters; ``cfg`` must hash-match."""
        d = json.loads(text)
        if d["config_hash"] and d["config_hash"] != cfg.config_hash():
            raise ValueError("config hash mismatch")
        paths = [ChannelPath.from_dict(p) for p in d["paths"]]
        link = BsRisLink.from_dict(d["bs_link"])
        return build_realization(cfg, paths, link, seed=d["seed"], response=d["response"])


def pathloss_db(distance, los: bool, rng: np.random.Generator | None = None):
    """Log-distance path loss in dB, with log-normal shadowing when ``rng`` is given."""
    a1, a2, sigma = LOS_PATHLOSS if los else NLOS_PATHLOSS
    pl = a1 + 10.0 * a2 * np.log10(distance)
    if rng is not None:
        pl = pl + rng.normal(0.0, sigma, size=np.shape(distance))
    return pl


def sample_gain(distance: float, los: bool, rng: np.random.Generator) -> complex:
    """Path gain ``CN(0, aleph 10^(-PL/10))`` with ``aleph = K1^1.8 10^(K2/10)``."""
    k1 = rng.uniform(0.0, 1.0)
    k2 = rng.normal(0.0, K2_STD_DB)
    aleph = k1 ** 1.8 * 10.0 ** (0.1 * k2)
    var = aleph * 10.0 ** (-0.1 * pathloss_db(distance, los, rng))
    return complex(np.sqrt(var / 2.0) * (rng.normal() + 1j * rng.normal()))


def _uniform_direction(rng, cfg: SystemConfig) -> tuple[float, float]:
    theta = np.radians(rng.uniform(*cfg.elev_range))
    phi = np.radians(rng.uniform(*cfg.azim_range))
    return float(theta), float(phi)


def sample_paths(cfg: SystemConfig, rng_seed) -> list[ChannelPath]:
    """Draw ``cfg.P`` paths; the first is the LoS path to the user, the rest NLoS."""
    if cfg.P < 1:
        raise ValueError("need at least one path")
    rng = np.random.default_rng(rng_seed)
    paths = []
    for p in range(cfg.P):
        los = p == 0
        r = rng.uniform(cfg.dist_min, cfg.dist_max)
        theta, phi = _uniform_direction(rng, cfg)
        u_theta, u_phi = _uniform_direction(rng, cfg)
        length = r if los else r + rng.uniform(cfg.nlos_excess_min, cfg.nlos_excess_max)
        beta = sample_gain(length, los, rng)
        paths.append(ChannelPath(
            beta=beta,
            tau=length / SPEED_OF_LIGHT,
            ris_point=SphericalPoint(theta, phi, r),
            user_theta_t=float(np.cos(u_theta)),
            user_phi_t=float(np.sin(u_theta) * np.sin(u_phi)),
            los=los,
        ))
    return paths


def default_bs_ris_link(cfg: SystemConfig) -> BsRisLink:
    """Static LoS link at ``cfg.bs_ris_distance``.

    The amplitude carries the median LoS path loss and the ``sqrt(N_B N_R)``
    array gain that unit-norm steering vectors leave out.
    """
    bs = SphericalPoint(np.radians(cfg.bs_theta), np.radians(cfg.bs_phi), cfg.bs_ris_distance)
    ris = SphericalPoint(np.radians(cfg.ris_bs_theta), np.radians(cfg.ris_bs_phi), cfg.bs_ris_distance)
    amp = np.sqrt(cfg.bs.n * cfg.n_r) * 10.0 ** (-pathloss_db(cfg.bs_ris_distance, True) / 20.0)
    return BsRisLink(
        alpha=complex(amp),
        tau0=cfg.bs_ris_distance / SPEED_OF_LIGHT,
        bs_theta_t=bs.theta_t, bs_phi_t=bs.phi_t,
        ris_theta_t=ris.theta_t, ris_phi_t=ris.phi_t,
    )


def ris_path_matrix(cfg: SystemConfig, paths, response: str = "exact") -> np.ndarray:
    """RIS-side path differences of the paths, shape ``(N_R, P)``."""
    tt = [p.ris_point.theta_t for p in paths]
    pt = [p.ris_point.phi_t for p in paths]
    rr = np.array([p.ris_point.r for p in paths])
    if response == "exact":
        return exact_path_difference(cfg.ris, tt, pt, rr)
    if response == "fresnel":
        return fresnel_path_difference(cfg.ris, tt, pt, 1.0 / rr)
    raise ValueError(f"unknown response model {response!r}")


def path_responses(cfg: SystemConfig, paths, response: str = "exact"):
    """Per-subcarrier response matrices ``B[k]`` (K, N_R, P) and ``A[k]`` (K, N_U, P)."""
    D = ris_path_matrix(cfg, paths, response)
    Du = planar_path_term(cfg.user, [p.user_theta_t for p in paths], [p.user_phi_t for p in paths])
    freqs = cfg.freqs
    B = np.stack([response_from_path(D, f) for f in freqs])
    A = np.stack([response_from_path(Du, f) for f in freqs])
    return B, A


def path_coefficients(cfg: SystemConfig, paths) -> np.ndarray:
    """Diagonal entries of the per-subcarrier path-gain matrix, shape ``(K, P)``."""
    beta = np.array([p.beta for p in paths])
    tau = np.array([p.tau for p in paths])
    scale = np.sqrt(cfg.n_r * cfg.n_u / len(paths))
    return scale * beta[None, :] * np.exp(-2j * np.pi * np.outer(cfg.freqs, tau))


def synthesize_ris_user_channel(cfg: SystemConfig, paths, response: str = "exact") -> np.ndarray:
    """``H_U[k] = sqrt(N_R N_U / P) sum_p beta_p e^{-j 2 pi tau_p f_k} b_p a_p^H``, shape (K, N_R, N_U).

    ``response="fresnel"`` swaps the exact spherical response for the
    second-order one (used to plant paths exactly on dictionary atoms).
    """
    if len(paths) == 0:
        raise ValueError("empty path list")
    B, A = path_responses(cfg, paths, response)
    xi = path_coefficients(cfg, paths)
    return np.einsum("knp,kp,kmp->knm", B, xi, A.conj())


def synthesize_bs_ris_channel(cfg: SystemConfig, link: BsRisLink) -> np.ndarray:
    """``H_B[k] = alpha e^{-j 2 pi tau0 f_k} a_B a_R^H``, shape (K, N_B, N_R)."""
    freqs = cfg.freqs
    out = np.empty((len(freqs), cfg.bs.n, cfg.n_r), dtype=complex)
    for k, f in enumerate(freqs):
        a_b = planar_responses(cfg.bs, f, link.bs_theta_t, link.bs_phi_t)[:, 0]
        a_r = planar_responses(cfg.ris, f, link.ris_theta_t, link.ris_phi_t)[:, 0]
        out[k] = link.alpha * np.exp(-2j * np.pi * link.tau0 * f) * np.outer(a_b, a_r.conj())
    return out


def build_realization(cfg: SystemConfig, paths, link: BsRisLink | None = None,
                      seed=None, response: str = "exact") -> ChannelRealization:
    link = link or default_bs_ris_link(cfg)
    return ChannelRealization(
        paths=list(paths),
        bs_link=link,
        H_U=synthesize_ris_user_channel(cfg, paths, response),
        H_B=synthesize_bs_ris_channel(cfg, link),
        config_hash=cfg.config_hash(),
        seed=seed,
        response=response,
    )


def draw_channel(cfg: SystemConfig, seed) -> ChannelRealization:
    """Sample paths with ``seed`` and synthesize both channels."""
    return build_realization(cfg, sample_paths(cfg, seed), seed=seed)
