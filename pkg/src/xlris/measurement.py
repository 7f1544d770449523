"""Uplink training: RIS phase schedules, user precoders, BS combiner and received pilots."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import BsRisLink, ChannelRealization
from .config import SystemConfig
from .geometry import planar_responses


def random_unit_modulus(rows: int, cols: int, rng_seed) -> np.ndarray:
    """Entries ``z / |z|`` with ``z ~ CN(0, 1)``, i.e. uniform random phases."""
    if rows < 1 or cols < 1:
        raise ValueError("matrix dimensions must be >= 1")
    rng = np.random.default_rng(rng_seed)
    z = rng.normal(size=(rows, cols)) + 1j * rng.normal(size=(rows, cols))
    return z / np.abs(z)


def complex_noise(rng: np.random.Generator, shape, variance: float) -> np.ndarray:
    return np.sqrt(variance / 2.0) * (rng.normal(size=shape) + 1j * rng.normal(size=shape))


@dataclass
class TrainingSchedule:
    V_rows: np.ndarray  # (Q, N_R) unit modulus
    F: np.ndarray       # (K, N_U, N_X), columns with energy sigma_p2
    w: np.ndarray       # (K, N_B) BS combiner
    sigma_p2: float
    sigma_n2: float

    @property
    def Q(self) -> int:
        return self.V_rows.shape[0]

    @property
    def n_x(self) -> int:
        return self.F.shape[2]


@dataclass
class MeasurementSet:
    Y: np.ndarray       # (K, Q, N_X)
    Vtilde: np.ndarray  # (K, Q, N_R)
    F: np.ndarray       # (K, N_U, N_X)
    noise_var: float    # variance of each entry of the effective noise
    noise_seed: object = None

    @property
    def K(self) -> int:
        return self.Y.shape[0]

    def save(self, path) -> None:
        np.savez_compressed(path, Y=self.Y, Vtilde=self.Vtilde, F=self.F,
                            noise_var=self.noise_var,
                            noise_seed=np.array(-1 if self.noise_seed is None else self.noise_seed))

    @classmethod
    def load(cls, path) -> "MeasurementSet":
        with np.load(path) as z:
            seed = z["noise_seed"].item()
            return cls(z["Y"], z["Vtilde"], z["F"], float(z["noise_var"]), None if seed == -1 else seed)


def bs_combiner(cfg: SystemConfig, link: BsRisLink) -> np.ndarray:
    """Combiner steered to the RIS at each subcarrier, shape (K, N_B)."""
    return np.stack([planar_responses(cfg.bs, f, link.bs_theta_t, link.bs_phi_t)[:, 0]
                     for f in cfg.freqs])


def make_schedule(cfg: SystemConfig, link: BsRisLink, rng_seed, Q: int | None = None,
                  n_x: int | None = None) -> TrainingSchedule:
    """Random unit-modulus RIS phases and a frequency-flat random precoder."""
    Q = cfg.Q if Q is None else Q
    n_x = cfg.n_x if n_x is None else n_x
    ss = np.random.SeedSequence(rng_seed)
    s_v, s_f = ss.spawn(2)
    V = random_unit_modulus(Q, cfg.n_r, s_v)
    F0 = random_unit_modulus(cfg.n_u, n_x, s_f) * np.sqrt(cfg.sigma_p2 / cfg.n_u)
    F = np.broadcast_to(F0, (cfg.K, cfg.n_u, n_x)).copy()
    return TrainingSchedule(V, F, bs_combiner(cfg, link), cfg.sigma_p2, cfg.sigma_n2)


def effective_bs_channel(w: np.ndarray, H_B: np.ndarray) -> np.ndarray:
    """``h_B[k] = w[k]^H H_B[k]``, shape (K, N_R)."""
    return np.einsum("kb,kbr->kr", w.conj(), H_B)


def effective_ris_matrix(V_rows: np.ndarray, h_B_tilde: np.ndarray) -> np.ndarray:
    """``V_rows diag(h_B)``: row ``q`` is ``v_q * h_B`` elementwise."""
    h = np.asarray(h_B_tilde)
    if not np.any(h):
        raise ValueError("effective BS-RIS channel is identically zero")
    return V_rows * h[None, :]


def effective_sensing(sched: TrainingSchedule, H_B: np.ndarray) -> np.ndarray:
    """``Vtilde[k]`` for every subcarrier, shape (K, Q, N_R)."""
    h = effective_bs_channel(sched.w, H_B)
    return np.stack([effective_ris_matrix(sched.V_rows, hk) for hk in h])


def simulate_training(channel: ChannelRealization, sched: TrainingSchedule, rng_seed,
                      Vtilde: np.ndarray | None = None) -> MeasurementSet:
    """``Y[k] = Vtilde[k] H_U[k] F[k] + N[k]`` with ``N`` entries ``CN(0, sigma_n2 ||w[k]||^2)``.

    A precomputed ``Vtilde`` may be passed when the BS-RIS link and schedule are
    reused across many channel draws.
    """
    K = channel.H_U.shape[0]
    if Vtilde is None:
        Vtilde = effective_sensing(sched, channel.H_B)
    if Vtilde.shape[0] != K or sched.F.shape[0] != K:
        raise ValueError("subcarrier count mismatch between channel and schedule")
    clean = Vtilde @ channel.H_U @ sched.F
    w_energy = np.sum(np.abs(sched.w) ** 2, axis=1)
    rng = np.random.default_rng(rng_seed)
    noise = complex_noise(rng, clean.shape, 1.0) * np.sqrt(sched.sigma_n2 * w_energy)[:, None, None]
    return MeasurementSet(clean + noise, Vtilde, sched.F, float(sched.sigma_n2 * w_energy.mean()), rng_seed)
