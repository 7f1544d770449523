"""Result containers and the NMSE functional shared by all estimators."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

# Gram matrices above this condition number are treated as singular
COND_LIMIT = 1e12


class SingularGramError(np.linalg.LinAlgError):
    def __init__(self, what: str, cond: float):
        super().__init__(f"{what} Gram matrix is ill-conditioned (cond ~ {cond:.3e})")
        self.cond = cond


def check_gram(G: np.ndarray, what: str) -> float:
    c = float(np.linalg.cond(G))
    if not np.isfinite(c) or c > COND_LIMIT:
        raise SingularGramError(what, c)
    return c


def nmse_per_k(H_true: np.ndarray, H_hat: np.ndarray) -> np.ndarray:
    """``||H[k] - H_hat[k]||_F^2 / ||H[k]||_F^2`` for each subcarrier."""
    H_true, H_hat = np.asarray(H_true), np.asarray(H_hat)
    if H_true.shape != H_hat.shape:
        raise ValueError(f"shape mismatch {H_true.shape} vs {H_hat.shape}")
    H_true = H_true.reshape((-1,) + H_true.shape[-2:])
    H_hat = H_hat.reshape(H_true.shape)
    den = np.sum(np.abs(H_true) ** 2, axis=(1, 2))
    if np.any(den == 0):
        raise ValueError("true channel has zero energy on some subcarrier")
    return np.sum(np.abs(H_true - H_hat) ** 2, axis=(1, 2)) / den


def nmse(H_true: np.ndarray, H_hat: np.ndarray) -> float:
    """Subcarrier-averaged Frobenius-relative squared error."""
    return float(nmse_per_k(H_true, H_hat).mean())


@dataclass
class PathLabel:
    """Continuous support of one path: RIS side ``(theta_t, phi_t, inv_r)``, user side ``(theta_t, phi_t)``."""

    theta_t: float
    phi_t: float
    inv_r: float
    u_theta_t: float
    u_phi_t: float

    def as_tuple(self):
        return (self.theta_t, self.phi_t, self.inv_r, self.u_theta_t, self.u_phi_t)


@dataclass
class SupportEstimate:
    g_r: np.ndarray  # (P,) coarse RIS atom indices
    g_u: np.ndarray  # (P,) coarse user atom indices
    coarse: list[PathLabel]
    refined: list[PathLabel]

    @property
    def P(self) -> int:
        return len(self.g_r)

    def to_dict(self) -> dict:
        return {
            "g_r": [int(g) for g in self.g_r],
            "g_u": [int(g) for g in self.g_u],
            "coarse": [list(p.as_tuple()) for p in self.coarse],
            "refined": [list(p.as_tuple()) for p in self.refined],
        }


@dataclass
class EstimationResult:
    method: str
    H_hat: np.ndarray  # (K, N_R, N_U)
    support: SupportEstimate | None = None
    nmse_k: np.ndarray | None = None
    timings: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    @property
    def nmse(self) -> float | None:
        return None if self.nmse_k is None else float(np.mean(self.nmse_k))

    def score(self, H_true: np.ndarray) -> "EstimationResult":
        self.nmse_k = nmse_per_k(H_true, self.H_hat)
        return self

    def to_json(self, config_hash: str = "", seed=None) -> str:
        return json.dumps({
            "schema": "xlris.estimate/1",
            "method": self.method,
            "config_hash": config_hash,
            "seed": seed,
            "nmse": self.nmse,
            "nmse_k": None if self.nmse_k is None else [float(v) for v in self.nmse_k],
            "support": None if self.support is None else self.support.to_dict(),
            "timings": {k: float(v) for k, v in self.timings.items()},
            "meta": self.meta,
        }, indent=2)
