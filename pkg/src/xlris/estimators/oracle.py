"""Oracle two-sided LS with the true steering vectors, and its analytic NMSE lower bound."""
from __future__ import annotations

import time
import warnings

import numpy as np

from ..channel import ChannelRealization, ris_path_matrix
from ..config import SystemConfig
from ..geometry import planar_path_term, response_from_path
from ..measurement import MeasurementSet, TrainingSchedule, effective_sensing
from .base import COND_LIMIT, EstimationResult


def true_supports(cfg: SystemConfig, paths, freqs=None):
    """``(B_bar, A_bar)`` of shapes (K, N_R, P), (K, N_U, P) from the exact path geometry."""
    freqs = cfg.freqs if freqs is None else freqs
    D = ris_path_matrix(cfg, paths, "exact")
    Du = planar_path_term(cfg.user, [p.user_theta_t for p in paths], [p.user_phi_t for p in paths])
    return (np.stack([response_from_path(D, f) for f in freqs]),
            np.stack([response_from_path(Du, f) for f in freqs]))


def estimate_2dols(meas: MeasurementSet, cfg: SystemConfig, true_paths) -> EstimationResult:
    """``Xi = (Phi_R^H Phi_R)^-1 Phi_R^H Y Phi_U (Phi_U^H Phi_U)^-1`` with the true supports.

    Gram matrices worse conditioned than ``COND_LIMIT`` (nearly collinear paths)
    trigger a warning and a pseudo-inverse solve; the worst condition number is
    kept in ``meta["max_cond"]``.
    """
    t0 = time.perf_counter()
    B, A = true_supports(cfg, true_paths)
    K = B.shape[0]
    H = np.empty((K, B.shape[1], A.shape[1]), dtype=complex)
    worst = 0.0
    for k in range(K):
        Phi_R = meas.Vtilde[k] @ B[k]
        Phi_U = meas.F[k].conj().T @ A[k]
        Gr, Gu = Phi_R.conj().T @ Phi_R, Phi_U.conj().T @ Phi_U
        c = max(np.linalg.cond(Gr), np.linalg.cond(Gu))
        worst = max(worst, float(c))
        if c <= COND_LIMIT:
            left = np.linalg.solve(Gr, Phi_R.conj().T @ meas.Y[k] @ Phi_U)
            Xi = np.linalg.solve(Gu.T, left.T).T
        else:
            Xi = np.linalg.pinv(Phi_R) @ meas.Y[k] @ np.linalg.pinv(Phi_U).conj().T
        H[k] = B[k] @ Xi @ A[k].conj().T
    if worst > COND_LIMIT:
        warnings.warn(f"oracle Gram ill-conditioned (cond ~ {worst:.2e})", RuntimeWarning, stacklevel=2)
    return EstimationResult("2D-OLS", H, timings={"total": time.perf_counter() - t0},
                            meta={"max_cond": worst})


def gamma_terms(cfg: SystemConfig, channel: ChannelRealization, sched: TrainingSchedule,
                Vtilde: np.ndarray | None = None) -> np.ndarray:
    """Per-subcarrier ``gamma_k`` of the bound.

    ``gamma_k = [lmax(B^H B) lmax(A^H A) / (lmin(B^H B) lmin(A^H A))] ||Phi_U||_F^2 ||Phi_R||_F^2``.
    """
    B, A = true_supports(cfg, channel.paths)
    if Vtilde is None:
        Vtilde = effective_sensing(sched, channel.H_B)
    out = np.empty(B.shape[0])
    for k in range(B.shape[0]):
        eb = np.linalg.eigvalsh(B[k].conj().T @ B[k])
        ea = np.linalg.eigvalsh(A[k].conj().T @ A[k])
        fr = np.linalg.norm(Vtilde[k] @ B[k]) ** 2
        fu = np.linalg.norm(sched.F[k].conj().T @ A[k]) ** 2
        out[k] = eb[-1] * ea[-1] / (eb[0] * ea[0]) * fu * fr
    return out


def lower_bound(cfg: SystemConfig, channel: ChannelRealization, sched: TrainingSchedule,
                noise_var: float | None = None, Vtilde: np.ndarray | None = None) -> float:
    """``K sigma^2 P^5 / (kappa N_R N_U sum_k gamma_k)``.

    ``noise_var`` defaults to the effective per-entry noise variance
    ``sigma_n2 * mean ||w[k]||^2`` seen in the received pilots.
    """
    kappa = channel.kappa
    if kappa <= 0:
        raise ValueError("total path gain kappa must be positive")
    if noise_var is None:
        noise_var = sched.sigma_n2 * float(np.mean(np.sum(np.abs(sched.w) ** 2, axis=1)))
    gam = gamma_terms(cfg, channel, sched, Vtilde)
    P = len(channel.paths)
    return float(len(gam) * noise_var * P ** 5 / (kappa * cfg.n_r * cfg.n_u * gam.sum()))


def noise_trace_moment(X: np.ndarray, rows: int, variance: float, draws: int, seed) -> np.ndarray:
    """Monte-Carlo ``E{N X N^H}`` for ``N`` with i.i.d. ``CN(0, variance)`` entries, shape (rows, rows)."""
    X = np.asarray(X)
    n = X.shape[0]
    rng = np.random.default_rng(seed)
    acc = np.zeros((rows, rows), dtype=complex)
    batch = 1000
    done = 0
    while done < draws:
        b = min(batch, draws - done)
        N = np.sqrt(variance / 2) * (rng.normal(size=(b, rows, n)) + 1j * rng.normal(size=(b, rows, n)))
        acc += np.einsum("bij,jk,blk->il", N, X, N.conj())
        done += b
    return acc / draws
