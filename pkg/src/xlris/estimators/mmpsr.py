"""Multi-frequency parallelizable subspace recovery (MMPSR).

Per subcarrier the received block ``Y[k]`` is split by SVD into ``P`` RIS-side
and user-side factor vectors. Each factor is scored against the projected
dictionaries ``Phi_R[k] = V[k] B_R[k]`` and ``Phi_U[k] = F[k]^H A_U[k]``; scores
are summed over subcarriers (the support is common to all of them), the
argmax is refined on a local fine grid and the channel is rebuilt by
two-sided least squares on the recovered supports.
"""
from __future__ import annotations

import time
import warnings
from dataclasses import dataclass

import numpy as np

from ..config import SystemConfig
from ..dictionary import (AngularDictionary, SphericalDictionary, build_angular_dictionary,
                          build_spherical_dictionary)
from ..geometry import fresnel_path_difference, iter_wideband_responses, planar_path_term
from ..measurement import MeasurementSet
from .base import COND_LIMIT, EstimationResult, PathLabel, SupportEstimate

MATCHERS = ("CC", "IN")


@dataclass
class DictionaryPair:
    ris: SphericalDictionary
    user: AngularDictionary
    freqs: np.ndarray

    @classmethod
    def from_config(cls, cfg: SystemConfig, cache_dir=None) -> "DictionaryPair":
        return cls(build_spherical_dictionary(cfg, cache_dir), build_angular_dictionary(cfg), cfg.freqs)

    def with_freqs(self, freqs) -> "DictionaryPair":
        return DictionaryPair(self.ris, self.user, np.asarray(freqs, dtype=float))


@dataclass
class RefineConfig:
    step_theta: float = 0.005    # RIS elevation virtual angle
    step_phi: float = 0.005      # RIS azimuth virtual angle
    step_vartheta: float = 0.005  # user elevation virtual angle
    step_varphi: float = 0.005   # user azimuth virtual angle
    step_inv_r: float = 0.005    # 1/m
    enabled: bool = True

    @classmethod
    def from_config(cls, cfg: SystemConfig) -> "RefineConfig":
        return cls(cfg.step_theta, cfg.step_phi, cfg.step_vartheta, cfg.step_varphi, cfg.step_inv_r)


@dataclass
class SubspaceSlice:
    T_R: np.ndarray    # (K, Q, P)   U[:, p] sqrt(s_p)
    T_U: np.ndarray    # (K, N_X, P) V[:, p] sqrt(s_p)
    sigma: np.ndarray  # (K, min(Q, N_X)) all singular values


def svd_subspace(Y: np.ndarray, P: int) -> SubspaceSlice:
    """Top-``P`` factors of each ``Y[k] = U S V^H`` with the square-root singular-value split.

    ``T_R[k] T_U[k]^H`` is the best rank-``P`` approximation of ``Y[k]``.
    """
    if isinstance(Y, MeasurementSet):
        Y = Y.Y
    Y = np.asarray(Y)
    K, Q, n_x = Y.shape
    if P < 1 or P > min(Q, n_x):
        raise ValueError(f"P={P} must lie in [1, min(Q, N_X)={min(Q, n_x)}]")
    U, s, Vh = np.linalg.svd(Y, full_matrices=False)
    tol = s[:, :1] * max(Q, n_x) * np.finfo(float).eps
    if np.any(s[:, P - 1:P] <= tol):
        warnings.warn("requested P exceeds the numerical rank of Y on some subcarriers; "
                      "trailing factors are padded with zeros", RuntimeWarning, stacklevel=2)
    root = np.sqrt(np.where(s[:, :P] > tol, s[:, :P], 0.0))
    T_R = U[:, :, :P] * root[:, None, :]
    T_U = Vh[:, :P, :].conj().transpose(0, 2, 1) * root[:, None, :]
    return SubspaceSlice(T_R, T_U, s)


def correlation_coefficient(x: np.ndarray, y: np.ndarray) -> complex:
    """Complex Pearson coefficient ``<x - mean(x), y - mean(y)> / (||.|| ||.||)`` (conjugating ``x``)."""
    x, y = np.asarray(x), np.asarray(y)
    if x.shape != y.shape or x.ndim != 1 or x.size < 2:
        raise ValueError("need two vectors of equal length >= 2")
    xc, yc = x - x.mean(), y - y.mean()
    nx, ny = np.linalg.norm(xc), np.linalg.norm(yc)
    if nx == 0 or ny == 0:
        raise ValueError("zero-variance vector has no correlation coefficient")
    return complex(np.vdot(xc, yc) / (nx * ny))


def _column_stats(Phi: np.ndarray):
    """Raw and centred column norms of ``Phi`` (..., L, G)."""
    sq = np.sum(np.abs(Phi) ** 2, axis=-2, dtype=float)
    mean = Phi.mean(axis=-2, dtype=complex)
    centred = np.sqrt(np.maximum(sq - Phi.shape[-2] * np.abs(mean) ** 2, 0.0))
    return np.sqrt(sq), centred


def score_block(T: np.ndarray, Phi: np.ndarray, centred_norm: np.ndarray | None, matcher: str) -> np.ndarray:
    """Matching scores of factor vectors ``T`` (..., L, P) against columns of ``Phi`` (..., L, G), shape (..., P, G).

    ``CC`` uses ``|rho|``; centring only one side suffices since a centred
    vector is orthogonal to the all-ones vector. ``IN`` uses ``|Phi^H t|``.
    Leading dimensions broadcast, so all subcarriers can be scored in one call.
    """
    if matcher == "IN":
        return np.abs(np.ascontiguousarray(np.swapaxes(T, -1, -2).conj(), dtype=Phi.dtype) @ Phi)
    if matcher != "CC":
        raise ValueError(f"unknown matcher {matcher!r}")
    Tc = T - T.mean(axis=-2, keepdims=True)
    tn = np.linalg.norm(Tc, axis=-2)
    num = np.abs(np.ascontiguousarray(np.swapaxes(Tc, -1, -2).conj(), dtype=Phi.dtype) @ Phi).astype(float)
    if centred_norm is None:
        centred_norm = _column_stats(Phi)[1]
    den = tn[..., :, None] * centred_norm[..., None, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(den > 0, num / den, 0.0)
    return out


class MatchingContext:
    """Projected dictionaries ``Phi_R[k]``, ``Phi_U[k]`` and their column statistics.

    Depends only on the training schedule and BS-RIS link, so one context
    serves every channel draw measured with the same ``Vtilde`` and ``F``.
    """

    def __init__(self, Vtilde: np.ndarray, F: np.ndarray, dicts: DictionaryPair, dtype=np.complex64):
        if Vtilde.shape[0] != len(dicts.freqs) or F.shape[0] != len(dicts.freqs):
            raise ValueError("subcarrier count mismatch between measurements and dictionaries")
        t0 = time.perf_counter()
        self.dicts = dicts
        self.Vtilde = Vtilde
        self.F = F
        K = len(dicts.freqs)
        Q = Vtilde.shape[1]
        # atoms are stored row-contiguous, (K, G, Q); Phi_R is the (K, Q, G) view.
        # Scoring against this layout streams each atom once and scales linearly in G.
        rows = np.empty((K, dicts.ris.size, Q), dtype=dtype)
        for k, B in enumerate(dicts.ris.iter_atoms(dicts.freqs, dtype)):
            rows[k] = B.T @ Vtilde[k].T.astype(dtype)
        self.Phi_R = np.swapaxes(rows, 1, 2)
        rows = np.stack([A.T @ F[k].conj().astype(dtype)
                         for k, A in enumerate(dicts.user.iter_atoms(dicts.freqs, dtype))])
        self.Phi_U = np.swapaxes(rows, 1, 2)
        self.cn_R = np.stack([_column_stats(P)[1] for P in self.Phi_R])
        self.cn_U = np.stack([_column_stats(P)[1] for P in self.Phi_U])
        self.build_time = time.perf_counter() - t0

    def matches(self, Vtilde, F) -> bool:
        return (Vtilde is self.Vtilde or np.array_equal(Vtilde, self.Vtilde)) and \
            (F is self.F or np.array_equal(F, self.F))

    def summed_scores(self, sub: SubspaceSlice, matcher: str) -> tuple[np.ndarray, np.ndarray]:
        """Scores summed over subcarriers, shapes (P, G_R) and (P, G_U)."""
        s_R = score_block(sub.T_R, self.Phi_R, self.cn_R, matcher).sum(axis=0)
        s_U = score_block(sub.T_U, self.Phi_U, self.cn_U, matcher).sum(axis=0)
        return s_R, s_U


def distinct_argmax(scores: np.ndarray) -> np.ndarray:
    """Row-wise argmax where a row whose best atom is taken falls back to its next best."""
    picks: list[int] = []
    for row in scores:
        for g in np.argsort(-row, kind="stable"):
            if g not in picks:
                picks.append(int(g))
                break
    return np.array(picks, dtype=int)


def _offsets(half_width: float, step: float) -> np.ndarray:
    if not np.isfinite(half_width) or step <= 0:
        return np.zeros(1)
    n = int(np.floor(half_width / step + 1e-9))
    return step * np.arange(-n, n + 1)


def _ris_candidates(d: SphericalDictionary, g: int, rc: RefineConfig, r_min: float):
    th = np.unique(np.clip(d.theta_t[g] + _offsets(1.0 / d.g_z, rc.step_theta), -1, 1))
    ph = np.unique(np.clip(d.phi_t[g] + _offsets(1.0 / d.g_y, rc.step_phi), -1, 1))
    ir = np.unique(np.clip(d.inv_r[g] + _offsets(0.5 * d.ring_step[g], rc.step_inv_r), 0.0, 1.0 / r_min))
    a, b, c = np.meshgrid(th, ph, ir, indexing="ij")
    return a.ravel(), b.ravel(), c.ravel()


def _user_candidates(d: AngularDictionary, g: int, rc: RefineConfig):
    th = np.clip(d.theta_t[g] + _offsets(1.0 / d.g_z, rc.step_vartheta), -1, 1)
    ph = np.clip(d.phi_t[g] + _offsets(1.0 / d.g_y, rc.step_varphi), -1, 1)
    a, b = np.meshgrid(np.unique(th), np.unique(ph), indexing="ij")
    return a.ravel(), b.ravel()


def _refine_side(T: np.ndarray, path: np.ndarray, blocks: list[slice], freqs, project, matcher):
    """Summed scores of candidate atoms (columns of ``path``) with block ``p`` scored only by factor ``p``."""
    total = np.zeros(path.shape[1])
    for k, atoms in enumerate(iter_wideband_responses(path, freqs, np.complex64)):
        Phi = project(k, atoms)
        S = score_block(T[k], Phi, None, matcher)
        for p, sl in enumerate(blocks):
            total[sl] += S[p, sl]
    return [int(sl.start + np.argmax(total[sl])) for sl in blocks]


def rebuild_channel(meas: MeasurementSet, ris_path: np.ndarray, user_path: np.ndarray,
                    freqs) -> tuple[np.ndarray, list[float]]:
    """Two-sided LS on fixed supports: ``Xi = Phi_R^+ Y (Phi_U^+)^H``, ``H = B Xi A^H``.

    Falls back to the pseudo-inverse when a Gram matrix is worse conditioned
    than ``COND_LIMIT``. Returns the channel and the per-subcarrier worst
    condition number.
    """
    K = len(freqs)
    n_r, n_u = ris_path.shape[0], user_path.shape[0]
    H = np.empty((K, n_r, n_u), dtype=complex)
    conds = []
    for k, (B, A) in enumerate(zip(iter_wideband_responses(ris_path, freqs),
                                   iter_wideband_responses(user_path, freqs))):
        Phi_R = meas.Vtilde[k] @ B
        Phi_U = meas.F[k].conj().T @ A
        Gr, Gu = Phi_R.conj().T @ Phi_R, Phi_U.conj().T @ Phi_U
        c = max(np.linalg.cond(Gr), np.linalg.cond(Gu))
        conds.append(float(c))
        if c <= COND_LIMIT:
            left = np.linalg.solve(Gr, Phi_R.conj().T @ meas.Y[k] @ Phi_U)
            Xi = np.linalg.solve(Gu.T, left.T).T
        else:
            Xi = np.linalg.pinv(Phi_R) @ meas.Y[k] @ np.linalg.pinv(Phi_U).conj().T
        H[k] = B @ Xi @ A.conj().T
    return H, conds


def mmpsr(meas: MeasurementSet, dicts: DictionaryPair, P: int, matcher: str = "CC",
          refine: RefineConfig | None = None, ctx: MatchingContext | None = None) -> EstimationResult:
    """Recover the RIS-user channel from ``meas`` with MMPSR.

    Parameters
    ----------
    meas : MeasurementSet
    dicts : DictionaryPair
        Spherical RIS dictionary, angular user dictionary and the subcarrier frequencies.
    P : int
        Number of paths to recover.
    matcher : {"CC", "IN"}
        Correlation-coefficient or inner-product scoring.
    refine : RefineConfig, optional
        Local grid refinement; defaults to 0.005 steps on every parameter.
    ctx : MatchingContext, optional
        Precomputed projected dictionaries for this schedule; built if missing.

    Returns
    -------
    EstimationResult
        ``timings`` holds ``svd``, ``context``, ``match``, ``refine`` and ``rebuild`` seconds.
    """
    if matcher not in MATCHERS:
        raise ValueError(f"matcher must be one of {MATCHERS}")
    if P < 1:
        raise ValueError("P must be >= 1")
    refine = refine or RefineConfig()
    timings = {}
    freqs = dicts.freqs
    r_min = dicts.ris.r_min

    t = time.perf_counter()
    sub = svd_subspace(meas.Y, P)
    timings["svd"] = time.perf_counter() - t

    t = time.perf_counter()
    if ctx is None or ctx.dicts is not dicts or not ctx.matches(meas.Vtilde, meas.F):
        ctx = MatchingContext(meas.Vtilde, meas.F, dicts)
    timings["context"] = time.perf_counter() - t

    t = time.perf_counter()
    s_R, s_U = ctx.summed_scores(sub, matcher)
    g_r = distinct_argmax(s_R)
    g_u = distinct_argmax(s_U)
    timings["match"] = time.perf_counter() - t

    R, U = dicts.ris, dicts.user
    coarse = [PathLabel(R.theta_t[a], R.phi_t[a], R.inv_r[a], U.theta_t[b], U.phi_t[b])
              for a, b in zip(g_r, g_u)]

    t = time.perf_counter()
    if refine.enabled:
        cand_r = [_ris_candidates(R, g, refine, r_min) for g in g_r]
        cand_u = [_user_candidates(U, g, refine) for g in g_u]
        th_r, ph_r, ir_r = (np.concatenate(c) for c in zip(*cand_r))
        th_u, ph_u = (np.concatenate(c) for c in zip(*cand_u))
        edges_r = np.cumsum([0] + [c[0].size for c in cand_r])
        edges_u = np.cumsum([0] + [c[0].size for c in cand_u])
        blocks_r = [slice(a, b) for a, b in zip(edges_r[:-1], edges_r[1:])]
        blocks_u = [slice(a, b) for a, b in zip(edges_u[:-1], edges_u[1:])]
        D_r = fresnel_path_difference(R.shape, th_r, ph_r, ir_r)
        D_u = planar_path_term(U.shape, th_u, ph_u)
        V64 = meas.Vtilde.astype(np.complex64)
        FH64 = meas.F.conj().transpose(0, 2, 1).astype(np.complex64)
        best_r = _refine_side(sub.T_R, D_r, blocks_r, freqs, lambda k, B: V64[k] @ B, matcher)
        best_u = _refine_side(sub.T_U, D_u, blocks_u, freqs, lambda k, A: FH64[k] @ A, matcher)
        refined = [PathLabel(th_r[a], ph_r[a], ir_r[a], th_u[b], ph_u[b]) for a, b in zip(best_r, best_u)]
        ris_path, user_path = D_r[:, best_r], D_u[:, best_u]
    else:
        refined = list(coarse)
        ris_path, user_path = R.path[:, g_r], U.path[:, g_u]
    timings["refine"] = time.perf_counter() - t

    t = time.perf_counter()
    H, conds = rebuild_channel(meas, ris_path, user_path, freqs)
    timings["rebuild"] = time.perf_counter() - t

    support = SupportEstimate(g_r, g_u, coarse, refined)
    return EstimationResult(f"{matcher}-MMPSR", H, support, timings=timings,
                            meta={"max_cond": max(conds), "context_build": ctx.build_time})

