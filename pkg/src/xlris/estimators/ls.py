"""Full-dimensional least squares: the two-sided (2D) form and its vectorised (1D) equivalent."""
from __future__ import annotations

import numpy as np

from ..measurement import MeasurementSet
from .base import COND_LIMIT, SingularGramError, check_gram

# complex128 bytes allowed for the explicit Kronecker Gram in 1D-LS
DEFAULT_MEMORY_CAP = 2 * 1024 ** 3


def _require_full(meas: MeasurementSet):
    K, Q, n_r = meas.Vtilde.shape
    n_u, n_x = meas.F.shape[1:]
    if Q < n_r or n_x < n_u:
        raise ValueError(f"LS needs Q >= N_R and N_X >= N_U, got Q={Q}, N_R={n_r}, N_X={n_x}, N_U={n_u}")


def ls_operators(Vtilde: np.ndarray, F: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Left and right pseudo-inverses ``(V^H V)^-1 V^H`` and ``F^H (F F^H)^-1`` per subcarrier.

    They depend on the training schedule only, so Monte-Carlo runs with a fixed
    schedule can reuse them across trials.

    Raises
    ------
    SingularGramError
        If either Gram matrix has condition number above ``COND_LIMIT``.
    """
    left, right = [], []
    for V, Fk in zip(Vtilde, F):
        Gv = V.conj().T @ V
        Gf = Fk @ Fk.conj().T
        check_gram(Gv, "RIS-side")
        check_gram(Gf, "precoder")
        left.append(np.linalg.solve(Gv, V.conj().T))
        # X Gf^-1 = (Gf^-T X^T)^T
        right.append(np.linalg.solve(Gf.T, Fk.conj()).T)
    return np.stack(left), np.stack(right)


def estimate_2dls(meas: MeasurementSet, ops: tuple[np.ndarray, np.ndarray] | None = None) -> np.ndarray:
    """``H[k] = (V^H V)^-1 V^H Y F^H (F F^H)^-1`` per subcarrier, shape (K, N_R, N_U).

    ``ops`` takes precomputed :func:`ls_operators` for ``meas``'s schedule.
    """
    _require_full(meas)
    left, right = ls_operators(meas.Vtilde, meas.F) if ops is None else ops
    return left @ meas.Y @ right


def kron_sensing(V: np.ndarray, F: np.ndarray) -> np.ndarray:
    """``F^T kron V`` so that ``vec(V H F) = (F^T kron V) vec(H)`` with column-major ``vec``."""
    return np.kron(F.T, V)


def estimate_1dls(meas: MeasurementSet, memory_cap: int = DEFAULT_MEMORY_CAP) -> np.ndarray:
    """Vectorised normal-equation solve on ``F^T kron V``, devectorised to (K, N_R, N_U).

    The Kronecker Gram is ``N_R N_U`` square; ``memory_cap`` bounds its size in bytes.
    """
    _require_full(meas)
    K, Q, n_r = meas.Vtilde.shape
    n_u, n_x = meas.F.shape[1:]
    need = 16 * (Q * n_x * n_r * n_u + (n_r * n_u) ** 2)
    if need > memory_cap:
        raise MemoryError(f"1D-LS needs ~{need / 2**30:.2f} GiB for the Kronecker system "
                          f"(cap {memory_cap / 2**30:.2f} GiB)")
    out = np.empty((K, n_r, n_u), dtype=complex)
    for k, (V, Y, F) in enumerate(zip(meas.Vtilde, meas.Y, meas.F)):
        # cond(A kron B) = cond(A) cond(B), so check the small factors
        c = np.linalg.cond(V.conj().T @ V) * np.linalg.cond(F @ F.conj().T)
        if not np.isfinite(c) or c > COND_LIMIT:
            raise SingularGramError("Kronecker", float(c))
        Fv = kron_sensing(V, F)
        y = Y.reshape(-1, order="F")
        h = np.linalg.solve(Fv.conj().T @ Fv, Fv.conj().T @ y)
        out[k] = h.reshape(n_r, n_u, order="F")
    return out
