"""Array geometry and steering vectors for uniform planar arrays.

Arrays lie in the y-z plane with the element grid centred on the origin.
Element ``(m_y, m_z)`` sits at ``(0, m_y d, m_z d)`` with
``m_y in {-(N_y-1)/2, ..., (N_y-1)/2}`` (half-integer steps for even counts).
Vectors are flattened with ``m_y`` as the outer index and ``m_z`` inner.

Directions are described by virtual angles ``theta_t = cos(theta)`` and
``phi_t = sin(theta) sin(phi)``, which is all the phase geometry depends on.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0


def half_wavelength(f: float) -> float:
    return SPEED_OF_LIGHT / (2.0 * f)


@dataclass(frozen=True)
class UpaShape:
    """Uniform planar array with ``n_y x n_z`` elements spaced ``spacing_d`` metres."""

    n_y: int
    n_z: int
    spacing_d: float

    def __post_init__(self):
        if int(self.n_y) < 1 or int(self.n_z) < 1:
            raise ValueError(f"element counts must be >= 1, got {self.n_y}x{self.n_z}")
        if not np.isfinite(self.spacing_d) or self.spacing_d <= 0:
            raise ValueError(f"spacing must be positive, got {self.spacing_d}")

    @property
    def n(self) -> int:
        return self.n_y * self.n_z

    @property
    def m_y(self) -> np.ndarray:
        return np.arange(self.n_y) - (self.n_y - 1) / 2.0

    @property
    def m_z(self) -> np.ndarray:
        return np.arange(self.n_z) - (self.n_z - 1) / 2.0

    def element_indices(self) -> tuple[np.ndarray, np.ndarray]:
        """Flattened ``(m_y, m_z)`` index arrays of length ``n``."""
        my, mz = np.meshgrid(self.m_y, self.m_z, indexing="ij")
        return my.ravel(), mz.ravel()

    @property
    def aperture(self) -> float:
        """Aperture diagonal in metres."""
        return self.spacing_d * float(np.hypot(self.n_y - 1, self.n_z - 1))

    def rayleigh_distance(self, f: float) -> float:
        return 2.0 * self.aperture ** 2 * f / SPEED_OF_LIGHT


@dataclass(frozen=True)
class SphericalPoint:
    """A source position seen from an array: elevation, azimuth (rad) and range (m)."""

    theta: float
    phi: float
    r: float

    def __post_init__(self):
        vals = (self.theta, self.phi, self.r)
        if not all(np.isfinite(v) for v in vals):
            raise ValueError(f"non-finite spherical point {vals}")
        if self.r <= 0:
            raise ValueError(f"range must be positive, got {self.r}")

    @property
    def theta_t(self) -> float:
        return float(np.cos(self.theta))

    @property
    def phi_t(self) -> float:
        return float(np.sin(self.theta) * np.sin(self.phi))

    @classmethod
    def from_virtual(cls, theta_t: float, phi_t: float, r: float) -> "SphericalPoint":
        """Inverse of the virtual-angle map, with ``phi`` in ``[-pi/2, pi/2]``."""
        theta_t = float(np.clip(theta_t, -1.0, 1.0))
        theta = float(np.arccos(theta_t))
        s = np.sin(theta)
        ratio = 0.0 if s == 0 else float(np.clip(phi_t / s, -1.0, 1.0))
        return cls(theta, float(np.arcsin(ratio)), r)

    def degrees(self) -> tuple[float, float, float]:
        return float(np.degrees(self.theta)), float(np.degrees(self.phi)), self.r


@dataclass(frozen=True)
class CarrierGrid:
    """OFDM subcarrier frequencies ``f_k = f_c + (f_s/K)(k - (K-1)/2)``, ``k = 0..K-1``."""

    f_c: float
    f_s: float
    K: int

    def __post_init__(self):
        if self.K < 1:
            raise ValueError("K must be >= 1")
        if np.any(self.frequencies <= 0):
            raise ValueError("all subcarrier frequencies must be positive")

    @property
    def frequencies(self) -> np.ndarray:
        k = np.arange(self.K)
        return self.f_c + (self.f_s / self.K) * (k - (self.K - 1) / 2.0)

    @property
    def spacing(self) -> float:
        return self.f_s / self.K

    def __getitem__(self, k: int) -> float:
        return float(self.frequencies[k])


def _check_finite(*xs):
    for x in xs:
        if not np.all(np.isfinite(x)):
            raise ValueError("non-finite input to array response")


def exact_path_difference(shape: UpaShape, theta_t, phi_t, r) -> np.ndarray:
    """Exact ``r_(m_y,m_z) - r`` in metres, shape ``(N, G)`` for ``G`` points.

    Uses the cancellation-free form ``(r_m^2 - r^2) / (r_m + r)``.
    """
    theta_t, phi_t, r = (np.atleast_1d(np.asarray(v, dtype=float)) for v in (theta_t, phi_t, r))
    _check_finite(theta_t, phi_t, r)
    if np.any(r <= 0):
        raise ValueError("range must be positive")
    my, mz = shape.element_indices()
    y = my[:, None] * shape.spacing_d
    z = mz[:, None] * shape.spacing_d
    num = -2.0 * r * (y * phi_t + z * theta_t) + y ** 2 + z ** 2
    rm = np.sqrt(r ** 2 + num)
    return num / (rm + r)


def fresnel_path_difference(shape: UpaShape, theta_t, phi_t, inv_r) -> np.ndarray:
    """Second-order (Fresnel) path difference in metres, shape ``(N, G)``.

    ``inv_r = 0`` gives the planar (far-field) limit.
    """
    theta_t, phi_t, inv_r = (np.atleast_1d(np.asarray(v, dtype=float)) for v in (theta_t, phi_t, inv_r))
    _check_finite(theta_t, phi_t, inv_r)
    my, mz = shape.element_indices()
    y = my[:, None] * shape.spacing_d
    z = mz[:, None] * shape.spacing_d
    return (-y * phi_t - z * theta_t
            + 0.5 * inv_r * (z ** 2 * (1 - theta_t ** 2) + y ** 2 * (1 - phi_t ** 2))
            - y * z * theta_t * phi_t * inv_r)


def response_from_path(path_diff: np.ndarray, f) -> np.ndarray:
    """Unit-norm steering vectors ``exp(-j 2 pi f D / c) / sqrt(N)`` from path differences ``D``."""
    n = path_diff.shape[0]
    return np.exp(-2j * np.pi * (f / SPEED_OF_LIGHT) * path_diff) / np.sqrt(n)


def exact_spherical_response(shape: UpaShape, f: float, point: SphericalPoint) -> np.ndarray:
    """Near-field steering vector using exact element-to-source distances."""
    _check_finite(f)
    d = exact_path_difference(shape, point.theta_t, point.phi_t, point.r)
    return response_from_path(d, f)[:, 0]


def fresnel_spherical_response(shape: UpaShape, f: float, point: SphericalPoint) -> np.ndarray:
    """Near-field steering vector under the second-order distance expansion."""
    _check_finite(f)
    d = fresnel_path_difference(shape, point.theta_t, point.phi_t, 1.0 / point.r)
    return response_from_path(d, f)[:, 0]


def planar_path_term(shape: UpaShape, theta_t, phi_t) -> np.ndarray:
    """``d (m_z theta_t + m_y phi_t)`` in metres, shape ``(N, G)``."""
    theta_t, phi_t = (np.atleast_1d(np.asarray(v, dtype=float)) for v in (theta_t, phi_t))
    _check_finite(theta_t, phi_t)
    my, mz = shape.element_indices()
    return shape.spacing_d * (mz[:, None] * theta_t + my[:, None] * phi_t)


def planar_response(shape: UpaShape, f: float, theta_t: float, phi_t: float) -> np.ndarray:
    """Far-field steering vector ``exp(-j 2 pi f d (m_z theta_t + m_y phi_t) / c) / sqrt(N)``.

    Note the sign: the spherical responses carry the opposite linear phase, so
    their far-field limit is ``planar_response(...).conj()``.
    """
    _check_finite(f, theta_t, phi_t)
    if abs(theta_t) > 1 or abs(phi_t) > 1:
        raise ValueError("virtual angles must lie in [-1, 1]")
    return response_from_path(planar_path_term(shape, theta_t, phi_t), f)[:, 0]


def planar_responses(shape: UpaShape, f: float, theta_t, phi_t) -> np.ndarray:
    """Column-stacked planar responses, shape ``(N, G)``."""
    return response_from_path(planar_path_term(shape, theta_t, phi_t), f)


def iter_wideband_responses(path_diff: np.ndarray, freqs, dtype=np.complex128, reanchor: int = 16):
    """Yield ``response_from_path(path_diff, f)`` for each ``f`` in ``freqs``.

    For a uniform carrier grid consecutive responses differ by a fixed phasor,
    so most steps are a complex multiply instead of a fresh ``exp``. The
    recursion is restarted from an exact ``exp`` every ``reanchor`` steps.
    """
    freqs = np.asarray(freqs, dtype=float)
    uniform = freqs.size > 2 and np.allclose(np.diff(freqs), freqs[1] - freqs[0], rtol=1e-12, atol=0)
    step = None
    if uniform:
        step = np.exp(-2j * np.pi * ((freqs[1] - freqs[0]) / SPEED_OF_LIGHT) * path_diff).astype(dtype)
    cur = None
    for i, f in enumerate(freqs):
        if step is None or i % reanchor == 0:
            cur = response_from_path(path_diff, f).astype(dtype)
        else:
            cur = cur * step
        yield cur
