import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import erf

from xlris.config import SystemConfig
from xlris.geometry import SphericalPoint, UpaShape
from xlris.squint import (PatternQuery, TrajectoryError, ZetaPair, fresnel_gain, gain_erf_approx,
                          pattern_gain_exact, quadratic_sum_gain, solve_trajectory_point, squint_zetas,
                          trajectory)

DESIRED = SphericalPoint(np.radians(45), np.radians(45), 20.0)


def fig_config(**kw):
    return SystemConfig(ris_ny=256, ris_nz=4, K=32, f_s=4e9, **kw)


def test_fresnel_gain_frozen_values():
    # u = 1: |C(1) + j S(1)| = 0.894597...
    assert fresnel_gain(0.5, 2) == pytest.approx(0.8945975610421952, rel=1e-12)
    assert fresnel_gain(1e-4, 128) == pytest.approx(0.9283303422775154, rel=1e-12)
    assert fresnel_gain(0.0, 64) == 1.0
    assert fresnel_gain(-0.5, 2) == fresnel_gain(0.5, 2)


@given(st.floats(1e-7, 1.0), st.integers(1, 512))
def test_fresnel_gain_equals_erf_form(zeta, n):
    ref = abs(erf((1 - 1j) / (2 * np.sqrt(2)) * np.sqrt(np.pi * zeta) * n)) / (np.sqrt(zeta) * n)
    assert fresnel_gain(zeta, n) == pytest.approx(ref, rel=1e-9, abs=1e-12)


@given(st.integers(16, 256), st.floats(0.0, 0.5))
def test_continuous_model_tracks_discrete_sum_without_aliasing(n, zn):
    # below zeta * N ~ 0.5 the quadratic phase steps stay under pi/2 per element
    zeta = zn / n
    assert fresnel_gain(zeta, n) == pytest.approx(quadratic_sum_gain(zeta, n), rel=0.02)


def test_gain_erf_approx_is_separable():
    s = UpaShape(128, 4, 0.005)
    z = ZetaPair(2e-4, 1e-2)
    assert gain_erf_approx(z, s) == pytest.approx(fresnel_gain(2e-4, 128) * fresnel_gain(1e-2, 4))
    with pytest.raises(ValueError):
        ZetaPair(np.inf, 0.0)


def test_pattern_gain_is_one_at_focus():
    cfg = SystemConfig(K=5)
    q = PatternQuery(DESIRED, DESIRED, 2)
    assert pattern_gain_exact(cfg.ris, cfg.grid, q) == pytest.approx(1.0)
    far = SphericalPoint(np.radians(80), np.radians(-10), 5.0)
    assert pattern_gain_exact(cfg.ris, cfg.grid, PatternQuery(DESIRED, far, 2)) < 0.2


def test_zetas_vanish_at_centre_frequency_focus():
    cfg = SystemConfig()
    z = squint_zetas(cfg.d, cfg.f_c, cfg.f_c, DESIRED.theta_t, DESIRED.phi_t, 1 / DESIRED.r, DESIRED)
    assert abs(z.zeta_phi) < 1e-18 and abs(z.zeta_theta) < 1e-18


def test_trajectory_endpoints_frozen():
    cfg = fig_config()
    first = solve_trajectory_point(cfg, DESIRED, 0).degrees()
    last = solve_trajectory_point(cfg, DESIRED, 31).degrees()
    np.testing.assert_allclose(first, (40.56457961612239, 55.69291062087507, 17.659158340211842), rtol=1e-6)
    np.testing.assert_allclose(last, (48.5975355261211, 38.56869807546136, 22.27669256592692), rtol=1e-6)


def test_trajectory_rows_monotone_distance():
    rows = trajectory(fig_config(), DESIRED)
    r = [row["r"] for row in rows]
    assert np.all(np.diff(r) > 0)
    assert min(row["gain"] for row in rows) > 0.99


def test_centre_subcarrier_returns_desired():
    cfg = SystemConfig(K=5)
    assert solve_trajectory_point(cfg, DESIRED, 2) == DESIRED


def test_flat_objective_raises(monkeypatch):
    import xlris.squint as sq
    monkeypatch.setattr(sq, "fresnel_gain", lambda zeta, n: np.ones_like(np.asarray(zeta, dtype=float)))
    with pytest.raises(TrajectoryError):
        solve_trajectory_point(SystemConfig(K=4), DESIRED, 0)


def test_inside_aperture_rejected():
    cfg = SystemConfig(ris_ny=512, K=4)
    with pytest.raises(ValueError):
        solve_trajectory_point(cfg, SphericalPoint(1.0, 0.2, 1.0), 0)


@given(st.floats(1e-8, 1.0), st.integers(1, 512))
def test_fresnel_gain_even_in_zeta(zeta, n):
    assert fresnel_gain(-zeta, n) == fresnel_gain(zeta, n)


def test_erf_model_matches_quadratic_pattern_at_desk_case():
    cfg = fig_config()
    for k in (0, 8, 31):
        z = squint_zetas(cfg.d, cfg.grid[k], cfg.f_c, DESIRED.theta_t, DESIRED.phi_t, 1 / DESIRED.r, DESIRED)
        exact = pattern_gain_exact(cfg.ris, cfg.grid, PatternQuery(DESIRED, DESIRED, k),
                                   include_linear=False, include_cross=False)
        assert gain_erf_approx(z, cfg.ris) == pytest.approx(exact, rel=0.02)


def test_linear_term_optimum_scales_with_frequency():
    cfg = SystemConfig(ris_ny=64, ris_nz=1, K=32, f_s=4e9)
    k = 0
    ratio = cfg.f_c / cfg.grid[k]
    q = SphericalPoint(np.radians(70), np.radians(30), 1e6)
    moved = SphericalPoint.from_virtual(q.theta_t, ratio * q.phi_t, q.r)
    g_moved = pattern_gain_exact(cfg.ris, cfg.grid, PatternQuery(q, moved, k), include_cross=False)
    g_same = pattern_gain_exact(cfg.ris, cfg.grid, PatternQuery(q, q, k), include_cross=False)
    assert g_moved >= g_same and g_moved == pytest.approx(1.0, abs=1e-3)
