import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from xlris.config import SystemConfig
from xlris.dictionary import (build_angular_dictionary, build_spherical_dictionary, distance_ring_step,
                              distance_ring_steps, ring_coherence, spherical_cache_key)

from conftest import small_config


@pytest.fixture(scope="module")
def desk_dict():
    return build_spherical_dictionary(SystemConfig())


def dirichlet_half_bin(n):
    return 1.0 / (n * np.sin(np.pi / (2 * n)))


def test_angular_dft_orthogonal_at_centre():
    cfg = SystemConfig(g_u_y=8, g_u_z=4)
    A = build_angular_dictionary(cfg).atoms(cfg.f_c)
    np.testing.assert_allclose(A.conj().T @ A, np.eye(32), atol=1e-10)


def test_angular_grid_starts_at_minus_one():
    d = build_angular_dictionary(SystemConfig(g_u_y=4, g_u_z=2))
    assert sorted(set(d.phi_t)) == [-1.0, -0.5, 0.0, 0.5]
    assert sorted(set(d.theta_t)) == [-1.0, 0.0]


def test_angular_double_grid_coherence_is_half_bin_dirichlet():
    cfg = SystemConfig()  # 8x4 user array, G = 8 N per axis
    cfg = cfg.replace(g_u_y=16, g_u_z=8)
    A = build_angular_dictionary(cfg).atoms(cfg.f_c)
    G = np.abs(A.conj().T @ A)
    np.fill_diagonal(G, 0)
    assert G.max() == pytest.approx(max(dirichlet_half_bin(8), dirichlet_half_bin(4)), abs=1e-12)


def test_angular_unit_norm_all_subcarriers(small_cfg):
    d = build_angular_dictionary(small_cfg)
    for A in d.iter_atoms(small_cfg.freqs):
        np.testing.assert_allclose(np.linalg.norm(A, axis=0), 1.0)


def test_ring_step_validation():
    with pytest.raises(ValueError):
        distance_ring_step(1.0, 0.0, 0.0, SystemConfig())
    with pytest.raises(ValueError):
        distance_ring_step(0.0, 0.0, 0.0, SystemConfig())


def test_ring_step_broadside_frozen_and_brute_force():
    cfg = SystemConfig()
    step = distance_ring_step(0.5, 0.0, 0.0, cfg)
    assert step == pytest.approx(0.11044571505214748, rel=1e-9)
    grid = np.linspace(1e-4, 0.3, 3_000_001)
    vals = ring_coherence(grid, 0.0, 0.0, cfg)
    brute = grid[np.argmax(vals < 0.5)]
    assert step == pytest.approx(brute, rel=1e-4)


@given(st.floats(0.05, 0.95), st.floats(-0.95, 0.95), st.floats(-0.95, 0.95))
def test_ring_step_solves_defining_equation(mu, th, ph):
    cfg = SystemConfig()
    step = distance_ring_step(mu, th, ph, cfg)
    assert ring_coherence(step, th, ph, cfg) == pytest.approx(mu, abs=1e-6)


def test_ring_step_shrinks_as_mu_approaches_one():
    cfg = SystemConfig()
    steps = [distance_ring_step(mu, 0.1, 0.2, cfg) for mu in (0.5, 0.9, 0.99, 0.9999, 1 - 1e-8)]
    assert np.all(np.diff(steps) < 0) and steps[-1] < 1e-3 * steps[0]


def test_degenerate_direction_is_infinite():
    cfg = SystemConfig()
    assert distance_ring_step(0.5, 1.0, 1.0, cfg) == np.inf
    assert np.isfinite(distance_ring_steps(0.5, [0.0, 1.0], [1.0, 0.0], cfg)).all()


def test_spherical_labels_and_unit_norm(small_cfg):
    d = build_spherical_dictionary(small_cfg)
    assert np.all(d.inv_r >= 0)
    assert np.all(np.abs(d.theta_t) <= 1) and np.all(np.abs(d.phi_t) <= 1)
    for B in d.iter_atoms(small_cfg.freqs):
        assert B.shape == (small_cfg.n_r, d.size)
        np.testing.assert_allclose(np.linalg.norm(B, axis=0), 1.0)
    # every direction ends in exactly one far-field atom
    groups = d.direction_groups()
    assert len(groups) == small_cfg.g_r_y * small_cfg.g_r_z
    for idx in groups.values():
        assert d.inv_r[idx[-1]] == 0 and np.sum(d.inv_r[idx] == 0) == 1
        assert d.inv_r[idx[0]] == pytest.approx(1 / small_cfg.r_min) or len(idx) == 1


def test_desk_dictionary_size_frozen(desk_dict):
    assert desk_dict.size == 10911


def test_consecutive_ring_coherence_near_broadside(desk_dict):
    cfg = SystemConfig()
    A = desk_dict.atoms(cfg.f_c)
    for key in [(16, 64), (17, 65), (15, 63), (18, 70)]:
        idx = desk_dict.direction_groups()[key]
        rings = idx[desk_dict.inv_r[idx] > 0]
        for a, b in zip(rings[:-1], rings[1:]):
            assert abs(np.vdot(A[:, a], A[:, b])) == pytest.approx(0.5, abs=0.05)


def test_endfire_has_fewer_rings_than_broadside(desk_dict):
    counts = {k: len(v) for k, v in desk_dict.direction_groups().items()}
    broadside = counts[(16, 64)]
    endfire = counts[(16, 128)]  # phi_t = 1
    assert endfire < broadside


def test_coherence_trend_decreases_along_rings(desk_dict):
    cfg = SystemConfig()
    A = desk_dict.atoms(cfg.f_c)
    for idx in list(desk_dict.direction_groups().values())[::50]:
        rings = idx[desk_dict.inv_r[idx] > 0]
        for i in range(len(rings) - 2):
            c1 = abs(np.vdot(A[:, rings[i]], A[:, rings[i + 1]]))
            c2 = abs(np.vdot(A[:, rings[i]], A[:, rings[i + 2]]))
            assert c2 <= c1 + 0.05


def test_deterministic_and_cache_round_trip(tmp_path, small_cfg, monkeypatch):
    a = build_spherical_dictionary(small_cfg)
    monkeypatch.setenv("XLRIS_CACHE_DIR", str(tmp_path))
    b = build_spherical_dictionary(small_cfg)
    cached = list(tmp_path.glob("spherical_*.npz"))
    assert len(cached) == 1 and spherical_cache_key(small_cfg) in cached[0].name
    c = build_spherical_dictionary(small_cfg)
    for d in (b, c):
        assert np.array_equal(d.inv_r, a.inv_r) and np.array_equal(d.path, a.path)


def test_cache_key_ignores_unrelated_fields(small_cfg):
    assert spherical_cache_key(small_cfg) == spherical_cache_key(small_cfg.replace(Q=99, trials=7))
    assert spherical_cache_key(small_cfg) != spherical_cache_key(small_cfg.replace(mu_m=0.3))


def test_labels_table(small_cfg):
    d = build_spherical_dictionary(small_config(g_r_z=4))
    t = d.labels()
    assert len(t) == d.size and set(t.dtype.names) == {"theta_t", "phi_t", "inv_r", "i_z", "i_y", "i_r"}
