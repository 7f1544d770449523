import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from xlris.geometry import (SPEED_OF_LIGHT, CarrierGrid, SphericalPoint, UpaShape, exact_spherical_response,
                            fresnel_spherical_response, half_wavelength, iter_wideband_responses,
                            planar_response, planar_responses, response_from_path,
                            fresnel_path_difference)

FC = 28e9
D = half_wavelength(FC)

shapes = st.builds(UpaShape, st.integers(1, 24), st.integers(1, 6), st.just(D))
angles = st.floats(0.05, np.pi - 0.05)
azimuths = st.floats(-np.pi / 2, np.pi / 2)
ranges = st.floats(0.5, 1e4)


def test_shape_validation():
    with pytest.raises(ValueError):
        UpaShape(0, 4, D)
    with pytest.raises(ValueError):
        UpaShape(4, 4, -1.0)


def test_element_indices_symmetric_half_integer():
    s = UpaShape(4, 3, D)
    np.testing.assert_allclose(s.m_y, [-1.5, -0.5, 0.5, 1.5])
    np.testing.assert_allclose(s.m_z, [-1, 0, 1])
    my, mz = s.element_indices()
    # m_y outer, m_z inner
    np.testing.assert_allclose(my[:3], -1.5)
    np.testing.assert_allclose(mz[:3], [-1, 0, 1])


def test_spherical_point_validation_and_virtual_angles():
    with pytest.raises(ValueError):
        SphericalPoint(0.3, 0.2, 0.0)
    with pytest.raises(ValueError):
        SphericalPoint(np.nan, 0.2, 1.0)
    p = SphericalPoint(np.radians(45), np.radians(45), 20.0)
    assert p.theta_t == pytest.approx(np.sqrt(0.5))
    assert p.phi_t == pytest.approx(0.5)
    q = SphericalPoint.from_virtual(p.theta_t, p.phi_t, p.r)
    assert q.theta == pytest.approx(p.theta) and q.phi == pytest.approx(p.phi)


def test_carrier_grid_odd_centre_and_spacing():
    g = CarrierGrid(FC, 2e9, 5)
    assert g[2] == FC
    np.testing.assert_allclose(np.diff(g.frequencies), 2e9 / 5)
    assert CarrierGrid(FC, 2e9, 32).frequencies.mean() == pytest.approx(FC)
    with pytest.raises(ValueError):
        CarrierGrid(1e9, 4e9, 8)


def test_single_element_is_one():
    s = UpaShape(1, 1, D)
    p = SphericalPoint(1.0, 0.3, 7.0)
    np.testing.assert_allclose(exact_spherical_response(s, FC, p), [1.0])
    np.testing.assert_allclose(fresnel_spherical_response(s, FC, p), [1.0])


@given(shapes, angles, azimuths, ranges, st.floats(20e9, 40e9))
def test_all_responses_unit_norm(shape, th, ph, r, f):
    p = SphericalPoint(th, ph, r)
    for v in (exact_spherical_response(shape, f, p), fresnel_spherical_response(shape, f, p),
              planar_response(shape, f, p.theta_t, p.phi_t)):
        assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-12)


def test_exact_far_field_matches_conjugate_planar():
    # the spherical forms carry the opposite linear-phase sign to the planar form
    s = UpaShape(8, 1, D)
    p = SphericalPoint(np.radians(60), np.radians(20), 1e6)
    a = exact_spherical_response(s, FC, p)
    b = planar_response(s, FC, p.theta_t, p.phi_t).conj()
    assert np.max(np.abs(np.angle(a / b))) < 1e-6


def test_fresnel_close_to_exact_in_fresnel_regime():
    s = UpaShape(128, 4, D)
    p = SphericalPoint(np.radians(45), np.radians(45), 20.0)
    c = abs(np.vdot(exact_spherical_response(s, FC, p), fresnel_spherical_response(s, FC, p)))
    assert c >= 0.99


def test_fresnel_far_limit_equals_planar():
    s = UpaShape(128, 4, D)
    p = SphericalPoint(np.radians(70), np.radians(-30), 1e9)
    a = fresnel_spherical_response(s, FC, p)
    b = planar_response(s, FC, p.theta_t, p.phi_t).conj()
    assert np.max(np.abs(np.angle(a / b))) < 1e-6
    # the residual is the O(1/r) quadratic term: ten times farther, ten times smaller
    errs = []
    for r in (1e6 * s.aperture, 1e7 * s.aperture):
        a = fresnel_spherical_response(s, FC, SphericalPoint(p.theta, p.phi, r))
        errs.append(np.max(np.abs(np.angle(a / b))))
    assert errs[0] / errs[1] == pytest.approx(10.0, rel=1e-3)


def test_exact_vs_fresnel_beyond_tenth_rayleigh():
    s = UpaShape(128, 4, D)
    R = s.rayleigh_distance(FC)
    worst = 1.0
    for r in np.linspace(0.1 * R, R, 4):
        for th in np.radians([20, 60, 90, 130]):
            for ph in np.radians([-70, -20, 0, 45, 80]):
                p = SphericalPoint(th, ph, r)
                c = abs(np.vdot(exact_spherical_response(s, FC, p), fresnel_spherical_response(s, FC, p)))
                worst = min(worst, c)
    assert worst >= 0.95


def test_planar_broadside_and_validation():
    s = UpaShape(8, 4, D)
    np.testing.assert_allclose(planar_response(s, FC, 0.0, 0.0), np.full(32, 1 / np.sqrt(32)))
    with pytest.raises(ValueError):
        planar_response(s, FC, 1.5, 0.0)


def test_planar_dft_orthogonality():
    n = 16
    s = UpaShape(n, 1, half_wavelength(FC))
    for i in range(1, n):
        a = planar_response(s, FC, 0.0, -1.0)
        b = planar_response(s, FC, 0.0, -1.0 + 2.0 * i / n)
        assert abs(np.vdot(a, b)) < 1e-10


def test_wideband_recurrence_matches_direct_exp():
    s = UpaShape(32, 4, D)
    P = fresnel_path_difference(s, [0.3, -0.8], [0.1, 0.5], [0.1, 0.0])
    freqs = CarrierGrid(FC, 4e9, 64).frequencies
    for f, v in zip(freqs, iter_wideband_responses(P, freqs)):
        np.testing.assert_allclose(v, response_from_path(P, f), atol=1e-12)


def test_planar_responses_stack_columns():
    s = UpaShape(4, 2, D)
    M = planar_responses(s, FC, [0.1, 0.2], [0.3, -0.4])
    np.testing.assert_allclose(M[:, 1], planar_response(s, FC, 0.2, -0.4))
    assert SPEED_OF_LIGHT == 299_792_458.0
