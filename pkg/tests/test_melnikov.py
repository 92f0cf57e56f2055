import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from kerrcat.melnikov import (critical_amplitude, detuning_term, dissipation_term, g_max,
                              m_argmax, m_max, melnikov_M, melnikov_curve, melnikov_three_term,
                              pulse_kernel_G, pulse_term_direct, sigma_grid, t0_grid,
                              threshold_curve)
from kerrcat.skeleton import HomoclinicOrbit


def _G_oracle(p0, K, sigma, t0):
    """Kernel by adaptive quadrature on the whole line, using sech^2 directly."""
    def f(t):
        u = t + t0
        return -(u / sigma ** 2) * math.exp(-u * u / (2 * sigma * sigma)) \
            * (-(p0 / K) / math.cosh(2 * p0 * t) ** 2)
    # the integrand is below 1e-30 outside |t| < 30
    return quad(f, -30.0, 30.0, points=[-t0, 0.0], epsabs=1e-13, epsrel=1e-13, limit=400)[0]


def test_grids():
    assert t0_grid().size == 801 and t0_grid()[0] == -2.0 and t0_grid()[-1] == 2.0
    s = sigma_grid()
    assert s.size == 181 and s[0] == 0.1 and s[-1] == 1.0


@pytest.mark.parametrize("sigma, t0", [(0.3, 0.4), (0.1, -0.2), (1.0, 1.5), (0.5, 0.0)])
def test_kernel_against_quadrature(orbit, sigma, t0):
    assert pulse_kernel_G(orbit, sigma, t0) == pytest.approx(_G_oracle(1.5, 1.0, sigma, t0),
                                                             abs=1e-10)


def test_kernel_vectorised_matches_scalar(orbit):
    t0 = np.linspace(-2, 2, 600)
    G = pulse_kernel_G(orbit, 0.3, t0)
    for i in (0, 123, 300, 599):
        assert G[i] == pulse_kernel_G(orbit, 0.3, float(t0[i]))


@settings(max_examples=30, deadline=None)
@given(sigma=st.floats(0.1, 1.0), t0=st.floats(-2, 2))
def test_kernel_is_odd(sigma, t0):
    orb = HomoclinicOrbit(1.5)
    assert pulse_kernel_G(orb, sigma, -t0) == pytest.approx(-pulse_kernel_G(orb, sigma, t0),
                                                            abs=1e-14)


def test_linearity_in_amplitude(orbit):
    t0 = t0_grid()
    G = pulse_kernel_G(orbit, 0.3, t0)
    for A in (0.0, 2.0, 7.5):
        assert np.array_equal(melnikov_M(orbit, 1.0, A, 0.3, t0), A * G - 1.0 * 1.5)


def test_three_term_decomposition(orbit):
    t0 = np.linspace(-2, 2, 81)
    parts = melnikov_three_term(orbit, 1.0, 0.0, 4.0, 0.3, t0)
    assert np.max(np.abs(parts["total"] - melnikov_M(orbit, 1.0, 4.0, 0.3, t0))) < 1e-8
    assert parts["dissipation"] == pytest.approx(-1.5, rel=1e-9)


def test_integration_by_parts(orbit):
    t0 = np.linspace(-2, 2, 81)
    direct = pulse_term_direct(orbit, 4.0, 0.3, t0)
    assert np.max(np.abs(direct - 4.0 * pulse_kernel_G(orbit, 0.3, t0))) < 1e-8


def test_detuning_vanishes(orbit):
    assert abs(detuning_term(orbit, 1.0)) < 1e-8
    parts = melnikov_three_term(orbit, 1.0, 1.0, 4.0, 0.3, 0.2)
    assert abs(parts["detuning"]) < 1e-8


def test_dissipation_scales_with_kappa(orbit):
    assert dissipation_term(orbit, 2.0) == pytest.approx(2 * dissipation_term(orbit, 1.0))


def test_zero_amplitude_has_no_zeros(orbit):
    curve = melnikov_curve(orbit, 1.0, 0.0, 0.3)
    assert np.all(curve.M == -1.5) and curve.zeros == []


def test_zeros_are_roots_with_opposite_slopes(orbit):
    curve = melnikov_curve(orbit, 1.0, 7.5, 0.3)
    assert len(curve.zeros) == 2
    assert [z.slope_sign for z in curve.zeros] == [1, -1]
    for z in curve.zeros:
        assert abs(curve.value(z.t0)) < 1e-10 and z.simple
        assert z.bracket[0] <= z.t0 <= z.bracket[1]
    assert curve.zeros[0].t0 == pytest.approx(0.045018, abs=1e-5)
    assert curve.zeros[1].t0 == pytest.approx(1.023574, abs=1e-5)


def test_critical_amplitude_self_consistent(orbit):
    t_star, gm = g_max(orbit, 0.3)
    a_crit = critical_amplitude(1.0, orbit.lobe_area, gm)
    assert a_crit == pytest.approx(1.40273, abs=1e-5)
    assert abs(m_max(orbit, 1.0, a_crit, 0.3)) < 1e-6
    assert m_argmax(orbit, 1.0, a_crit, 0.3)[0] == pytest.approx(t_star, abs=1e-6)


def test_critical_amplitude_absent():
    assert critical_amplitude(1.0, 1.5, 0.0) is None
    assert critical_amplitude(1.0, 1.5, -0.1) is None


def test_zero_existence_tracks_sign_of_max(orbit):
    for sigma in (0.15, 0.5, 0.9):
        for A in (0.5, 1.5, 3.0, 8.0):
            curve = melnikov_curve(orbit, 1.0, A, sigma)
            assert bool(curve.zeros) == (m_max(orbit, 1.0, A, sigma) > 0)


def test_threshold_curve_kappa_scaling(orbit):
    sig = np.linspace(0.1, 1.0, 4)
    one = threshold_curve(orbit, 1.0, sig)
    two = threshold_curve(orbit, 2.0, sig)
    assert np.allclose(two.A_crit, 2 * one.A_crit, rtol=1e-14)
    assert np.all(np.isfinite(one.A_crit)) and np.all(one.A_crit > 0)


def test_threshold_curve_independent_of_worker_count(orbit, monkeypatch):
    sig = np.linspace(0.1, 1.0, 5)
    monkeypatch.setenv("KERRCAT_THREADS", "1")
    serial = threshold_curve(orbit, 1.0, sig)
    monkeypatch.setenv("KERRCAT_THREADS", "4")
    parallel = threshold_curve(orbit, 1.0, sig)
    assert np.array_equal(serial.A_crit, parallel.A_crit)


def test_kernel_rejects_bad_width(orbit):
    with pytest.raises(ValueError):
        pulse_kernel_G(orbit, 0.0, 0.0)


def test_far_field_offset(orbit):
    assert melnikov_M(orbit, 1.0, 6.0, 0.3, 12.0) == pytest.approx(-1.5, abs=1e-12)
    assert melnikov_M(orbit, 1.0, 6.0, 0.3, -12.0) == pytest.approx(-1.5, abs=1e-12)
