import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from kerrcat.model import Constant, ModelParams, Trajectory, pump_value, table_params
from kerrcat.reduction import (a3_forward, asymptotic_coefficients, branch_grid, branch_w,
                               default_reference_time, frozen_reduced_roots, lag_metric,
                               make_branch_config, moving_branch, q_value,
                               reduced_coefficients, reduced_trajectory)
from kerrcat.validation import contraction_ratio

from conftest import ramp_with


def _ref_system(params, bc, t_end):
    """a3 and w integrated together by an external high-order solver."""
    env, kap, K = params.pump, params.kappa, params.K

    def rhs(t, z):
        p = pump_value(env, t)
        a3, w = z
        return [-K - (4 * p - kap) * a3, -4 * (p - 0.5 * kap) * w + 4 * (-K * a3)]

    return solve_ivp(rhs, (bc.T, t_end), [bc.a3_init, bc.w_star], method="DOP853",
                     rtol=1e-12, atol=1e-14, dense_output=True)


def test_asymptotes_hand_values(ramp):
    a = asymptotic_coefficients(ramp)
    assert a["a3_asy"] == pytest.approx(-1 / 9)
    assert a["mu_inf"] == 2.0
    assert a["w_inf"] == pytest.approx(1 / 18)
    assert a["rho_inf"] == pytest.approx(18 ** 0.25)


def test_default_reference_time(ramp):
    T = default_reference_time(ramp)
    assert q_value(ramp, T) == pytest.approx(4.5, abs=1e-12)
    bc = make_branch_config(ramp)
    assert bc.T == T and bc.delta_margin == pytest.approx(4.5)
    assert bc.w_star == pytest.approx(1 / 18)


def test_config_before_threshold_rejected(ramp):
    with pytest.raises(ValueError):
        make_branch_config(ramp, T=2.0)


def test_config_margin_too_large(ramp):
    with pytest.raises(ValueError):
        make_branch_config(ramp, delta_margin=9.5)


def test_requires_logistic():
    with pytest.raises(Exception):
        make_branch_config(ModelParams(1.0, 1.0, 0.0, Constant(1.5)))


@pytest.mark.parametrize("a3_init", [0.0, -0.4, 0.3])
def test_a3_and_w_match_reference(ramp, a3_init):
    bc = make_branch_config(ramp, a3_init=a3_init, w_star=0.2)
    ref = _ref_system(ramp, bc, bc.T + 12)
    for t in (bc.T, bc.T + 0.7, bc.T + 3.0, bc.T + 12):
        a3_ref, w_ref = ref.sol(t)
        assert a3_forward(bc, ramp, t) == pytest.approx(a3_ref, abs=1e-10)
        assert branch_w(bc, ramp, t) == pytest.approx(w_ref, abs=1e-10)


def test_a3_asymptote(ramp):
    bc = make_branch_config(ramp)
    assert abs(a3_forward(bc, ramp, bc.T + 15) + 1 / 9) < 1e-6


def test_before_T_rejected(ramp):
    bc = make_branch_config(ramp)
    with pytest.raises(ValueError):
        a3_forward(bc, ramp, bc.T - 1)


def test_contraction_bound(ramp):
    assert contraction_ratio(ramp) <= 1.0


def test_grid_route_matches_scalar_route(ramp):
    bc = make_branch_config(ramp, a3_init=-0.2)
    t = np.linspace(0, 20, 64)
    coeffs = reduced_coefficients(bc, ramp, t)
    rho = branch_grid(bc, ramp, t)
    before = t < bc.T
    assert np.all(np.isnan(coeffs.a3[before])) and np.all(np.isnan(rho[before]))
    for i in np.flatnonzero(~before)[::7]:
        assert coeffs.a3[i] == pytest.approx(a3_forward(bc, ramp, t[i]), abs=1e-12)
        assert rho[i] == pytest.approx(moving_branch(bc, ramp, t[i]), abs=1e-12)
    assert np.allclose(coeffs.b[~before], -coeffs.a3[~before])


def test_branch_limit(ramp):
    bc = make_branch_config(ramp)
    assert abs(moving_branch(bc, ramp, bc.T + 15) - 18 ** 0.25) < 1e-3
    assert moving_branch(bc, ramp, bc.T + 15, sign=-1) == -moving_branch(bc, ramp, bc.T + 15)


def test_branch_sweep_collapses(ramp):
    bc = make_branch_config(ramp)
    t = np.linspace(bc.T, bc.T + 5, 11)
    rhos = branch_grid(bc, ramp, t, [0.01, 1 / 18, 1.0])
    spread = rhos.max(axis=0) - rhos.min(axis=0)
    assert spread[0] > 0.5
    assert spread[-1] < 1e-6


@pytest.mark.parametrize("sign", [1, -1])
def test_reduced_trajectory_tracks_branch(ramp, sign):
    bc = make_branch_config(ramp)
    t_end = bc.T + 10
    t, x = reduced_trajectory(bc, ramp, sign * 0.1, t_end, [t_end])
    assert abs(x[-1] - sign * moving_branch(bc, ramp, t_end)) < 1e-4


def test_frozen_reduced_roots():
    assert frozen_reduced_roots(2.0, 1 / 9) == pytest.approx((18 ** 0.25, -(18 ** 0.25)))
    assert frozen_reduced_roots(-1.0, 0.1) is None
    assert frozen_reduced_roots(1.0, 0.0) is None


def test_lag_metric_sign_handling(ramp):
    t = np.linspace(0, 20, 5)
    traj = Trajectory(t, -np.ones(5), np.zeros(5))
    lag = lag_metric(traj, ramp)
    assert lag[0] == pytest.approx(1.0)
    assert np.all(lag >= 0)


def test_slower_ramp_other_gamma():
    p = ramp_with(gamma=0.5)
    bc = make_branch_config(p)
    assert q_value(p, bc.T) == pytest.approx(4.5, abs=1e-12)
    assert math.isfinite(moving_branch(bc, p, bc.T + 5))


def test_negativity_onset(ramp):
    from kerrcat.reduction import negativity_onset
    bc = make_branch_config(ramp, a3_init=0.3)
    t = np.linspace(0, 20, 200)
    coeffs = reduced_coefficients(bc, ramp, t)
    t1 = negativity_onset(t, coeffs.a3)
    assert t1 is not None and t1 > bc.T
    assert np.all(coeffs.a3[t >= t1] < 0)
    assert negativity_onset([0, 1, 2], [-1.0, 0.5, -0.2]) == 2.0
    assert negativity_onset([0, 1], [-1.0, 0.1]) is None


def test_lag_at_vacuum_equals_frozen_root(ramp):
    t = np.linspace(0, 20, 41)
    traj = Trajectory(t, np.zeros_like(t), np.zeros_like(t))
    from kerrcat.model import frozen_equilibrium_curve
    assert np.array_equal(lag_metric(traj, ramp), frozen_equilibrium_curve(ramp, t)[0])
