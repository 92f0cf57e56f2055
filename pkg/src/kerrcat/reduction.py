"""Invariant-graph reduction of the resonant ramp near the vacuum.

On a post-threshold interval ``t >= T`` the slow graph ``y = a3(t) x^3``
obeys ``a3' + (4p - kappa) a3 = -K``. Feeding it back into the ``x`` equation
gives the quintic reduced field ``x' = mu(t) x - b(t) x^5`` with
``mu = p - kappa/2`` and ``b = -K a3``. The substitution ``w = x^-4`` makes
that field linear, and its variation-of-constants solution defines the two
moving branches ``+-rho(t) = +-w(t)^(-1/4)``.

Everything is written for the logistic ramp, whose integrals are available
in closed form.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .linear import logistic_log_ratio, variational_exponent
from .model import (Logistic, ModelParams, Trajectory, UnsupportedConfigurationError,
                    frozen_equilibrium_curve, pump_value)
from .odeint import SolverSettings, integrate

QUAD_EPSABS = 1e-12
QUAD_EPSREL = 1e-12
QUAD_LIMIT = 200


def _logistic(params: ModelParams) -> Logistic:
    if not isinstance(params.pump, Logistic):
        raise UnsupportedConfigurationError("the reduction needs a Logistic pump")
    return params.pump


def q_value(params: ModelParams, t):
    """Graph-equation rate ``4 p(t) - kappa``."""
    return 4.0 * np.asarray(pump_value(params.pump, t)) - params.kappa


def exponent_Q(env: Logistic, kappa: float, s, t):
    """Exact integral of ``4 p(u) - kappa`` from ``s`` to ``t``."""
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    out = (4.0 * env.p_max - kappa) * (t - s) \
        + 4.0 * env.p_max / env.gamma * np.asarray(logistic_log_ratio(env, s, t))
    return out if np.ndim(out) else float(out)


def _scalar_exponents(env: Logistic, kappa: float):
    # math-only closures; quad calls these thousands of times
    g, tc, pm = env.gamma, env.t_c, env.p_max

    def sp(z):
        return (z if z > 0 else 0.0) + math.log1p(math.exp(-abs(z)))

    def lr(s, t):
        return sp(-g * (t - tc)) - sp(-g * (s - tc))

    def Q(s, t):
        return (4.0 * pm - kappa) * (t - s) + 4.0 * pm / g * lr(s, t)

    def M(s, t):
        return (pm - 0.5 * kappa) * (t - s) + pm / g * lr(s, t)

    return Q, M


@dataclass(frozen=True)
class BranchConfig:
    """Post-threshold reference data for the reduction.

    Build it with :func:`make_branch_config`, which checks ``q(T) >= delta_margin``
    against the actual envelope.
    """

    T: float
    a3_init: float
    w_star: float
    delta_margin: float

    def __post_init__(self):
        if not self.w_star > 0:
            raise ValueError(f"w_star must be > 0, got {self.w_star}")
        if not self.delta_margin > 0:
            raise ValueError(f"delta_margin must be > 0, got {self.delta_margin}")

    def to_dict(self) -> dict:
        return {"T": self.T, "a3_init": self.a3_init, "w_star": self.w_star,
                "delta_margin": self.delta_margin}


def asymptotic_coefficients(params: ModelParams) -> dict:
    env = _logistic(params)
    q_inf = 4.0 * env.p_max - params.kappa
    mu_inf = env.p_max - 0.5 * params.kappa
    a3 = -params.K / q_inf
    return {"mu_inf": mu_inf, "a3_asy": a3, "b_inf": -params.K * a3,
            "w_inf": (-params.K * a3) / mu_inf, "rho_inf": (mu_inf / (-params.K * a3)) ** 0.25}


def default_reference_time(params: ModelParams) -> float:
    """First time at which ``q(t)`` reaches half of its saturated value."""
    env = _logistic(params)
    q_inf = 4.0 * env.p_max - params.kappa
    if not q_inf > 0:
        raise ValueError("4 p_max - kappa must be positive for a post-threshold interval")
    p_half = (0.5 * q_inf + params.kappa) / 4.0
    return env.t_c - math.log(env.p_max / p_half - 1.0) / env.gamma


def make_branch_config(params: ModelParams, T: float | None = None, a3_init: float = 0.0,
                       w_star: float | None = None,
                       delta_margin: float | None = None) -> BranchConfig:
    env = _logistic(params)
    if T is None:
        T = default_reference_time(params)
    qT = float(q_value(params, T))
    muT = float(pump_value(env, T)) - 0.5 * params.kappa
    if delta_margin is None:
        delta_margin = qT
    if not qT > 0 or qT < delta_margin:
        raise ValueError(f"q(T) = {qT:.6g} does not reach delta_margin = {delta_margin:.6g} at T = {T}")
    if not muT > 0:
        raise ValueError(f"mu(T) = {muT:.6g} is not positive; choose a later T")
    if w_star is None:
        w_star = asymptotic_coefficients(params)["w_inf"]
    return BranchConfig(float(T), float(a3_init), float(w_star), float(delta_margin))


def _require_after(config: BranchConfig, t: float):
    if t < config.T:
        raise ValueError(f"t = {t} precedes the reference time T = {config.T}")


def a3_forward(config: BranchConfig, params: ModelParams, t: float) -> float:
    """Variation-of-constants value of the graph coefficient at ``t >= T``."""
    env = _logistic(params)
    _require_after(config, t)
    Q, _ = _scalar_exponents(env, params.kappa)
    K = params.K
    head = math.exp(-Q(config.T, t)) * config.a3_init
    if t == config.T or K == 0:
        return head
    integral = quad(lambda tau: math.exp(-Q(tau, t)), config.T, t,
                    epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=QUAD_LIMIT)[0]
    return head - K * integral


def reduced_rhs(mu, b, x):
    return mu * x - b * x ** 5


def branch_w(config: BranchConfig, params: ModelParams, t: float, w_T: float | None = None) -> float:
    """Exact solution of ``w' = -4 mu w + 4 b`` with ``w(T) = w_T`` (default ``w_star``)."""
    env = _logistic(params)
    _require_after(config, t)
    _, M = _scalar_exponents(env, params.kappa)
    w_T = config.w_star if w_T is None else w_T
    head = w_T * math.exp(-4.0 * M(config.T, t))
    if t == config.T:
        return head
    K = params.K

    def integrand(tau):
        return -4.0 * K * a3_forward(config, params, tau) * math.exp(-4.0 * M(tau, t))

    return head + quad(integrand, config.T, t, epsabs=QUAD_EPSABS,
                       epsrel=QUAD_EPSREL, limit=QUAD_LIMIT)[0]


def moving_branch(config: BranchConfig, params: ModelParams, t: float, sign: int = 1,
                  w_T: float | None = None) -> float:
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    return sign * branch_w(config, params, t, w_T) ** -0.25


def frozen_reduced_roots(mu, b):
    """``(+r, -r)`` with ``r = (mu/b)^(1/4)`` when both coefficients are positive, else None."""
    if mu > 0 and b > 0:
        r = (mu / b) ** 0.25
        return r, -r
    return None


@dataclass
class ReducedCoefficients:
    """Reduced coefficients sampled on a grid; entries before ``T`` are NaN for a3 and b."""

    t: np.ndarray
    mu: np.ndarray
    a3: np.ndarray
    b: np.ndarray
    mu_inf: float
    a3_asy: float
    b_inf: float


def _segments_forward(config, params, t_grid):
    """a3 and the forced part of w on an increasing grid, stepped exactly between nodes.

    Uses the semigroup property of both linear equations, so each node costs
    one short quadrature instead of a quadrature from ``T``.
    """
    env = _logistic(params)
    Q, M = _scalar_exponents(env, params.kappa)
    K = params.K
    t_grid = np.asarray(t_grid, dtype=float)
    a3 = np.full(t_grid.shape, np.nan)
    forced = np.full(t_grid.shape, np.nan)
    a3_prev, f_prev, t_prev = config.a3_init, 0.0, config.T
    memo = {}

    def a3_at(tau):
        # exact a3 inside the current segment, anchored at the previous node
        v = memo.get(tau)
        if v is None:
            inner = quad(lambda s: math.exp(-Q(s, tau)), t_prev, tau, epsabs=QUAD_EPSABS,
                         epsrel=QUAD_EPSREL, limit=QUAD_LIMIT)[0] if tau > t_prev else 0.0
            v = math.exp(-Q(t_prev, tau)) * a3_prev - K * inner
            memo[tau] = v
        return v

    for i, t in enumerate(t_grid):
        if t < config.T:
            continue
        if t > t_prev:
            memo.clear()
            a3_t = a3_at(t)
            seg = quad(lambda tau: -4.0 * K * a3_at(tau) * math.exp(-4.0 * M(tau, t)),
                       t_prev, t, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=QUAD_LIMIT)[0]
            f_t = math.exp(-4.0 * M(t_prev, t)) * f_prev + seg
            a3_prev, f_prev, t_prev = a3_t, f_t, t
        a3[i] = a3_prev
        forced[i] = f_prev
    return a3, forced


def reduced_coefficients(config: BranchConfig, params: ModelParams, t_grid) -> ReducedCoefficients:
    t_grid = np.asarray(t_grid, dtype=float)
    a3, _ = _segments_forward(config, params, t_grid)
    asy = asymptotic_coefficients(params)
    mu = np.asarray(pump_value(params.pump, t_grid)) - 0.5 * params.kappa
    return ReducedCoefficients(t_grid, mu, a3, -params.K * a3, asy["mu_inf"], asy["a3_asy"],
                               asy["b_inf"])


def branch_grid(config: BranchConfig, params: ModelParams, t_grid, w_stars=None):
    """``rho(t)`` on a grid for one or several initial values ``w(T)``.

    Returns an array of shape ``(len(w_stars), len(t_grid))`` (or ``(len(t_grid),)``
    when ``w_stars`` is None); samples before ``T`` are NaN.
    """
    env = _logistic(params)
    t_grid = np.asarray(t_grid, dtype=float)
    _, forced = _segments_forward(config, params, t_grid)
    single = w_stars is None
    ws = np.atleast_1d(config.w_star if single else np.asarray(w_stars, dtype=float))
    decay = np.exp(-4.0 * np.asarray(variational_exponent(env, params.kappa, config.T,
                                                          np.maximum(t_grid, config.T))))
    w = ws[:, None] * decay[None, :] + forced[None, :]
    rho = w ** -0.25
    return rho[0] if single else rho


def reduced_trajectory(config: BranchConfig, params: ModelParams, x0: float, t1: float,
                       t_eval=None, settings: SolverSettings | None = None):
    """Integrate the quintic reduced equation from ``x(T) = x0``.

    The coefficient ``a3`` is carried along as a second state component so
    that ``b(t)`` is available at every stage without extra quadratures.
    """
    env = _logistic(params)
    half = 0.5 * params.kappa
    K = params.K

    def rhs(t, z):
        a3, x = z
        p = pump_value(env, t)
        return (-K - (4.0 * p - params.kappa) * a3, reduced_rhs(p - half, -K * a3, x))

    sol = integrate(rhs, [config.a3_init, x0], config.T, t1, settings, t_eval=t_eval)
    return sol.t, sol.y[1]


def lag_metric(traj: Trajectory, params: ModelParams) -> np.ndarray:
    """``|x(t) - x_eq(t)|`` against the positive frozen full-system equilibrium.

    The frozen reference is zero below threshold. Trajectories on the negative
    branch are compared with ``-x_eq``.
    """
    x_eq, _ = frozen_equilibrium_curve(params, traj.t)
    sign = 1.0 if traj.x[-1] >= 0 else -1.0
    return np.abs(traj.x - sign * x_eq)


def negativity_onset(t, a3):
    """Earliest sample time after which ``a3`` stays strictly negative, or None.

    NaN samples (before ``T``) are skipped.
    """
    t = np.asarray(t, dtype=float)
    a3 = np.asarray(a3, dtype=float)
    valid = ~np.isnan(a3)
    if not valid.any() or not a3[valid][-1] < 0:
        return None
    tv, av = t[valid], a3[valid]
    nonneg = np.flatnonzero(av >= 0)
    return float(tv[0] if nonneg.size == 0 else tv[nonneg[-1] + 1])
