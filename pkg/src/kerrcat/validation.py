"""Invariant suite shared by the ``validate`` command and the test harness."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .linear import variational_solution
from .melnikov import detuning_term, melnikov_M, melnikov_three_term
from .model import Logistic, ModelParams, hamiltonian, pump_value
from .odeint import SolverSettings, integrate
from .reduction import a3_forward, make_branch_config
from .skeleton import HomoclinicOrbit, orbit_grid


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    tolerance: float
    passed: bool

    def to_dict(self) -> dict:
        return asdict(self)


def _check(name, value, tol):
    value = float(value)
    return Check(name, value, tol, bool(value < tol))


def homoclinic_energy(orbit: HomoclinicOrbit, tol: float = 1e-12) -> Check:
    x, y = orbit.xy(orbit_grid())
    return _check("homoclinic_energy", np.max(np.abs(hamiltonian(orbit.params, (x, y)))), tol)


def detuning_cancellation(orbit: HomoclinicOrbit, delta: float = 1.0, tol: float = 1e-8) -> Check:
    return _check("detuning_cancellation", abs(detuning_term(orbit, delta)), tol)


def lobe_area_match(orbit: HomoclinicOrbit, tol: float = 1e-6) -> Check:
    area = abs(orbit.signed_area())
    return _check("lobe_area_quadrature", abs(area - orbit.lobe_area) / orbit.lobe_area, tol)


def three_term_match(orbit: HomoclinicOrbit, kappa: float, A: float = 4.0, sigma: float = 0.3,
                     tol: float = 1e-8) -> Check:
    t0 = np.linspace(-2.0, 2.0, 41)
    full = melnikov_three_term(orbit, kappa, 0.0, A, sigma, t0)["total"]
    simple = melnikov_M(orbit, kappa, A, sigma, t0)
    return _check("melnikov_three_term", np.max(np.abs(full - simple)), tol)


def linear_solution_error(params: ModelParams, t_end: float = 12.0, n: int = 241,
                          settings: SolverSettings | None = None) -> float:
    """Largest relative gap between the closed-form and integrated linearisation.

    The gap at each sample is ``|z_num - z_exact| / |z_exact|`` in the
    Euclidean norm, started from ``(1, 1)`` at ``t = 0``.
    """
    env = params.pump
    half = 0.5 * params.kappa
    t = np.linspace(0.0, t_end, n)

    def rhs(s, z):
        p = pump_value(env, s)
        return ((p - half) * z[0], -(p + half) * z[1])

    sol = integrate(rhs, [1.0, 1.0], 0.0, t_end, settings, t_eval=t)
    xi, eta = variational_solution(env, params.kappa, 1.0, 1.0, 0.0, t)
    exact = np.vstack([xi, eta])
    return float(np.max(np.linalg.norm(sol.y - exact, axis=0) / np.linalg.norm(exact, axis=0)))


def linear_oracle(params: ModelParams, tol: float = 1e-6) -> Check:
    return _check("variational_closed_form", linear_solution_error(params), tol)


def contraction_ratio(params: ModelParams, inits=(0.0, -0.5), n: int = 10,
                      horizon: float = 15.0) -> float:
    """Worst ratio of the observed a3 gap to ``exp(-delta (t - T)) * gap0``.

    Values at or below one mean the contraction bound holds at every sample.
    """
    c1 = make_branch_config(params, a3_init=inits[0])
    c2 = make_branch_config(params, a3_init=inits[1])
    gap0 = abs(inits[0] - inits[1])
    worst = 0.0
    for t in np.linspace(c1.T + horizon / n, c1.T + horizon, n):
        gap = abs(a3_forward(c1, params, t) - a3_forward(c2, params, t))
        worst = max(worst, gap / (math.exp(-c1.delta_margin * (t - c1.T)) * gap0))
    return worst


def contraction(params: ModelParams) -> Check:
    ratio = contraction_ratio(params)
    # the bound is an inequality; allow floating-point slack on the ratio
    return Check("a3_contraction", ratio, 1.0 + 1e-9, bool(ratio <= 1.0 + 1e-9))


def run_suite(ramp: ModelParams, p0: float, K: float, kappa: float) -> list[Check]:
    if not isinstance(ramp.pump, Logistic):
        raise ValueError("the suite needs a logistic ramp")
    orbit = HomoclinicOrbit(p0, K)
    return [
        homoclinic_energy(orbit),
        detuning_cancellation(orbit),
        lobe_area_match(orbit),
        three_term_match(orbit, kappa),
        linear_oracle(ramp),
        contraction(ramp),
    ]
