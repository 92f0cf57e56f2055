"""Linear stability of the vacuum: eigenvalues, exact ramp exponents, regimes."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .model import Constant, GaussianGate, Logistic, ModelParams, UnsupportedConfigurationError


class Regime(str, Enum):
    UNIFORMLY_STABLE = "UniformlyStable"
    THRESHOLD_CROSSING = "ThresholdCrossing"
    AUTONOMOUS_STABLE = "AutonomousStable"
    AUTONOMOUS_SADDLE = "AutonomousSaddle"
    AUTONOMOUS_CRITICAL = "AutonomousCritical"


@dataclass(frozen=True)
class LinearClassification:
    regime: Regime
    p_c: float
    critical_direction: tuple[float, float] = (1.0, 0.0)
    eigenvalues: tuple[complex, complex] | None = None
    t_cross: float | None = None

    def to_dict(self) -> dict:
        ev = None
        if self.eigenvalues is not None:
            ev = [{"re": z.real, "im": z.imag} for z in self.eigenvalues]
        return {"regime": self.regime.value, "p_c": self.p_c,
                "critical_direction": list(self.critical_direction),
                "eigenvalues": ev, "t_cross": self.t_cross}


def threshold(params: ModelParams) -> float:
    return math.hypot(params.delta, 0.5 * params.kappa)


def autonomous_eigenvalues(params: ModelParams) -> tuple[complex, complex]:
    """Eigenvalues ``-kappa/2 +- sqrt(p0^2 - delta^2)`` of the vacuum Jacobian.

    Returned as Python floats when real, complex otherwise.
    """
    if not isinstance(params.pump, Constant):
        raise UnsupportedConfigurationError("autonomous eigenvalues need a Constant pump")
    disc = params.pump.p0 ** 2 - params.delta ** 2
    root = math.sqrt(disc) if disc >= 0 else cmath.sqrt(disc)
    half = 0.5 * params.kappa
    return -half + root, -half - root


def _softplus(z):
    # log(1 + exp(z)) without overflow
    z = np.asarray(z, dtype=float)
    return np.maximum(z, 0.0) + np.log1p(np.exp(-np.abs(z)))


def logistic_log_ratio(env: Logistic, t0, t):
    """``ln[(1 + e^{-g(t-tc)}) / (1 + e^{-g(t0-tc)})]``, overflow safe."""
    g = env.gamma
    out = _softplus(-g * (np.asarray(t, dtype=float) - env.t_c)) \
        - _softplus(-g * (np.asarray(t0, dtype=float) - env.t_c))
    return out if np.ndim(out) else float(out)


def variational_exponent(env: Logistic, kappa: float, t0, t):
    """Exact value of the integral of ``p(s) - kappa/2`` from ``t0`` to ``t``."""
    if not isinstance(env, Logistic):
        raise UnsupportedConfigurationError("closed-form exponent needs a Logistic envelope")
    t0a = np.asarray(t0, dtype=float)
    ta = np.asarray(t, dtype=float)
    out = (env.p_max - 0.5 * kappa) * (ta - t0a) \
        + env.p_max / env.gamma * np.asarray(logistic_log_ratio(env, t0a, ta))
    return out if np.ndim(out) else float(out)


def variational_solution(env: Logistic, kappa: float, xi0: float, eta0: float, t0, t):
    """Closed-form solution ``(xi, eta)`` of the diagonal linearisation at the vacuum.

    The ``eta`` exponent is ``-(p_max + kappa/2)(t - t0) - (p_max/gamma) * log-ratio``,
    the same integral with the pump contribution sign-flipped.
    """
    if not isinstance(env, Logistic):
        raise UnsupportedConfigurationError("closed-form solution needs a Logistic envelope")
    t0a = np.asarray(t0, dtype=float)
    ta = np.asarray(t, dtype=float)
    lr = np.asarray(logistic_log_ratio(env, t0a, ta))
    half = 0.5 * kappa
    exp_xi = (env.p_max - half) * (ta - t0a) + env.p_max / env.gamma * lr
    exp_eta = -(env.p_max + half) * (ta - t0a) - env.p_max / env.gamma * lr
    xi = xi0 * np.exp(exp_xi)
    eta = eta0 * np.exp(exp_eta)
    if np.ndim(xi) == 0:
        return float(xi), float(eta)
    return xi, eta


def threshold_crossing_time(env: Logistic, kappa: float) -> float:
    """Unique time where the logistic pump equals ``kappa/2`` (needs ``p_max > kappa/2``)."""
    half = 0.5 * kappa
    if not env.p_max > half:
        raise ValueError("the ramp never reaches threshold")
    if half == 0:
        return -math.inf
    return env.t_c - math.log(env.p_max / half - 1.0) / env.gamma


def classify(params: ModelParams) -> LinearClassification:
    """Regime of the vacuum under a preparation-stage pump.

    Constant pumps are classified by the sign of the larger eigenvalue, with
    ``p0 == p_c`` compared exactly. Logistic ramps are uniformly stable when
    ``p_max < kappa/2`` and threshold crossing when ``p_max > kappa/2``; in the
    latter case the crossing time is reported. Resonance (``delta == 0``) is
    assumed for the ramp criteria.
    """
    env = params.pump
    p_c = threshold(params)
    if isinstance(env, Constant):
        ev = autonomous_eigenvalues(params)
        if env.p0 == p_c:
            regime = Regime.AUTONOMOUS_CRITICAL
        elif env.p0 > p_c:
            regime = Regime.AUTONOMOUS_SADDLE
        else:
            regime = Regime.AUTONOMOUS_STABLE
        return LinearClassification(regime, p_c, eigenvalues=ev)
    if isinstance(env, Logistic):
        half = 0.5 * params.kappa
        if env.p_max > half:
            return LinearClassification(Regime.THRESHOLD_CROSSING, p_c,
                                        t_cross=threshold_crossing_time(env, params.kappa))
        if env.p_max < half:
            return LinearClassification(Regime.UNIFORMLY_STABLE, p_c)
        raise UnsupportedConfigurationError(
            "p_max == kappa/2 approaches threshold only asymptotically; no regime assigned")
    if isinstance(env, GaussianGate):
        raise UnsupportedConfigurationError("gate envelopes are not classified")
    raise TypeError(f"unknown envelope {env!r}")
