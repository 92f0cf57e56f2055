"""Physical parameters, pump envelopes and the planar Kerr-cat vector fields.

All amplitudes and times are dimensionless. The complex cavity amplitude is
written ``alpha = x + i y`` and every routine here works with the real pair.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np


class UnsupportedConfigurationError(ValueError):
    """Raised when an operation is asked for a parameter regime it does not cover."""


@dataclass(frozen=True)
class Constant:
    p0: float

    def __post_init__(self):
        if not self.p0 >= 0:
            raise ValueError(f"p0 must be >= 0, got {self.p0}")


@dataclass(frozen=True)
class Logistic:
    """Monotone turn-on ``p_max / (1 + exp(-gamma (t - t_c)))``."""

    p_max: float
    gamma: float
    t_c: float = 0.0

    def __post_init__(self):
        if not self.p_max >= 0:
            raise ValueError(f"p_max must be >= 0, got {self.p_max}")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")


@dataclass(frozen=True)
class GaussianGate:
    """Operating pump plus a Gaussian gate pulse centred at t = 0."""

    p0: float
    A: float
    sigma: float

    def __post_init__(self):
        if not self.p0 >= 0:
            raise ValueError(f"p0 must be >= 0, got {self.p0}")
        if not self.A >= 0:
            raise ValueError(f"A must be >= 0, got {self.A}")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")


PumpEnvelope = Union[Constant, Logistic, GaussianGate]


@dataclass(frozen=True)
class ModelParams:
    """Dissipation ``kappa``, Kerr coefficient ``K``, detuning ``delta`` and a pump."""

    kappa: float = 1.0
    K: float = 1.0
    delta: float = 0.0
    pump: PumpEnvelope = field(default_factory=lambda: Logistic(2.5, 1.5, 5.0))

    def __post_init__(self):
        if not self.K > 0:
            raise ValueError(f"K must be > 0, got {self.K}")
        if not self.kappa >= 0:
            raise ValueError(f"kappa must be >= 0, got {self.kappa}")
        if not math.isfinite(self.delta):
            raise ValueError(f"delta must be finite, got {self.delta}")

    def with_pump(self, pump: PumpEnvelope) -> "ModelParams":
        return ModelParams(self.kappa, self.K, self.delta, pump)

    def to_dict(self) -> dict:
        return {"kappa": self.kappa, "K": self.K, "delta": self.delta,
                "pump": envelope_to_dict(self.pump)}

    @classmethod
    def from_dict(cls, data: dict) -> "ModelParams":
        pump = data.get("pump")
        return cls(kappa=float(data.get("kappa", 1.0)),
                   K=float(data.get("K", 1.0)),
                   delta=float(data.get("delta", 0.0)),
                   pump=envelope_from_dict(pump) if pump is not None
                   else Logistic(2.5, 1.5, 5.0))


# Reference operating point used by every default.
TABLE_KAPPA = 1.0
TABLE_K = 1.0
TABLE_P0 = 1.5
TABLE_PMAX = 2.5
TABLE_GAMMA = 1.5
TABLE_TC = 5.0


def table_params(pump: PumpEnvelope | None = None) -> ModelParams:
    """Default resonant parameters, with the logistic ramp unless ``pump`` is given."""
    if pump is None:
        pump = Logistic(TABLE_PMAX, TABLE_GAMMA, TABLE_TC)
    return ModelParams(TABLE_KAPPA, TABLE_K, 0.0, pump)


def envelope_to_dict(env: PumpEnvelope) -> dict:
    if isinstance(env, Constant):
        return {"type": "constant", "p0": env.p0}
    if isinstance(env, Logistic):
        return {"type": "logistic", "p_max": env.p_max, "gamma": env.gamma, "t_c": env.t_c}
    if isinstance(env, GaussianGate):
        return {"type": "gaussian_gate", "p0": env.p0, "A": env.A, "sigma": env.sigma}
    raise TypeError(f"unknown envelope {env!r}")


def envelope_from_dict(data: dict) -> PumpEnvelope:
    kind = str(data.get("type", "")).lower()
    if kind == "constant":
        return Constant(float(data["p0"]))
    if kind == "logistic":
        return Logistic(float(data["p_max"]), float(data["gamma"]), float(data.get("t_c", 0.0)))
    if kind in ("gaussian_gate", "gaussiangate", "gaussian"):
        return GaussianGate(float(data["p0"]), float(data["A"]), float(data["sigma"]))
    raise ValueError(f"unknown pump type {data.get('type')!r}")


def _logistic(env: Logistic, t):
    # p_max * sigmoid(gamma (t - t_c)), written to avoid overflow in exp
    z = env.gamma * (np.asarray(t, dtype=float) - env.t_c)
    out = env.p_max * np.where(z >= 0, 1.0 / (1.0 + np.exp(-np.abs(z))),
                               np.exp(-np.abs(z)) / (1.0 + np.exp(-np.abs(z))))
    return out if out.ndim else float(out)


def pump_value(env: PumpEnvelope, t):
    """Pump amplitude ``p(t)`` for any envelope; accepts scalars or arrays."""
    if isinstance(env, Constant):
        return np.full(np.shape(t), float(env.p0)) if np.ndim(t) else float(env.p0)
    if isinstance(env, Logistic):
        if np.ndim(t) == 0:
            z = env.gamma * (float(t) - env.t_c)
            if z >= 0:
                return env.p_max / (1.0 + math.exp(-z))
            e = math.exp(z)
            return env.p_max * e / (1.0 + e)
        return _logistic(env, t)
    if isinstance(env, GaussianGate):
        if np.ndim(t) == 0:
            return env.p0 + env.A * math.exp(-float(t) ** 2 / (2.0 * env.sigma ** 2))
        t = np.asarray(t, dtype=float)
        return env.p0 + env.A * np.exp(-t ** 2 / (2.0 * env.sigma ** 2))
    raise TypeError(f"unknown envelope {env!r}")


def pump_derivative(env: PumpEnvelope, t):
    """Time derivative of the pump envelope."""
    t = np.asarray(t, dtype=float)
    if isinstance(env, Constant):
        out = np.zeros_like(t)
    elif isinstance(env, Logistic):
        s = _logistic(env, t) / env.p_max if env.p_max > 0 else np.zeros_like(t)
        out = env.p_max * env.gamma * s * (1.0 - s)
    elif isinstance(env, GaussianGate):
        out = -env.A * t / env.sigma ** 2 * np.exp(-t ** 2 / (2.0 * env.sigma ** 2))
    else:
        raise TypeError(f"unknown envelope {env!r}")
    out = np.asarray(out, dtype=float)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class PhaseState:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite phase state ({self.x}, {self.y})")

    def __iter__(self):
        yield self.x
        yield self.y

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y])


@dataclass
class Trajectory:
    """Time-stamped samples of one solution of the planar system."""

    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    params: ModelParams | None = None
    initial: PhaseState | None = None
    settings: object = None

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.x = np.asarray(self.x, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        if not (self.t.shape == self.x.shape == self.y.shape):
            raise ValueError("t, x and y must have the same shape")
        if self.t.size > 1 and np.any(np.diff(self.t) <= 0):
            raise ValueError("trajectory time stamps must be strictly increasing")

    def __len__(self):
        return self.t.size

    def state(self, i: int) -> PhaseState:
        return PhaseState(float(self.x[i]), float(self.y[i]))


def full_rhs(params: ModelParams, t, s):
    """Planar nonautonomous Kerr-cat field ``(dx/dt, dy/dt)`` at time ``t``.

    ``s`` may be a :class:`PhaseState` or any length-2 sequence; the second
    axis of an array argument is also accepted, so ``s`` of shape ``(2, n)``
    evaluates ``n`` states at once.
    """
    x, y = s
    p = pump_value(params.pump, t)
    r2 = x * x + y * y
    half = 0.5 * params.kappa
    dx = (p - half) * x + params.delta * y + params.K * y * r2
    dy = -(p + half) * y - params.delta * x - params.K * x * r2
    return dx, dy


def _constant_p0(params: ModelParams) -> float:
    if isinstance(params.pump, Constant):
        return params.pump.p0
    raise UnsupportedConfigurationError("the conservative field needs a Constant pump")


def hamiltonian(params: ModelParams, s):
    """Effective conservative energy; ``kappa`` is ignored."""
    p0 = _constant_p0(params)
    x, y = s
    r2 = x * x + y * y
    return 0.5 * params.delta * r2 + 0.25 * params.K * r2 * r2 + p0 * x * y


def hamiltonian_rhs(params: ModelParams, s):
    """``(dH/dy, -dH/dx)`` for :func:`hamiltonian`."""
    p0 = _constant_p0(params)
    x, y = s
    r2 = x * x + y * y
    dHdx = params.delta * x + params.K * x * r2 + p0 * y
    dHdy = params.delta * y + params.K * y * r2 + p0 * x
    return dHdy, -dHdx


def frozen_full_equilibria(params: ModelParams, t) -> list[PhaseState]:
    """Zeros of the resonant field with the pump frozen at ``p(t)``.

    Returns ``[origin]`` below threshold and ``[origin, +branch, -branch]``
    above it, the branches being ordered by the sign of ``x``.
    """
    if params.delta != 0:
        raise UnsupportedConfigurationError("frozen equilibria are only available for delta = 0")
    p = pump_value(params.pump, t)
    half = 0.5 * params.kappa
    out = [PhaseState(0.0, 0.0)]
    if p <= half:
        return out
    r2 = math.sqrt(p * p - half * half) / params.K
    c = (p - half) / (params.K * r2)
    x = math.sqrt(r2 / (1.0 + c * c))
    out.append(PhaseState(x, -c * x))
    out.append(PhaseState(-x, c * x))
    return out


def frozen_equilibrium_curve(params: ModelParams, t) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised positive frozen branch; zero wherever ``p(t) <= kappa/2``."""
    if params.delta != 0:
        raise UnsupportedConfigurationError("frozen equilibria are only available for delta = 0")
    t = np.asarray(t, dtype=float)
    p = np.asarray(pump_value(params.pump, t), dtype=float)
    half = 0.5 * params.kappa
    above = p > half
    r2 = np.where(above, np.sqrt(np.where(above, p * p - half * half, 1.0)) / params.K, 1.0)
    c = np.where(above, (p - half) / (params.K * r2), 0.0)
    x = np.where(above, np.sqrt(r2 / (1.0 + c * c)), 0.0)
    return x, -c * x
