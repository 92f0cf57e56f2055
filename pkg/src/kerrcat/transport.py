"""Ensemble transport through a gate pulse in the full dissipative system.

A ring of initial conditions around the right logical state is pushed through
``P(t) = p0 + A exp(-t^2 / (2 sigma^2))`` from ``t = 0`` to ``t = 8`` and each
particle is labelled by the side of ``x = 0`` it ends on.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import partial

import numpy as np

from ._parallel import pmap
from .model import GaussianGate, ModelParams, PhaseState, full_rhs
from .odeint import IntegrationError, SolverSettings, integrate
from .skeleton import HomoclinicOrbit, homoclinic_point

AMBIGUOUS_TOL = 1e-9


class Fate(str, Enum):
    SAFE = "safe"
    LEAKED = "leaked"
    AMBIGUOUS = "ambiguous"
    FAILED = "failed"


@dataclass(frozen=True)
class TransportConfig:
    p0: float = 1.5
    A: float = 7.5
    sigma: float = 0.3
    kappa: float = 1.0
    K: float = 1.0
    delta: float = 0.0
    n: int = 150
    radius: float = 0.8
    center: tuple[float, float] | None = None
    t_start: float = 0.0
    t_final: float = 8.0
    settings: SolverSettings = field(default_factory=SolverSettings)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"ensemble size must be >= 1, got {self.n}")
        if not self.radius >= 0:
            raise ValueError(f"radius must be >= 0, got {self.radius}")
        if not self.t_final > self.t_start:
            raise ValueError("t_final must exceed t_start")

    @property
    def ring_center(self) -> tuple[float, float]:
        if self.center is not None:
            return tuple(self.center)
        return (math.sqrt(self.p0 / self.K), 0.0)

    @property
    def params(self) -> ModelParams:
        return ModelParams(self.kappa, self.K, self.delta, GaussianGate(self.p0, self.A, self.sigma))

    def angles(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.n) / self.n

    def ring(self) -> tuple[np.ndarray, np.ndarray]:
        cx, cy = self.ring_center
        th = self.angles()
        return cx + self.radius * np.cos(th), cy + self.radius * np.sin(th)

    def to_dict(self) -> dict:
        return {"p0": self.p0, "A": self.A, "sigma": self.sigma, "kappa": self.kappa,
                "K": self.K, "delta": self.delta, "n": self.n, "radius": self.radius,
                "center": list(self.ring_center), "t_start": self.t_start,
                "t_final": self.t_final, "solver": self.settings.to_dict()}


@dataclass(frozen=True)
class ParticleRecord:
    index: int
    theta: float
    initial: PhaseState
    final: PhaseState | None
    fate: Fate
    error: str | None = None


@dataclass
class TransportResult:
    config: TransportConfig
    particles: list[ParticleRecord]
    projections: list[PhaseState] = field(default_factory=list)
    melnikov_zeros: list[float] = field(default_factory=list)

    def mask(self, fate: Fate) -> np.ndarray:
        return np.array([p.fate is fate for p in self.particles])

    @property
    def leaked_count(self) -> int:
        return int(self.mask(Fate.LEAKED).sum())

    @property
    def ambiguous_count(self) -> int:
        return int(self.mask(Fate.AMBIGUOUS).sum())

    @property
    def failed_count(self) -> int:
        return int(self.mask(Fate.FAILED).sum())

    @property
    def leaked_fraction(self) -> float:
        return self.leaked_count / len(self.particles)

    def classification(self) -> list[str]:
        return [p.fate.value for p in self.particles]

    def summary(self) -> dict:
        return {
            "n": len(self.particles),
            "leaked_count": self.leaked_count,
            "leaked_fraction": self.leaked_fraction,
            "ambiguous_count": self.ambiguous_count,
            "failed_count": self.failed_count,
            "leaked_arcs": len(leaked_arcs(self.mask(Fate.LEAKED))),
            "melnikov_zeros": list(self.melnikov_zeros),
            "projections": [[s.x, s.y] for s in self.projections],
            "failures": {p.index: p.error for p in self.particles if p.fate is Fate.FAILED},
        }


def classify_final(x_final: float) -> Fate:
    if abs(x_final) < AMBIGUOUS_TOL:
        return Fate.AMBIGUOUS
    return Fate.LEAKED if x_final < 0 else Fate.SAFE


def _run_particle(params: ModelParams, t0: float, t1: float, settings: SolverSettings,
                  job) -> tuple:
    idx, x0, y0 = job
    try:
        sol = integrate(lambda t, z: full_rhs(params, t, z), [x0, y0], t0, t1, settings)
    except IntegrationError as exc:
        return idx, None, str(exc)
    return idx, (float(sol.y[0, -1]), float(sol.y[1, -1])), None


def run_transport(config: TransportConfig) -> TransportResult:
    """Integrate the ring and classify each particle by ``sign(x(t_final))``.

    Particles are independent and may be fanned out over worker processes;
    results are ordered by particle index. A failed integration is recorded
    on its particle and does not stop the others.
    """
    params = config.params
    xs, ys = config.ring()
    th = config.angles()
    jobs = [(i, float(xs[i]), float(ys[i])) for i in range(config.n)]
    worker = partial(_run_particle, params, config.t_start, config.t_final, config.settings)
    out = pmap(worker, jobs, processes=True)
    particles = []
    for (idx, final, err), theta in zip(out, th):
        initial = PhaseState(float(xs[idx]), float(ys[idx]))
        if final is None:
            particles.append(ParticleRecord(idx, float(theta), initial, None, Fate.FAILED, err))
        else:
            fs = PhaseState(*final)
            particles.append(ParticleRecord(idx, float(theta), initial, fs, classify_final(fs.x)))
    return TransportResult(config, particles)


def melnikov_zero_projections(orbit: HomoclinicOrbit, zeros) -> list[PhaseState]:
    """Points ``q_h(-t0*)`` on the unperturbed loop for each Melnikov zero.

    ``zeros`` may hold floats or objects with a ``t0`` attribute.
    """
    return [homoclinic_point(orbit, -float(getattr(z, "t0", z))) for z in zeros]


def leaked_arcs(mask) -> list[tuple[int, int]]:
    """Maximal runs of True in a circular boolean sequence as ``(start, length)``."""
    mask = np.asarray(mask, dtype=bool)
    n = mask.size
    if n == 0 or not mask.any():
        return []
    if mask.all():
        return [(0, n)]
    start = int(np.argmin(mask))  # begin scanning at a False so runs do not wrap
    arcs = []
    run_start, run_len = None, 0
    for k in range(1, n + 1):
        i = (start + k) % n
        if mask[i]:
            if run_start is None:
                run_start, run_len = i, 0
            run_len += 1
        elif run_start is not None:
            arcs.append((run_start, run_len))
            run_start = None
    if run_start is not None:
        arcs.append((run_start, run_len))
    return sorted(arcs)


def amplitude_scan(config: TransportConfig, amplitudes) -> dict:
    """Leaked counts on one ring for several pulse amplitudes.

    ``monotone`` reports whether the count is non-decreasing in the
    amplitude; a False value flags a violation rather than raising.
    """
    amps = sorted(float(a) for a in amplitudes)
    counts = [run_transport(replace(config, A=a)).leaked_count for a in amps]
    return {"amplitudes": amps, "leaked": counts,
            "monotone": all(b >= a for a, b in zip(counts, counts[1:]))}
