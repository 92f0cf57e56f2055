"""Conservative resonant skeleton: figure-eight separatrix and its homoclinic loop."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import Constant, ModelParams, PhaseState, hamiltonian

SQRT2 = math.sqrt(2.0)

# 4001-point uniform grid on [-20, 20] for homoclinic quadratures
ORBIT_T_MIN = -20.0
ORBIT_T_MAX = 20.0
ORBIT_POINTS = 4001


def orbit_grid(n: int = ORBIT_POINTS, t_min: float = ORBIT_T_MIN, t_max: float = ORBIT_T_MAX):
    return np.linspace(t_min, t_max, n)


def _sech_pieces(p0, t):
    # e^{-|u|} / (1 + e^{-2|u|}) = sech(u) / 2, with u = 2 p0 t
    t = np.asarray(t, dtype=float)
    a = np.abs(2.0 * p0 * t)
    return t, np.exp(-2.0 * a), a


@dataclass(frozen=True)
class HomoclinicOrbit:
    """Right lobe of the resonant ``H = 0`` separatrix, run forward in time.

    ``x(t) = s e^{-p0 t} sech(2 p0 t)``, ``y(t) = -s e^{p0 t} sech(2 p0 t)``
    with ``s = sqrt(p0/K)``. The loop leaves the saddle along ``+x``, passes
    ``(s, -s)`` at ``t = 0`` and returns along ``-y``. It is a true solution of
    the Hamiltonian field, is clockwise (negative signed area) and satisfies
    the reversibility ``x(-t) = -y(t)``. The left lobe is its image under
    ``(x, y) -> (-x, -y)``.
    """

    p0: float
    K: float = 1.0

    def __post_init__(self):
        if not self.p0 > 0:
            raise ValueError(f"p0 must be > 0, got {self.p0}")
        if not self.K > 0:
            raise ValueError(f"K must be > 0, got {self.K}")

    @property
    def scale(self) -> float:
        return math.sqrt(self.p0 / self.K)

    @property
    def params(self) -> ModelParams:
        return ModelParams(kappa=0.0, K=self.K, delta=0.0, pump=Constant(self.p0))

    @property
    def orientation(self) -> int:
        return -1

    @property
    def lobe_area(self) -> float:
        return lobe_area(self)

    @property
    def r_max(self) -> float:
        return math.sqrt(2.0 * self.p0 / self.K)

    def xy(self, t):
        """Coordinates ``(x_h, y_h)`` at scalar or array ``t``; overflow safe."""
        t, e2, a = _sech_pieces(self.p0, t)
        pt = self.p0 * t
        two_s = 2.0 * self.scale
        x = two_s * np.exp(-pt - a) / (1.0 + e2)
        y = -two_s * np.exp(pt - a) / (1.0 + e2)
        if np.ndim(x) == 0:
            return float(x), float(y)
        return x, y

    def velocity(self, t):
        """Closed-form time derivative of :meth:`xy`."""
        x, y = self.xy(t)
        th = np.tanh(2.0 * self.p0 * np.asarray(t, dtype=float))
        dx = -self.p0 * x * (1.0 + 2.0 * th)
        dy = self.p0 * y * (1.0 - 2.0 * th)
        if np.ndim(dx) == 0:
            return float(dx), float(dy)
        return dx, dy

    def product(self, t):
        """``x_h y_h = -(p0/K) sech^2(2 p0 t)``."""
        c = np.cosh(np.minimum(np.abs(2.0 * self.p0 * np.asarray(t, dtype=float)), 350.0))
        return -(self.p0 / self.K) / (c * c)

    def signed_area(self, n: int = ORBIT_POINTS, t_min: float = ORBIT_T_MIN,
                    t_max: float = ORBIT_T_MAX) -> float:
        """Half the loop integral of ``x dy - y dx`` by trapezoidal quadrature."""
        t = np.linspace(t_min, t_max, n)
        x, y = self.xy(t)
        dx, dy = self.velocity(t)
        return 0.5 * float(np.trapezoid(x * dy - y * dx, t))


def homoclinic_point(orbit: HomoclinicOrbit, t: float) -> PhaseState:
    return PhaseState(*orbit.xy(float(t)))


def rotated_frame(s):
    """``(X, Y) = ((x + y)/sqrt2, (-x + y)/sqrt2)``; accepts arrays."""
    x, y = s
    return (x + y) / SQRT2, (-x + y) / SQRT2


def inverse_rotated_frame(S):
    X, Y = S
    return (X - Y) / SQRT2, (X + Y) / SQRT2


def lemniscate_radius(p0: float, K: float, theta: float):
    """Radius of the ``H = 0`` contour at rotated-frame angle ``theta``, or None outside its sectors."""
    if not (p0 > 0 and K > 0):
        raise ValueError("p0 and K must be positive")
    c = math.cos(2.0 * theta)
    if c > 1e-14:
        return None
    return math.sqrt(max(-(2.0 * p0 / K) * c, 0.0))


def lobe_area(orbit: HomoclinicOrbit) -> float:
    """Geometric area ``p0/K`` enclosed by one lobe of the figure eight.

    Half of the lemniscate area ``2 p0 / K``; equal to minus :meth:`HomoclinicOrbit.signed_area`.
    """
    return orbit.p0 / orbit.K


@dataclass(frozen=True)
class SaddleCenters:
    saddle: PhaseState
    centers_rotated: tuple[PhaseState, PhaseState]
    centers: tuple[PhaseState, PhaseState]


def saddle_centers(p0: float, K: float = 1.0) -> SaddleCenters:
    if not p0 > 0:
        raise ValueError(f"p0 must be > 0, got {p0}")
    c = math.sqrt(p0 / K)
    rot = (PhaseState(0.0, c), PhaseState(0.0, -c))
    orig = tuple(PhaseState(*inverse_rotated_frame((s.x, s.y))) for s in rot)
    return SaddleCenters(PhaseState(0.0, 0.0), rot, orig)


def separatrix_contour(orbit: HomoclinicOrbit, n: int = ORBIT_POINTS):
    """Both lobes sampled along the analytic orbit.

    Returns a dict of arrays ``lobe`` (+1 right, -1 left), ``t``, ``x``, ``y``,
    ``X``, ``Y``, ``R`` and ``H``.
    """
    t = orbit_grid(n)
    x, y = orbit.xy(t)
    t2 = np.concatenate([t, t])
    x2 = np.concatenate([x, -x])
    y2 = np.concatenate([y, -y])
    X, Y = rotated_frame((x2, y2))
    return {
        "lobe": np.concatenate([np.ones(n), -np.ones(n)]),
        "t": t2, "x": x2, "y": y2, "X": X, "Y": Y,
        "R": np.hypot(X, Y),
        "H": hamiltonian(orbit.params, (x2, y2)),
    }


def level_set_grid(p0: float, K: float = 1.0, extent: float = 2.5, n: int = 201):
    """Conservative energy on a square rotated-frame grid; returns ``(X, Y, H)`` meshes."""
    g = np.linspace(-extent, extent, n)
    X, Y = np.meshgrid(g, g, indexing="xy")
    x, y = inverse_rotated_frame((X, Y))
    H = hamiltonian(ModelParams(0.0, K, 0.0, Constant(p0)), (x, y))
    return X, Y, H
