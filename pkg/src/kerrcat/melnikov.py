"""First-order Melnikov analysis of a Gaussian gate pulse on the resonant skeleton.

For the pulse ``p1(t) = A exp(-t^2 / (2 sigma^2))`` the splitting function is
linear in the amplitude, ``M(t0) = A G_sigma(t0) - kappa A_lobe``, where the
kernel ``G_sigma`` integrates the pulse slope against ``x_h y_h`` along the
homoclinic loop. All integrals use the trapezoidal rule on the loop grid of
:mod:`kerrcat.skeleton`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import partial

import numpy as np
from scipy.optimize import bisect, minimize_scalar

from ._parallel import pmap
from .skeleton import ORBIT_POINTS, ORBIT_T_MAX, ORBIT_T_MIN, HomoclinicOrbit

T0_MIN = -2.0
T0_MAX = 2.0
T0_POINTS = 801
SIGMA_MIN = 0.1
SIGMA_MAX = 1.0
SIGMA_POINTS = 181

ZERO_TOL = 1e-10
SIMPLE_SLOPE_TOL = 1e-6
ARGMAX_XTOL = 1e-8
_CHUNK = 256


def t0_grid(n: int = T0_POINTS):
    return np.linspace(T0_MIN, T0_MAX, n)


def sigma_grid(n: int = SIGMA_POINTS):
    return np.linspace(SIGMA_MIN, SIGMA_MAX, n)


def _gaussian(u, sigma):
    return np.exp(-u * u / (2.0 * sigma * sigma))


def pulse_kernel_G(orbit: HomoclinicOrbit, sigma: float, t0, n: int = ORBIT_POINTS):
    """Kernel ``G_sigma(t0)``; ``t0`` may be an array."""
    if not sigma > 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    t = np.linspace(ORBIT_T_MIN, ORBIT_T_MAX, n)
    prod = orbit.product(t)
    t0a = np.atleast_1d(np.asarray(t0, dtype=float))
    out = np.empty(t0a.size)
    for lo in range(0, t0a.size, _CHUNK):
        u = t[None, :] + t0a[lo:lo + _CHUNK, None]
        slope = -(u / sigma ** 2) * _gaussian(u, sigma)
        out[lo:lo + _CHUNK] = np.trapezoid(slope * prod[None, :], t, axis=1)
    return float(out[0]) if np.ndim(t0) == 0 else out


def melnikov_M(orbit: HomoclinicOrbit, kappa: float, A: float, sigma: float, t0,
               n: int = ORBIT_POINTS):
    return A * pulse_kernel_G(orbit, sigma, t0, n) - kappa * orbit.lobe_area


def pulse_term_direct(orbit: HomoclinicOrbit, A: float, sigma: float, t0,
                      n: int = ORBIT_POINTS):
    """Pulse contribution before integrating by parts: ``-int p1(t+t0) (x dy + y dx) dt``."""
    t = np.linspace(ORBIT_T_MIN, ORBIT_T_MAX, n)
    x, y = orbit.xy(t)
    dx, dy = orbit.velocity(t)
    w = x * dy + y * dx
    t0a = np.atleast_1d(np.asarray(t0, dtype=float))
    out = np.array([-np.trapezoid(A * _gaussian(t + s, sigma) * w, t) for s in t0a])
    return float(out[0]) if np.ndim(t0) == 0 else out


def dissipation_term(orbit: HomoclinicOrbit, kappa: float, n: int = ORBIT_POINTS) -> float:
    """``(kappa/2) int (x dy - y dx) dt`` along the oriented loop."""
    t = np.linspace(ORBIT_T_MIN, ORBIT_T_MAX, n)
    x, y = orbit.xy(t)
    dx, dy = orbit.velocity(t)
    return 0.5 * kappa * float(np.trapezoid(x * dy - y * dx, t))


def detuning_term(orbit: HomoclinicOrbit, delta: float, n: int = ORBIT_POINTS) -> float:
    """``-delta int (x dx + y dy) dt``; a total derivative, so zero up to quadrature error."""
    t = np.linspace(ORBIT_T_MIN, ORBIT_T_MAX, n)
    x, y = orbit.xy(t)
    dx, dy = orbit.velocity(t)
    return -delta * float(np.trapezoid(x * dx + y * dy, t))


def melnikov_three_term(orbit: HomoclinicOrbit, kappa: float, delta: float, A: float,
                        sigma: float, t0, n: int = ORBIT_POINTS) -> dict:
    """Unsimplified splitting function, each perturbation integrated on its own."""
    pulse = pulse_term_direct(orbit, A, sigma, t0, n)
    diss = dissipation_term(orbit, kappa, n)
    det = detuning_term(orbit, delta, n)
    return {"pulse": pulse, "dissipation": diss, "detuning": det, "total": pulse + diss + det}


@dataclass(frozen=True)
class MelnikovZero:
    t0: float
    slope_sign: int
    slope: float
    simple: bool
    bracket: tuple[float, float]


@dataclass
class MelnikovCurve:
    orbit: HomoclinicOrbit
    kappa: float
    A: float
    sigma: float
    t0: np.ndarray
    M: np.ndarray
    zeros: list = field(default_factory=list)

    @property
    def lobe_area(self) -> float:
        return self.orbit.lobe_area

    def value(self, t0):
        return melnikov_M(self.orbit, self.kappa, self.A, self.sigma, t0)


def melnikov_curve(orbit: HomoclinicOrbit, kappa: float, A: float, sigma: float,
                   n_t0: int = T0_POINTS, with_zeros: bool = True) -> MelnikovCurve:
    grid = t0_grid(n_t0)
    curve = MelnikovCurve(orbit, kappa, A, sigma, grid, melnikov_M(orbit, kappa, A, sigma, grid))
    if with_zeros:
        curve.zeros = find_zeros(curve)
    return curve


def find_zeros(curve: MelnikovCurve) -> list[MelnikovZero]:
    """Sign changes of the sampled curve, refined by bisection on ``M`` itself."""
    M = curve.M
    t = curve.t0
    zeros = []
    for i in range(M.size - 1):
        a, b = M[i], M[i + 1]
        if a == 0.0 and i > 0:
            continue  # already reported as the right end of the previous bracket
        if a * b > 0 or (a == 0.0 and b == 0.0):
            continue
        if a == 0.0:
            root = float(t[i])
        elif b == 0.0:
            root = float(t[i + 1])
        else:
            root = bisect(curve.value, t[i], t[i + 1], xtol=1e-15, rtol=1e-15, maxiter=200)
        h = 1e-5
        slope = (curve.value(root + h) - curve.value(root - h)) / (2 * h)
        sign = int(np.sign(b - a)) if b != a else int(np.sign(slope))
        zeros.append(MelnikovZero(root, sign, float(slope), abs(slope) >= SIMPLE_SLOPE_TOL,
                                  (float(t[i]), float(t[i + 1]))))
    return zeros


def _argmax(f_grid, f_scalar, grid):
    vals = f_grid(grid)
    i = int(np.argmax(vals))
    if i == 0 or i == grid.size - 1 or not (vals[i] > vals[i - 1] and vals[i] > vals[i + 1]):
        return float(grid[i]), float(vals[i])
    res = minimize_scalar(lambda s: -f_scalar(s), bracket=(grid[i - 1], grid[i], grid[i + 1]),
                          method="golden", options={"xtol": ARGMAX_XTOL})
    if -res.fun >= vals[i]:
        return float(res.x), float(-res.fun)
    return float(grid[i]), float(vals[i])


def g_max(orbit: HomoclinicOrbit, sigma: float, n_t0: int = T0_POINTS):
    """``(t0*, max G_sigma)`` over the cross-section window."""
    return _argmax(lambda g: pulse_kernel_G(orbit, sigma, g),
                   lambda s: pulse_kernel_G(orbit, sigma, s), t0_grid(n_t0))


def m_max(orbit: HomoclinicOrbit, kappa: float, A: float, sigma: float,
          n_t0: int = T0_POINTS) -> float:
    return m_argmax(orbit, kappa, A, sigma, n_t0)[1]


def m_argmax(orbit: HomoclinicOrbit, kappa: float, A: float, sigma: float,
             n_t0: int = T0_POINTS):
    return _argmax(lambda g: melnikov_M(orbit, kappa, A, sigma, g),
                   lambda s: melnikov_M(orbit, kappa, A, sigma, s), t0_grid(n_t0))


@dataclass
class ThresholdCurve:
    """Onset amplitude per pulse width; NaN where ``max G <= 0``."""

    sigma: np.ndarray
    A_crit: np.ndarray
    g_max: np.ndarray
    t0_star: np.ndarray
    kappa: float
    lobe_area: float


def critical_amplitude(kappa: float, area: float, gmax: float):
    if not gmax > 0:
        return None
    return kappa * area / gmax


def _g_max_row(orbit, n_t0, sigma):
    return g_max(orbit, sigma, n_t0)


def threshold_curve(orbit: HomoclinicOrbit, kappa: float, sigmas=None,
                    n_t0: int = T0_POINTS) -> ThresholdCurve:
    sigmas = sigma_grid() if sigmas is None else np.asarray(sigmas, dtype=float)
    rows = pmap(partial(_g_max_row, orbit, n_t0), sigmas)
    t_star = np.array([r[0] for r in rows])
    gm = np.array([r[1] for r in rows])
    area = orbit.lobe_area
    a_crit = np.array([np.nan if (c := critical_amplitude(kappa, area, g)) is None else c
                       for g in gm])
    return ThresholdCurve(sigmas, a_crit, gm, t_star, kappa, area)
