"""Adaptive initial-value integrator for small nonautonomous systems.

The default scheme is the Dormand-Prince 5(4) pair with a PI step-size
controller. A stiff route (variable-order BDF, Newton on the Jacobian) is
selected with ``SolverSettings(method="bdf")``. Dense output between accepted
steps is cubic Hermite.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

SAFETY = 0.9
PI_ALPHA = 0.7 / 5.0
PI_BETA = 0.4 / 5.0
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0

METHODS = ("dopri5", "bdf")

# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_E = _B - np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640,
                    -92097 / 339200, 187 / 2100, 1 / 40])


class IntegrationError(RuntimeError):
    """Integration could not continue; ``t`` is the last good time."""

    def __init__(self, t: float, reason: str):
        super().__init__(f"{reason} (t = {t!r})")
        self.t = t
        self.reason = reason


@dataclass(frozen=True)
class SolverSettings:
    rtol: float = 1e-8
    atol: float = 1e-10
    first_step: float | None = None
    max_step: float = math.inf
    method: str = "dopri5"
    max_steps: int = 1_000_000

    def __post_init__(self):
        if not self.rtol > 0:
            raise ValueError(f"rtol must be > 0, got {self.rtol}")
        if not self.atol > 0:
            raise ValueError(f"atol must be > 0, got {self.atol}")
        if self.first_step is not None and not self.first_step > 0:
            raise ValueError(f"first_step must be > 0, got {self.first_step}")
        if not self.max_step > 0:
            raise ValueError(f"max_step must be > 0, got {self.max_step}")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")

    def to_dict(self) -> dict:
        return {"rtol": self.rtol, "atol": self.atol, "first_step": self.first_step,
                "max_step": None if math.isinf(self.max_step) else self.max_step,
                "method": self.method, "max_steps": self.max_steps}


@dataclass
class Solution:
    """Accepted step points plus whatever grid was requested.

    ``t`` and ``y`` hold the requested output (``y`` has shape ``(n, len(t))``).
    The accepted steps ``t_steps``, ``y_steps`` and slopes ``f_steps`` back the
    Hermite interpolant exposed through :meth:`__call__`.
    """

    t: np.ndarray
    y: np.ndarray
    t_steps: np.ndarray
    y_steps: np.ndarray
    f_steps: np.ndarray
    nfev: int
    method: str

    def __call__(self, t):
        return hermite_eval(self.t_steps, self.y_steps, self.f_steps, t)


def hermite_eval(ts, ys, fs, t):
    """Piecewise cubic Hermite interpolation through ``(ts, ys, fs)``."""
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    increasing = ts[-1] >= ts[0]
    tk = ts if increasing else ts[::-1]
    yk = ys if increasing else ys[:, ::-1]
    fk = fs if increasing else fs[:, ::-1]
    if tk.size == 1:
        out = np.repeat(yk[:, :1], t_arr.size, axis=1)
        return out[:, 0] if np.ndim(t) == 0 else out
    i = np.clip(np.searchsorted(tk, t_arr, side="right") - 1, 0, tk.size - 2)
    h = tk[i + 1] - tk[i]
    s = (t_arr - tk[i]) / h
    h00 = (1 + 2 * s) * (1 - s) ** 2
    h10 = s * (1 - s) ** 2
    h01 = s * s * (3 - 2 * s)
    h11 = s * s * (s - 1)
    out = (h00 * yk[:, i] + h10 * h * fk[:, i] + h01 * yk[:, i + 1] + h11 * h * fk[:, i + 1])
    return out[:, 0] if np.ndim(t) == 0 else out


def _check_finite(f, t):
    if not np.all(np.isfinite(f)):
        raise IntegrationError(t, "non-finite value in right-hand side")
    return f


def _initial_step(fun, t0, y0, f0, direction, rtol, atol, order=5):
    scale = atol + np.abs(y0) * rtol
    d0 = np.sqrt(np.mean((y0 / scale) ** 2))
    d1 = np.sqrt(np.mean((f0 / scale) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    y1 = y0 + h0 * direction * f0
    f1 = fun(t0 + h0 * direction, y1)
    d2 = np.sqrt(np.mean(((f1 - f0) / scale) ** 2)) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / (order + 1))
    return min(100 * h0, h1)


def _dopri5(fun, t0, y0, t1, settings, stops=None):
    direction = 1.0 if t1 >= t0 else -1.0
    rtol, atol = settings.rtol, settings.atol
    nfev = 1
    f0 = _check_finite(fun(t0, y0), t0)
    span = abs(t1 - t0)
    ts, ys, fs = [t0], [y0.copy()], [f0.copy()]
    if span == 0.0:
        return ts, ys, fs, nfev
    # output times are hit exactly so that gridded values carry no interpolation error
    targets = [t1] if stops is None else sorted(
        set(float(s) for s in stops if (s - t0) * direction > 0) | {t1},
        reverse=direction < 0)
    if settings.first_step is not None:
        h = settings.first_step
    else:
        h = _initial_step(fun, t0, y0, f0, direction, rtol, atol)
        nfev += 1
    h = min(h, settings.max_step, span)
    t, y, f = t0, y0, f0
    err_prev = 1e-4
    k = np.empty((7, y0.size))
    target_idx = 0
    nsteps = 0
    while target_idx < len(targets):
        target = targets[target_idx]
        remaining = abs(target - t)
        if remaining <= 1e-14 * max(1.0, abs(target)):
            target_idx += 1
            continue
        nsteps += 1
        if nsteps > settings.max_steps:
            raise IntegrationError(t, "maximum number of steps exceeded")
        step = min(h, remaining)
        clamped = step < h
        min_step = 10 * np.finfo(float).eps * max(abs(t), 1.0)
        while True:
            if step < min_step:
                raise IntegrationError(t, "step size underflow")
            hs = step * direction
            k[0] = f
            for s in range(1, 7):
                ys_ = y + hs * (np.dot(_A[s], k[:s]))
                k[s] = fun(t + _C[s] * hs, ys_)
            nfev += 6
            y_new = y + hs * np.dot(_B[:6], k[:6])
            f_new = k[6]
            if not (np.all(np.isfinite(y_new)) and np.all(np.isfinite(f_new))):
                step *= 0.25
                clamped = False
                if step < min_step:
                    raise IntegrationError(t, "non-finite value in right-hand side")
                continue
            scale = atol + np.maximum(np.abs(y), np.abs(y_new)) * rtol
            err = math.sqrt(float(np.mean((hs * np.dot(_E, k) / scale) ** 2)))
            if err <= 1.0:
                if err == 0.0:
                    factor = MAX_FACTOR
                else:
                    factor = SAFETY * err ** -PI_ALPHA * err_prev ** PI_BETA
                    factor = min(MAX_FACTOR, max(MIN_FACTOR, factor))
                err_prev = max(err, 1e-4)
                landed = remaining - step <= 1e-14 * max(1.0, abs(target))
                t = target if landed else t + hs
                y, f = y_new, f_new.copy()
                ts.append(t)
                ys.append(y.copy())
                fs.append(f.copy())
                h_next = step * factor
                h = min(max(h, h_next) if clamped else h_next, settings.max_step)
                break
            step *= max(MIN_FACTOR, SAFETY * err ** -0.2)
            clamped = False
    return ts, ys, fs, nfev


def _bdf(fun, t0, y0, t1, settings):
    from scipy.integrate import solve_ivp

    kw = {}
    if settings.first_step is not None:
        kw["first_step"] = settings.first_step
    res = solve_ivp(fun, (t0, t1), y0, method="BDF", rtol=settings.rtol,
                    atol=settings.atol, max_step=settings.max_step, **kw)
    if not res.success:
        t_last = float(res.t[-1]) if res.t.size else t0
        raise IntegrationError(t_last, res.message)
    ys = res.y.T
    fs = [np.asarray(fun(tt, yy), dtype=float) for tt, yy in zip(res.t, ys)]
    return list(res.t), list(ys), fs, res.nfev + len(fs)


def integrate(rhs: Callable, y0, t0: float, t1: float,
              settings: SolverSettings | None = None, t_eval=None) -> Solution:
    """Integrate ``dy/dt = rhs(t, y)`` from ``t0`` to ``t1``.

    Parameters
    ----------
    rhs : callable
        ``rhs(t, y)`` returning a sequence of the same length as ``y``.
    y0 : array_like
        Initial state (a scalar is treated as a 1-vector).
    t0, t1 : float
        Start and end times. ``t1 < t0`` integrates backwards.
    settings : SolverSettings, optional
        Tolerances and method; defaults to ``rtol=1e-8, atol=1e-10``.
    t_eval : array_like, optional
        Output grid inside ``[t0, t1]``. The explicit scheme steps onto
        these times exactly; the BDF route fills them by Hermite
        interpolation. Without it the accepted steps are returned.

    Raises
    ------
    IntegrationError
        On step-size underflow or a non-finite right-hand side.
    """
    settings = settings or SolverSettings()
    y0 = np.atleast_1d(np.asarray(y0, dtype=float)).copy()
    t0, t1 = float(t0), float(t1)
    if not np.all(np.isfinite(y0)):
        raise IntegrationError(t0, "non-finite initial state")

    def fun(t, y):
        return _check_finite(np.asarray(rhs(t, y), dtype=float).reshape(y0.shape), t)

    if settings.method == "bdf":
        ts, ys, fs, nfev = _bdf(fun, t0, y0, t1, settings)
    else:
        ts, ys, fs, nfev = _dopri5(fun, t0, y0, t1, settings, stops=t_eval)
    t_steps = np.asarray(ts, dtype=float)
    y_steps = np.asarray(ys, dtype=float).T
    f_steps = np.asarray(fs, dtype=float).T
    if t_eval is None:
        t_out, y_out = t_steps, y_steps
    else:
        t_out = np.asarray(t_eval, dtype=float)
        lo, hi = min(t0, t1), max(t0, t1)
        if t_out.size and (t_out.min() < lo - 1e-12 or t_out.max() > hi + 1e-12):
            raise ValueError("t_eval must lie inside the integration interval")
        y_out = hermite_eval(t_steps, y_steps, f_steps, t_out)
    return Solution(t_out, y_out, t_steps, y_steps, f_steps, nfev, settings.method)
