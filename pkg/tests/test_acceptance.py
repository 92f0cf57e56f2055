"""Acceptance criteria, one check per criterion, each with its runtime budget.

Run under pytest (a summary line per criterion is printed at the end of the
session) or directly with ``python tests/test_acceptance.py``.
"""
from __future__ import annotations

import filecmp
import math
import os
import subprocess
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest

from kerrcat.linear import variational_solution
from kerrcat.melnikov import (m_max, melnikov_curve, melnikov_M, melnikov_three_term,
                              pulse_kernel_G, pulse_term_direct, threshold_curve)
from kerrcat.model import (Logistic, ModelParams, Trajectory, full_rhs, hamiltonian, pump_value,
                           table_params)
from kerrcat.odeint import integrate
from kerrcat.reduction import (a3_forward, branch_grid, lag_metric, make_branch_config,
                               moving_branch, reduced_trajectory)
from kerrcat.skeleton import HomoclinicOrbit, orbit_grid
from kerrcat.transport import (Fate, TransportConfig, leaked_arcs, melnikov_zero_projections,
                               run_transport)

P0, K, KAPPA = 1.5, 1.0, 1.0
RESULTS: dict[int, tuple[bool, str]] = {}


def _record(n: int, passed: bool, detail: str, elapsed: float, budget: float | None):
    if budget is not None:
        detail += f"; {elapsed:.2f}s (budget {budget:g}s)"
        passed = passed and elapsed < budget
    else:
        detail += f"; {elapsed:.2f}s"
    RESULTS[n] = (passed, detail)
    print(f"criterion {n:2d}: {'PASS' if passed else 'FAIL'} {detail}")
    return passed, detail


def _timed(fn):
    start = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - start


def criterion_1():
    def run():
        orb = HomoclinicOrbit(P0, K)
        x, y = orb.xy(orbit_grid(4001, -20.0, 20.0))
        # energy written out directly rather than through the model helper
        r2 = x * x + y * y
        return float(np.max(np.abs(0.25 * K * r2 * r2 + P0 * x * y)))
    h, dt = _timed(run)
    return _record(1, h < 1e-12, f"max|H| = {h:.2e} (< 1e-12)", dt, 1.0)


def criterion_2():
    target = 4.0 * P0 / (3.0 * K)

    def run():
        # shoelace area of the sampled loop, independent of the orbit's own quadrature
        x, y = HomoclinicOrbit(P0, K).xy(orbit_grid(4001, -20.0, 20.0))
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))
    area, dt = _timed(run)
    rel = abs(abs(area) - target) / target
    return _record(2, rel < 1e-6, f"|signed area| = {abs(area):.10f} vs {target:.1f}, "
                   f"rel err {rel:.3e} (< 1e-6)", dt, 1.0)


def criterion_3():
    def run():
        parts = melnikov_three_term(HomoclinicOrbit(P0, K), KAPPA, 1.0, 4.0, 0.3, 0.0)
        return abs(parts["detuning"])
    md, dt = _timed(run)
    return _record(3, md < 1e-8, f"|M_delta| = {md:.2e} at delta = 1 (< 1e-8)", dt, 1.0)


def criterion_4():
    params = table_params()
    env = params.pump

    def run():
        t = np.linspace(0.0, 12.0, 241)
        half = 0.5 * params.kappa
        worst = 0.0
        for xi0, eta0 in ((1.0, 0.0), (0.0, 1.0), (0.7, -0.4)):
            sol = integrate(lambda s, z: (
                (pump_value(env, s) - half) * z[0] + params.delta * z[1],
                -(pump_value(env, s) + half) * z[1] - params.delta * z[0]),
                [xi0, eta0], 0.0, 12.0, t_eval=t)
            xi, eta = variational_solution(env, params.kappa, xi0, eta0, 0.0, t)
            exact = np.vstack([xi, eta])
            err = np.linalg.norm(sol.y - exact, axis=0) / np.linalg.norm(exact, axis=0)
            worst = max(worst, float(np.max(err)))
        return worst
    err, dt = _timed(run)
    return _record(4, err < 1e-6, f"max rel err = {err:.2e} over t in [0, 12] (< 1e-6)", dt, 5.0)


def criterion_5():
    params = table_params()

    def run():
        bc = make_branch_config(params)
        asym = abs(a3_forward(bc, params, bc.T + 15.0) + 1.0 / 9.0)
        other = make_branch_config(params, a3_init=-0.5)
        gap0 = abs(bc.a3_init - other.a3_init)
        ok = True
        worst = 0.0
        for t in np.linspace(bc.T + 1.5, bc.T + 15.0, 10):
            gap = abs(a3_forward(bc, params, t) - a3_forward(other, params, t))
            bound = math.exp(-bc.delta_margin * (t - bc.T)) * gap0
            worst = max(worst, gap / bound)
            ok &= gap <= bound
        return asym, ok, worst
    (asym, ok, worst), dt = _timed(run)
    return _record(5, asym < 1e-6 and ok,
                   f"|a3(T+15) + 1/9| = {asym:.2e} (< 1e-6); contraction holds at 10 times "
                   f"= {ok} (worst gap/bound {worst:.3f})", dt, 5.0)


def criterion_6():
    params = table_params()
    rho_inf = 18.0 ** 0.25

    def run():
        bc = make_branch_config(params)
        lim = abs(moving_branch(bc, params, bc.T + 15.0) - rho_inf)
        t_end = bc.T + 10.0
        rho = moving_branch(bc, params, t_end)
        errs = []
        for sign in (1, -1):
            _, x = reduced_trajectory(bc, params, sign * 0.1, t_end, [t_end])
            errs.append(abs(x[-1] - sign * rho))
        return lim, max(errs)
    (lim, trk), dt = _timed(run)
    return _record(6, lim < 1e-3 and trk < 1e-4,
                   f"|rho(T+15) - 18^(1/4)| = {lim:.2e} (< 1e-3); max |x - (+-rho)| at T+10 "
                   f"= {trk:.2e} (< 1e-4)", dt, 5.0)


def criterion_7():
    def run():
        orb = HomoclinicOrbit(P0, K)
        t0 = np.linspace(-2.0, 2.0, 801)
        simple = melnikov_M(orb, KAPPA, 4.0, 0.3, t0)
        three = melnikov_three_term(orb, KAPPA, 0.0, 4.0, 0.3, t0)["total"]
        ibp = pulse_term_direct(orb, 4.0, 0.3, t0) - 4.0 * pulse_kernel_G(orb, 0.3, t0)
        return float(np.max(np.abs(simple - three))), float(np.max(np.abs(ibp)))
    (a, b), dt = _timed(run)
    return _record(7, a < 1e-8 and b < 1e-8,
                   f"(a) |A G - kappa A_lobe - three-term| = {a:.2e}; (b) by-parts gap = "
                   f"{b:.2e} (both < 1e-8)", dt, 5.0)


def criterion_8():
    def run():
        orb = HomoclinicOrbit(P0, K)
        sig = np.linspace(0.1, 1.0, 10)
        one = threshold_curve(orb, KAPPA, sig)
        two = threshold_curve(orb, 2 * KAPPA, sig)
        worst = max(abs(m_max(orb, KAPPA, ac, s)) for s, ac in zip(sig, one.A_crit))
        scale_err = float(np.max(np.abs(two.A_crit / one.A_crit - 2.0)))
        mismatches = 0
        for s in np.linspace(0.1, 1.0, 10):
            for A in np.linspace(0.5, 8.0, 10):
                has = bool(melnikov_curve(orb, KAPPA, A, s).zeros)
                mismatches += has != (m_max(orb, KAPPA, A, s) > 0)
        return worst, mismatches, scale_err
    (worst, mis, scale), dt = _timed(run)
    return _record(8, worst < 1e-6 and mis == 0 and scale < 1e-12,
                   f"max |m_max(A_crit)| = {worst:.2e} (< 1e-6); zero/sign mismatches on "
                   f"10x10 grid = {mis}; kappa-doubling error = {scale:.1e}", dt, 30.0)


def criterion_9():
    def run():
        orb = HomoclinicOrbit(P0, K)
        res = run_transport(TransportConfig(A=7.5, sigma=0.3, n=150, radius=0.8))
        arcs = leaked_arcs(res.mask(Fate.LEAKED))
        zeros = melnikov_curve(orb, KAPPA, 7.5, 0.3).zeros
        proj = melnikov_zero_projections(orb, zeros)
        hmax = max(abs(hamiltonian(orb.params, p)) for p in proj) if proj else math.inf
        quiet = run_transport(TransportConfig(A=0.0, sigma=0.3, n=150, radius=0.8))
        return res.leaked_count, len(arcs), len(proj), hmax, quiet.leaked_count
    (leaked, n_arcs, n_proj, hmax, quiet), dt = _timed(run)
    ok = leaked > 0 and n_arcs <= 2 and n_proj > 0 and hmax < 1e-12 and quiet == 0
    return _record(9, ok, f"A=7.5: {leaked}/150 leaked in {n_arcs} arc(s), {n_proj} projections "
                   f"with max|H| = {hmax:.1e}; A=0: {quiet}/150 leaked (need 0)", dt, 60.0)


def criterion_10():
    def run():
        peaks = []
        t = np.linspace(0.0, 20.0, 512)
        for g in (0.5, 1.5, 4.0):
            p = ModelParams(KAPPA, K, 0.0, Logistic(2.5, g, 5.0))
            sol = integrate(lambda s, z: full_rhs(p, s, z), [1e-3, 0.0], 0.0, 20.0, t_eval=t)
            peaks.append(float(np.max(lag_metric(Trajectory(t, sol.y[0], sol.y[1]), p))))
        params = table_params()
        bc = make_branch_config(params)
        tt = np.linspace(bc.T, bc.T + 5.0, 51)
        rhos = branch_grid(bc, params, tt, [0.01, 1.0 / 18.0, 1.0])
        spread = float(np.max(rhos[:, -1]) - np.min(rhos[:, -1]))
        return peaks, spread
    (peaks, spread), dt = _timed(run)
    inc = all(b > a for a, b in zip(peaks, peaks[1:]))
    return _record(10, inc and spread < 1e-6,
                   f"peak lags {', '.join(f'{v:.4f}' for v in peaks)} strictly increasing = "
                   f"{inc}; w* spread at T+5 = {spread:.1e} (< 1e-6)", dt, 30.0)


FIGURE_COMMANDS = ["validate", "skeleton", "prepare", "branches", "melnikov", "threshold",
                   "transport"]


def _cli_run(out: Path, threads: int):
    env = dict(os.environ, KERRCAT_THREADS=str(threads))
    for cmd in FIGURE_COMMANDS:
        extra = ["--gamma-sweep"] if cmd == "prepare" else []
        proc = subprocess.run([sys.executable, "-m", "kerrcat", cmd, "--out", str(out), *extra],
                              env=env, capture_output=True, text=True)
        if proc.returncode != 0:
            raise RuntimeError(f"{cmd} exited {proc.returncode}: {proc.stderr.strip()}")


def criterion_11():
    def run():
        with tempfile.TemporaryDirectory() as tmp:
            a, b = Path(tmp, "t1"), Path(tmp, "t8")
            _cli_run(a, 1)
            _cli_run(b, 8)
            names = sorted(p.name for p in a.iterdir())
            same = names == sorted(p.name for p in b.iterdir())
            diff = [n for n in names if not filecmp.cmp(a / n, b / n, shallow=False)]
            return len(names), same and not diff, diff
    (n, ok, diff), dt = _timed(run)
    return _record(11, ok, f"{n} files byte-identical across KERRCAT_THREADS=1 and 8 = {ok}"
                   + (f" (differ: {diff})" if diff else ""), dt, None)


CRITERIA = {i: globals()[f"criterion_{i}"] for i in range(1, 12)}


@pytest.mark.parametrize("n", list(CRITERIA))
def test_criterion(n):
    passed, detail = CRITERIA[n]()
    assert passed, detail


if __name__ == "__main__":
    failed = [n for n, fn in CRITERIA.items() if not fn()[0]]
    sys.exit(1 if failed else 0)
