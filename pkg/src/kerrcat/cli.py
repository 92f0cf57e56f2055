"""Command-line entry point: ``kerrcat <command> [options]``.

Configuration precedence is built-in defaults, then the ``--config`` JSON
file, then command-line flags. Exit codes: 0 success, 2 configuration error,
3 numerical failure, 4 validation failure.
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .config import ConfigError
from .linear import classify
from .melnikov import critical_amplitude, g_max, melnikov_curve, threshold_curve
from .model import Trajectory, frozen_equilibrium_curve, full_rhs, pump_value
from .odeint import IntegrationError, integrate
from .output import write_json, write_table
from .reduction import (asymptotic_coefficients, branch_grid, frozen_reduced_roots, lag_metric,
                        make_branch_config, reduced_coefficients, reduced_trajectory)
from .skeleton import HomoclinicOrbit, level_set_grid, separatrix_contour
from .transport import (Fate, TransportConfig, leaked_arcs, melnikov_zero_projections,
                        run_transport)
from .validation import run_suite

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_VALIDATION = 4


class ValidationFailure(RuntimeError):
    pass


def _orbit(cfg):
    return HomoclinicOrbit(cfg["gate"]["p0"], cfg["model"]["K"])


def _grid(block):
    return np.linspace(block["t_start"], block["t_end"], block["samples"])


def cmd_skeleton(cfg, out, fmt):
    s = cfg["skeleton"]
    orbit = _orbit(cfg)
    contour = separatrix_contour(orbit, s["points"])
    X, Y, H = level_set_grid(orbit.p0, orbit.K, s["extent"], s["grid"])
    return [
        write_table(out, "skeleton_contour", contour, cfg, "skeleton", fmt),
        write_table(out, "skeleton_levels", {"X": X.ravel(), "Y": Y.ravel(), "H": H.ravel()},
                    cfg, "skeleton", fmt),
    ]


def cmd_classify(cfg, out, fmt, constant=False):
    params = cfgmod.constant_params(cfg) if constant else cfgmod.ramp_params(cfg)
    result = classify(params).to_dict()
    result["pump"] = params.to_dict()["pump"]
    return [write_json(out, "classify.json", result, cfg, "classify")]


def _full_trajectory(params, x0, t, settings):
    sol = integrate(lambda s, z: full_rhs(params, s, z), [x0, 0.0], t[0], t[-1], settings,
                    t_eval=t)
    return Trajectory(t, sol.y[0], sol.y[1], params)


def cmd_prepare(cfg, out, fmt, gamma_sweep=False):
    block = cfg["prepare"]
    settings = cfgmod.solver_settings(cfg)
    params = cfgmod.ramp_params(cfg)
    t = _grid(block)
    plus = _full_trajectory(params, block["x0"], t, settings)
    minus = _full_trajectory(params, -block["x0"], t, settings)
    xe, ye = frozen_equilibrium_curve(params, t)
    files = [write_table(out, "prepare", {
        "t": t, "x_plus": plus.x, "y_plus": plus.y, "x_minus": minus.x, "y_minus": minus.y,
        "x_eq_frozen_plus": xe, "y_eq_frozen_plus": ye}, cfg, "prepare", fmt)]
    if gamma_sweep:
        summary = {}
        for g in block["gamma_sweep"]:
            pg = cfgmod.ramp_params(cfg, gamma=g)
            traj = _full_trajectory(pg, block["x0"], t, settings)
            lag = lag_metric(traj, pg)
            xe_g, _ = frozen_equilibrium_curve(pg, t)
            files.append(write_table(out, f"lag_gamma_{g:g}",
                                     {"t": t, "x": traj.x, "x_eq": xe_g, "lag": lag},
                                     cfg, "prepare", fmt))
            i = int(np.argmax(lag))
            summary[f"{g:g}"] = {"gamma": g, "peak_lag": float(lag[i]), "t_peak": float(t[i]),
                                 "final_lag": float(lag[-1])}
        peaks = [summary[f"{g:g}"]["peak_lag"] for g in block["gamma_sweep"]]
        files.append(write_json(out, "lag_summary.json", {
            "by_gamma": summary,
            "peak_strictly_increasing": bool(all(b > a for a, b in zip(peaks, peaks[1:]))),
        }, cfg, "prepare"))
    return files


def cmd_branches(cfg, out, fmt):
    block = cfg["branches"]
    settings = cfgmod.solver_settings(cfg)
    params = cfgmod.ramp_params(cfg)
    bc = make_branch_config(params, T=block["T"], a3_init=block["a3_init"],
                            w_star=block["w_star"])
    t = _grid(block)
    if not t[-1] > bc.T:
        raise ConfigError("branches.t_end", f"must exceed the reference time T = {bc.T:.6g}")
    coeffs = reduced_coefficients(bc, params, t)
    rho = branch_grid(bc, params, t)
    after = t >= bc.T
    t_after = t[after]
    x_red = {}
    for sign, name in ((1, "x_red_plus"), (-1, "x_red_minus")):
        col = np.full(t.shape, np.nan)
        _, xs = reduced_trajectory(bc, params, sign * block["x0_red"], t[-1], t_after, settings)
        col[after] = xs
        x_red[name] = col
    eq_plus = np.full(t.shape, np.nan)
    for i in np.flatnonzero(after):
        roots = frozen_reduced_roots(coeffs.mu[i], coeffs.b[i])
        if roots is not None:
            eq_plus[i] = roots[0]
    files = [write_table(out, "branches", {
        "t": t, "p": pump_value(params.pump, t), "mu": coeffs.mu, "a3": coeffs.a3,
        "b": coeffs.b, "rho_plus": rho, "rho_minus": -rho, **x_red,
        "x_eq_red_plus": eq_plus, "x_eq_red_minus": -eq_plus}, cfg, "branches", fmt)]

    asy = asymptotic_coefficients(params)
    # a null sweep entry stands for the saturated value w_inf
    ws = [asy["w_inf"] if w is None else w for w in block["w_star_sweep"]]
    rhos = branch_grid(bc, params, t, ws)
    cols = {"t": t}
    for k, r in enumerate(rhos):
        cols[f"rho_{k}"] = r
    cols["spread"] = np.max(rhos, axis=0) - np.min(rhos, axis=0)
    files.append(write_table(out, "branch_convergence", cols, cfg, "branches", fmt))
    files.append(write_json(out, "branches_summary.json", {
        "branch_config": bc.to_dict(), "w_star_sweep": ws,
        "asymptotes": asy}, cfg, "branches"))
    return files


def cmd_melnikov(cfg, out, fmt):
    m = cfg["melnikov"]
    kappa = cfg["model"]["kappa"]
    orbit = _orbit(cfg)
    t_star, gm = g_max(orbit, m["sigma"], m["t0_points"])
    a_crit = critical_amplitude(kappa, orbit.lobe_area, gm)
    files, report = [], []
    for A in m["amplitudes"]:
        curve = melnikov_curve(orbit, kappa, A, m["sigma"], m["t0_points"])
        files.append(write_table(out, f"melnikov_A{A:g}", {"t0": curve.t0, "M": curve.M},
                                 cfg, "melnikov", fmt))
        report.append({
            "A": A, "above_threshold": a_crit is not None and A > a_crit,
            "zeros": [{"t0": z.t0, "slope_sign": z.slope_sign, "simple": z.simple}
                      for z in curve.zeros]})
    files.append(write_json(out, "melnikov_zeros.json", {
        "sigma": m["sigma"], "lobe_area": orbit.lobe_area, "g_max": gm, "t0_star": t_star,
        "A_crit": a_crit, "curves": report}, cfg, "melnikov"))
    return files


def cmd_threshold(cfg, out, fmt):
    th = cfg["threshold"]
    sig = np.linspace(th["sigma_min"], th["sigma_max"], th["sigma_points"])
    curve = threshold_curve(_orbit(cfg), cfg["model"]["kappa"], sig, th["t0_points"])
    return [write_table(out, "threshold", {"sigma": curve.sigma, "A_crit": curve.A_crit},
                        cfg, "threshold", fmt)]


def cmd_transport(cfg, out, fmt):
    tr = cfg["transport"]
    m = cfg["model"]
    tc = TransportConfig(p0=cfg["gate"]["p0"], A=tr["A"], sigma=tr["sigma"], kappa=m["kappa"],
                         K=m["K"], delta=m["delta"], n=tr["n"], radius=tr["radius"],
                         center=None if tr["center"] is None else tuple(tr["center"]),
                         t_final=tr["t_final"], settings=cfgmod.solver_settings(cfg))
    result = run_transport(tc)
    orbit = _orbit(cfg)
    zeros = melnikov_curve(orbit, m["kappa"], tr["A"], tr["sigma"]).zeros
    result.melnikov_zeros = [z.t0 for z in zeros]
    result.projections = melnikov_zero_projections(orbit, zeros)
    ps = result.particles
    nan = float("nan")
    files = [write_table(out, "transport", {
        "idx": [p.index for p in ps], "theta": [p.theta for p in ps],
        "x0": [p.initial.x for p in ps], "y0": [p.initial.y for p in ps],
        "xf": [p.final.x if p.final else nan for p in ps],
        "yf": [p.final.y if p.final else nan for p in ps],
        "class": [p.fate.value for p in ps]}, cfg, "transport", fmt)]
    summary = result.summary()
    summary["arcs"] = [list(a) for a in leaked_arcs(result.mask(Fate.LEAKED))]
    summary["ring_center"] = list(tc.ring_center)
    files.append(write_json(out, "transport_summary.json", summary, cfg, "transport"))
    if result.failed_count:
        raise IntegrationError(math.nan, f"{result.failed_count} particle(s) failed; "
                               "see transport_summary.json")
    return files


def cmd_validate(cfg, out, fmt):
    m = cfg["model"]
    checks = run_suite(cfgmod.ramp_params(cfg), cfg["gate"]["p0"], m["K"], m["kappa"])
    ok = all(c.passed for c in checks)
    path = write_json(out, "validate.json", {"passed": ok,
                                             "checks": [c.to_dict() for c in checks]},
                      cfg, "validate")
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name}: {c.value:.3e} (tol {c.tolerance:g})")
    if not ok:
        raise ValidationFailure("invariant suite failed")
    return [path]


COMMANDS = {
    "skeleton": cmd_skeleton,
    "classify": cmd_classify,
    "prepare": cmd_prepare,
    "branches": cmd_branches,
    "melnikov": cmd_melnikov,
    "threshold": cmd_threshold,
    "transport": cmd_transport,
    "validate": cmd_validate,
}

# flag dest -> config path(s); command-specific targets are resolved per subcommand
_MODEL_FLAGS = {
    "kappa": [("model", "kappa")], "K": [("model", "K")], "delta": [("model", "delta")],
    "pmax": [("ramp", "p_max")], "gamma": [("ramp", "gamma")], "tc": [("ramp", "t_c")],
    "p0": [("gate", "p0")], "rtol": [("solver", "rtol")], "atol": [("solver", "atol")],
    "method": [("solver", "method")],
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON configuration file")
    common.add_argument("--out", type=Path, default=Path("."), help="output directory")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    for name in ("kappa", "K", "delta", "pmax", "gamma", "tc", "p0", "rtol", "atol"):
        common.add_argument(f"--{name}", type=float, dest=name)
    common.add_argument("--method", choices=("dopri5", "bdf"))

    parser = argparse.ArgumentParser(prog="kerrcat", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name in ("prepare", "branches"):
            p.add_argument("--samples", type=int)
        if name == "prepare":
            p.add_argument("--gamma-sweep", nargs="*", type=float, default=None,
                           help="write lag files for these ramp rates (default 0.5 1.5 4.0)")
        if name == "branches":
            p.add_argument("--T", type=float, dest="T_ref")
            p.add_argument("--w-star", type=float)
        if name == "classify":
            p.add_argument("--constant", action="store_true",
                           help="classify the constant pump p0 instead of the ramp")
        if name in ("melnikov", "transport"):
            p.add_argument("--sigma", type=float)
        if name == "melnikov":
            p.add_argument("--A", nargs="+", type=float)
        if name == "transport":
            p.add_argument("--A", type=float)
            p.add_argument("--n", type=int)
            p.add_argument("--radius", type=float)
        if name == "threshold":
            p.add_argument("--sigma-points", type=int)
    return parser


def overrides_from_args(args) -> dict:
    ov: dict = {}

    def put(section, key, value):
        if value is not None:
            ov.setdefault(section, {})[key] = value

    for dest, targets in _MODEL_FLAGS.items():
        for section, key in targets:
            put(section, key, getattr(args, dest, None))
    cmd = args.command
    if cmd in ("prepare", "branches"):
        put(cmd, "samples", args.samples)
    if cmd == "prepare" and args.gamma_sweep:
        put("prepare", "gamma_sweep", list(args.gamma_sweep))
    if cmd == "branches":
        put("branches", "T", args.T_ref)
        put("branches", "w_star", args.w_star)
    if cmd == "melnikov":
        put("melnikov", "sigma", args.sigma)
        put("melnikov", "amplitudes", args.A)
    if cmd == "transport":
        put("transport", "sigma", args.sigma)
        put("transport", "A", args.A)
        put("transport", "n", args.n)
        put("transport", "radius", args.radius)
    if cmd == "threshold":
        put("threshold", "sigma_points", args.sigma_points)
    return ov


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = cfgmod.load(args.config, overrides_from_args(args))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    kwargs = {}
    if args.command == "classify":
        kwargs["constant"] = args.constant
    if args.command == "prepare":
        kwargs["gamma_sweep"] = args.gamma_sweep is not None
    try:
        files = COMMANDS[args.command](cfg, args.out, args.format, **kwargs)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValidationFailure as exc:
        print(f"validation failed: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (IntegrationError, FloatingPointError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        # inconsistent parameter combinations rejected by the model layer
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for f in files:
        print(f)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
