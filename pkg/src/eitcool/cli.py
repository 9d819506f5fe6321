"""Command-line front end.

Subcommands ``spectrum``, ``rate-sweep``, ``cool``, ``compare-sc`` and
``validate`` share the flags ``--config``, ``--set key=value``,
``--output``, ``--format`` and ``--seed``.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import io
from .config import ConfigError, RunConfig, load_config
from .model import ParameterError, dressed_states, validate
from .rate_model import (
    DivergentSteadyStateError,
    NoCoolingError,
    PopulationDistribution,
    TruncationError,
    cooling_rate,
    eit_vs_sc_ratio,
    evolve_populations,
    matched_sc_parameters,
    rate_coefficients,
    rate_sweep,
    sc_rate_coefficients,
    steady_state_from_coefficients,
    steady_state_mean_n,
)
from .spectrum import SPECTRUM_COLUMNS, sideband_weights, spectrum_scan

log = logging.getLogger("eitcool")

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_TRUNCATION = 4
EXIT_PHYSICS = 5

SWEEP_COLUMNS = ("sweep_var", "a_plus", "a_minus", "n_s", "w", "status")


def _out_path(cfg: RunConfig, default: str) -> Path:
    return Path(cfg.output.path or default)


def _suffixed(path: Path, suffix: str, ext: str) -> Path:
    return path.with_name(f"{path.stem}{suffix}{ext}")


def _echo_warnings(cfg: RunConfig) -> None:
    for w in validate(cfg.params, cfg.sim.initial_n_mean):
        print(f"warning: {w}", file=sys.stderr)


def cmd_spectrum(cfg: RunConfig) -> int:
    p = cfg.params
    if cfg.sweep is not None:
        if cfg.sweep.variable != "delta_g":
            raise ConfigError("spectrum sweeps run over delta_g")
        lo, hi, n = cfg.sweep.start, cfg.sweep.stop, cfg.sweep.n_points
    else:
        lo, hi, n = p.delta_r - p.gamma, p.delta_r + p.gamma, 401
    points = spectrum_scan(p, (lo, hi), max(n, 2))
    path = _out_path(cfg, "spectrum.csv")
    io.write_table(path, SPECTRUM_COLUMNS, (pt.row() for pt in points), cfg.output.format)
    best = min(points, key=lambda pt: pt.scatter_rate)
    print(f"dark resonance (scan minimum): delta_g = {best.delta_g:.6g}  scatter = {best.scatter_rate:.3e}")
    if p.two_photon_resonant and p.omega_r > 0 and p.omega_g > 0:
        info = dressed_states(p)
        carrier, red, blue = sideband_weights(p)
        print(f"light shift delta = {info.delta_shift:.6g}, narrow width = {info.narrow_width:.6g}")
        print(f"sideband weights: carrier = {carrier:.4g}  red = {red:.4g}  blue = {blue:.4g}")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_rate_sweep(cfg: RunConfig) -> int:
    if cfg.sweep is None:
        raise ConfigError("rate-sweep needs a sweep (sweep.variable, sweep.start, sweep.stop)")
    rows = []
    for r in rate_sweep(cfg.params, cfg.sweep.variable, cfg.sweep.values()):
        status = r.status
        if status == "ok" and r.n_s > cfg.sweep.diverge_threshold:
            status = "diverging"
        rows.append((r.sweep_var, r.a_plus, r.a_minus, r.n_s, r.w, status))
    path = _out_path(cfg, "rate_sweep.csv")
    io.write_table(path, SWEEP_COLUMNS, rows, cfg.output.format)
    ok = [r for r in rows if r[5] != "pole" and r[5] != "heating"]
    if ok:
        best = min(ok, key=lambda r: r[3])
        print(f"minimum n_s = {best[3]:.6g} at {cfg.sweep.variable} = {best[0]:.6g}")
    flagged = [r for r in rows if r[5] != "ok"]
    if flagged:
        print(f"{len(flagged)} of {len(rows)} points flagged (pole/heating/diverging)")
    print(f"wrote {path}")
    return EXIT_OK


def _rate_layer(cfg: RunConfig, t_grid):
    n_max = max(cfg.sim.n_max, 60)
    p0 = PopulationDistribution.thermal(cfg.sim.initial_n_mean, n_max)
    dists = evolve_populations(cfg.params, p0, t_grid)
    return {
        "columns": ("t", "n_mean"),
        "rows": [(t, d.mean) for t, d in zip(t_grid, dists)],
        "n_mean": np.array([d.mean for d in dists]),
        "final_pn": dists[-1],
        "ground": dists[-1].p[0],
    }


def _master_layer(cfg: RunConfig, t_grid):
    from .quantum_sim import DensityOperator, evolve_master

    rho0 = DensityOperator.thermal(cfg.sim.initial_n_mean, cfg.sim.n_max)
    res = evolve_master(cfg.params, rho0, t_grid, cfg.sim.n_max, cfg.sim.ld_order, cfg.sim.recoil_model,
                        method=cfg.sim.method, store_states=False)
    return {
        "columns": ("t", "n_mean", "pop_g", "pop_r", "pop_e"),
        "rows": [(t, n, *pp) for t, n, pp in zip(t_grid, res.n_mean, res.pops_internal)],
        "n_mean": res.n_mean,
        "final_pn": res.final_pn,
        "ground": res.final_pn.p[0],
        "meta": {"method": res.method},
    }


def _mc_layer(cfg: RunConfig, t_grid):
    from .quantum_sim import ThermalFock, run_trajectories

    res = run_trajectories(cfg.params, ThermalFock(cfg.sim.initial_n_mean), t_grid, cfg.sim.n_traj, cfg.sim.seed,
                           cfg.sim.n_max, cfg.sim.ld_order, cfg.sim.recoil_model)
    return {
        "columns": ("t", "n_mean", "n_stderr", "pop_g", "pop_r", "pop_e"),
        "rows": list(res.rows()),
        "n_mean": res.n_mean,
        "final_pn": res.final_pn,
        "ground": res.final_pn.p[0],
        "meta": {"seed": res.seed, "n_traj": res.n_traj, "mean_jumps": float(res.n_jumps.mean())},
    }


def cmd_cool(cfg: RunConfig) -> int:
    from .quantum_sim import fit_cooling

    if cfg.layer not in ("rate", "master", "mc"):
        raise ConfigError("cool runs layer rate, master or mc")
    _echo_warnings(cfg)
    t_grid = cfg.sim.t_grid()
    runner = {"rate": _rate_layer, "master": _master_layer, "mc": _mc_layer}[cfg.layer]
    out = runner(cfg, t_grid)
    path = _out_path(cfg, f"cool_{cfg.layer}.csv")
    ext = ".csv" if cfg.output.format == "csv" else ".json"
    io.write_table(path, out["columns"], out["rows"], cfg.output.format)
    pn_path = _suffixed(path, "_pn", ext)
    io.write_table(pn_path, ("n", "p_final"), enumerate(out["final_pn"].p), cfg.output.format)

    fit = fit_cooling(t_grid, out["n_mean"]) if t_grid.size >= 5 else None
    try:
        n_s_pred = steady_state_mean_n(cfg.params)
        w_pred = cooling_rate(cfg.params)
    except (DivergentSteadyStateError, NoCoolingError, ParameterError) as exc:
        n_s_pred = w_pred = math.nan
        print(f"rate-equation prediction unavailable: {exc}", file=sys.stderr)
    print(f"final <n> = {out['n_mean'][-1]:.6g}   P(0) = {out['ground']:.6g}")
    if fit is not None:
        print(f"{'':12s}{'fit':>14s}{'rate eq.':>14s}")
        print(f"{'W':12s}{fit.w_fit:14.6g}{w_pred:14.6g}")
        print(f"{'n_s':12s}{fit.n_s_fit:14.6g}{n_s_pred:14.6g}")
        if not fit.converged:
            print(f"warning: fit not converged ({fit.message})", file=sys.stderr)
    meta = {
        "layer": cfg.layer,
        "config": cfg.to_dict(),
        "final_n_mean": float(out["n_mean"][-1]),
        "final_ground_population": float(out["ground"]),
        "rate_prediction": {"w": w_pred, "n_s": n_s_pred},
        "fit": None if fit is None else fit._asdict(),
        **out.get("meta", {}),
    }
    io.write_sidecar(_suffixed(path, "", ".json") if ext == ".csv" else _suffixed(path, "_meta", ".json"), meta)
    print(f"wrote {path} and {pn_path}")
    return EXIT_OK


def _ratio_text(x: float) -> str:
    frac = Fraction(x).limit_denominator(1000)
    if abs(float(frac) - x) <= 1e-12 * max(1.0, abs(x)):
        return f"{frac.numerator}/{frac.denominator} = {x:.6g}"
    return f"{x:.6g}"


def cmd_compare_sc(cfg: RunConfig, alpha: float, phi: float) -> int:
    p = cfg.params
    ratio = eit_vs_sc_ratio(alpha, phi)
    a_eit = rate_coefficients(p)
    n_eit = steady_state_mean_n(p)
    identity = steady_state_from_coefficients(a_eit)
    gamma_sc, omega_sc = matched_sc_parameters(p)
    a_sc = sc_rate_coefficients(p, gamma_sc, omega_sc, phi, alpha)
    n_sc = steady_state_from_coefficients(a_sc)
    rel = abs(identity - n_eit) / n_eit
    lines = [
        f"alpha = {alpha:g}, phi = {math.degrees(phi):.6g} deg (cos^2 phi = {math.cos(phi) ** 2:.6g})",
        f"EIT:  A+ = {a_eit.a_plus:.6e}  A- = {a_eit.a_minus:.6e}  n_s = {n_eit:.6g}",
        f"SC:   gamma_sc = {gamma_sc:.6g}  omega_sc = {omega_sc:.6g}",
        f"SC:   A+ = {a_sc.a_plus:.6e}  A- = {a_sc.a_minus:.6e}  n_s = {n_sc:.6g}",
        f"n_s(EIT)/n_s(SC) at these parameters = {n_eit / n_sc:.6g}",
        f"n_s(EIT)/n_s(SC) for gamma_sc << nu = {_ratio_text(ratio)}",
        f"closed form vs A+/(A- - A+): relative difference {rel:.2e} ({'ok' if rel < 1e-10 else 'MISMATCH'})",
    ]
    print("\n".join(lines))
    if cfg.output.path:
        payload = {
            "alpha": alpha, "phi": phi, "ratio_limit": ratio, "ratio_at_params": n_eit / n_sc,
            "a_plus": a_eit.a_plus, "a_minus": a_eit.a_minus, "n_s_eit": n_eit,
            "a_plus_sc": a_sc.a_plus, "a_minus_sc": a_sc.a_minus, "n_s_sc": n_sc,
            "gamma_sc": gamma_sc, "omega_sc": omega_sc, "identity_rel_diff": rel,
        }
        if cfg.output.format == "json":
            io.write_sidecar(cfg.output.path, payload)
        else:
            io.write_csv(cfg.output.path, list(payload), [list(payload.values())])
    return EXIT_OK if rel < 1e-10 else EXIT_PHYSICS


def cmd_validate(cfg: RunConfig) -> int:
    warnings = validate(cfg.params, cfg.sim.initial_n_mean)
    for w in warnings:
        print(f"warning: {w}")
    if not warnings:
        print("parameters inside the rate-equation validity domain")
    return EXIT_OK


def _common_parser(suppress: bool) -> argparse.ArgumentParser:
    kw = {"argument_default": argparse.SUPPRESS} if suppress else {}
    common = argparse.ArgumentParser(add_help=False, **kw)
    common.add_argument("--config", metavar="PATH", help="JSON run configuration or parameter file")
    common.add_argument("--set", metavar="KEY=VALUE", action="append", dest="overrides",
                        help="override a config entry (repeatable; wins over --config)")
    common.add_argument("--output", metavar="PATH", help="output data file")
    common.add_argument("--format", choices=("csv", "json"), help="output format")
    common.add_argument("--seed", type=int, help="master seed for Monte Carlo runs")
    common.add_argument("-v", "--verbose", action="store_true")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eitcool",
        description="EIT ground-state cooling of a trapped Lambda atom: spectra, rate equations, full quantum runs.",
        parents=[_common_parser(False)],
    )
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common_parser(True)
    sub.add_parser("spectrum", parents=[common], help="scan the absorption profile vs delta_g")
    sub.add_parser("rate-sweep", parents=[common], help="sweep the rate-equation limit over one parameter")
    cool = sub.add_parser("cool", parents=[common], help="run a cooling simulation")
    cool.add_argument("--layer", choices=("rate", "master", "mc"))
    sc = sub.add_parser("compare-sc", parents=[common], help="compare with two-level sideband cooling")
    sc.add_argument("--alpha", type=float, default=None, help="emission second moment (default: params.alpha)")
    group = sc.add_mutually_exclusive_group()
    group.add_argument("--phi-deg", type=float, help="angle between beam and motional axis in degrees")
    group.add_argument("--cos2-phi", type=float, help="cos^2 of that angle")
    sub.add_parser("validate", parents=[common], help="check rate-equation validity conditions")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    overrides = list(args.overrides or [])
    if args.output is not None:
        overrides.append(f"output.path={args.output}")
    if args.format is not None:
        overrides.append(f"output.format={args.format}")
    if args.seed is not None:
        overrides.append(f"sim.seed={args.seed}")
    if getattr(args, "layer", None):
        overrides.append(f"layer={args.layer}")
    try:
        cfg = load_config(args.config, overrides)
        if args.command == "spectrum":
            return cmd_spectrum(cfg)
        if args.command == "rate-sweep":
            return cmd_rate_sweep(cfg)
        if args.command == "cool":
            return cmd_cool(cfg)
        if args.command == "compare-sc":
            alpha = cfg.params.alpha if args.alpha is None else args.alpha
            if args.cos2_phi is not None:
                if not 0 <= args.cos2_phi <= 1:
                    raise ConfigError("--cos2-phi must lie in [0, 1]")
                phi = math.acos(math.sqrt(args.cos2_phi))
            else:
                phi = math.radians(args.phi_deg or 0.0)
            return cmd_compare_sc(cfg, alpha, phi)
        return cmd_validate(cfg)
    except (ConfigError, ParameterError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except TruncationError as exc:
        print(f"truncation error: {exc}", file=sys.stderr)
        return EXIT_TRUNCATION
    except (DivergentSteadyStateError, NoCoolingError, ArithmeticError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PHYSICS


if __name__ == "__main__":
    sys.exit(main())
