"""Command line interface.

Subcommands: simulate, poincare, lyapunov, energy, sweep, calibrate.
A JSON config file (--config) may carry "params", "integrator" and "sweep"
sections; command line flags override file values. Exit codes: 0 success,
1 usage or config error, 2 I/O error, 3 all sweep cells failed.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__, diagnostics, harness, storage
from .integrator import IntegratorConfig, integrate
from .model import (FIELD_CLASSICAL_FROZEN, FIELD_CLASSICAL_PASSIVE,
                    FIELD_SEMICLASSICAL, ModelParams, SemiclassicalState)
from .stochastic import NoiseStream

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_ALL_FAILED = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_common(p: _Parser):
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--seed", type=int, help="base seed (default 2026)")
    p.add_argument("--workers", type=int, help="worker processes for sweeps")
    p.add_argument("--out-dir", help="output directory")


def _add_params(p: _Parser):
    p.add_argument("--beta", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--g", type=float)
    p.add_argument("--omega", type=float)
    p.add_argument("--phi", type=float)
    p.add_argument("--coupling-sign", type=float, choices=(-1.0, 1.0))
    p.add_argument("--classical", action="store_true",
                   help="classical mode: drop coupling and noise")
    p.add_argument("--spread-mode", choices=("frozen", "passive"))


def _add_integrator(p: _Parser):
    p.add_argument("--total-periods", type=int)
    p.add_argument("--transient-periods", type=int)
    p.add_argument("--steps-per-period", type=int)
    p.add_argument("--record-stride", type=int)
    p.add_argument("--chi-min", type=float)
    p.add_argument("--max-halvings", type=int)


def build_parser() -> _Parser:
    p = _Parser(prog="monduff",
                description="Monitored semiclassical Duffing oscillator toolkit")
    p.add_argument("--version", action="version", version=f"monduff {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("simulate", help="integrate one trajectory")
    _add_common(sp); _add_params(sp); _add_integrator(sp)
    sp.add_argument("--x0", type=float); sp.add_argument("--p0", type=float)
    sp.add_argument("--chi0", type=float); sp.add_argument("--pi0", type=float)
    sp.add_argument("--binary", action="store_true",
                    help="also write the compact binary form")
    sp.add_argument("--emit-potential-grid", metavar="PATH",
                    help="write a potential surface grid CSV and exit")
    sp.add_argument("--emit-force-grid", metavar="PATH",
                    help="write a dissipative force component grid CSV and exit")
    sp.add_argument("--grid-n", type=int, default=101)

    sp = sub.add_parser("poincare", help="stroboscopic section of one trajectory")
    _add_common(sp); _add_params(sp); _add_integrator(sp)
    sp.add_argument("--phase", type=float, default=0.0)

    sp = sub.add_parser("lyapunov", help="largest Lyapunov exponent (common noise)")
    _add_common(sp); _add_params(sp); _add_integrator(sp)
    sp.add_argument("--d0", type=float)
    sp.add_argument("--renorm-period", type=float)

    sp = sub.add_parser("energy", help="energy ledger channels and balance")
    _add_common(sp); _add_params(sp); _add_integrator(sp)

    sp = sub.add_parser("sweep", help="run a (gamma, beta, phi) x seeds grid")
    _add_common(sp); _add_integrator(sp)
    sp.add_argument("--gammas", help="comma separated")
    sp.add_argument("--betas", help="comma separated")
    sp.add_argument("--phis", help="comma separated")
    sp.add_argument("--seeds", type=int)
    sp.add_argument("--g", type=float)
    sp.add_argument("--omega", type=float)
    sp.add_argument("--classical", action="store_true")
    sp.add_argument("--spread-mode", choices=("frozen", "passive"))
    sp.add_argument("--save-trajectories", action="store_true")

    sp = sub.add_parser("calibrate", help="scan g for the classical regime split")
    _add_common(sp); _add_integrator(sp)
    sp.add_argument("--g-min", type=float, default=0.20)
    sp.add_argument("--g-max", type=float, default=0.40)
    sp.add_argument("--g-step", type=float, default=0.02)
    sp.add_argument("--omega", type=float)
    return p


def _load_config(path) -> dict:
    if path is None:
        return {}
    try:
        cfg = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise UsageError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise UsageError("config file must hold a JSON object")
    return cfg


def _merged(section: dict, args, names: dict[str, str]) -> dict:
    out = dict(section)
    for file_key, attr in names.items():
        v = getattr(args, attr, None)
        if v is not None:
            out[file_key] = v
    return out


def _params_from(args, cfg: dict) -> ModelParams:
    d = _merged(cfg.get("params", {}), args, {
        "beta": "beta", "gamma": "gamma", "g": "g", "omega": "omega",
        "phi": "phi", "coupling_sign": "coupling_sign"})
    if "beta" not in d:
        raise UsageError("beta is required (flag --beta or config params.beta)")
    d.setdefault("gamma", 0.0)
    d.setdefault("g", harness.DEFAULT_G)
    d.setdefault("omega", harness.DEFAULT_OMEGA)
    try:
        return ModelParams(**d)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad model parameters: {exc}") from exc


def _config_from(args, cfg: dict, default_total=200) -> IntegratorConfig:
    d = _merged(cfg.get("integrator", {}), args, {
        "total_periods": "total_periods",
        "transient_periods": "transient_periods",
        "steps_per_period": "steps_per_period",
        "record_stride": "record_stride",
        "chi_min": "chi_min", "max_halvings": "max_halvings"})
    d.setdefault("total_periods", default_total)
    try:
        return IntegratorConfig(**d)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad integrator config: {exc}") from exc


def _field_kind(args):
    if getattr(args, "classical", False):
        return (FIELD_CLASSICAL_PASSIVE
                if getattr(args, "spread_mode", None) == "passive"
                else FIELD_CLASSICAL_FROZEN)
    return FIELD_SEMICLASSICAL


def _initial(args, params) -> SemiclassicalState | None:
    keys = ("x0", "p0", "chi0", "pi0")
    vals = [getattr(args, k, None) for k in keys]
    if all(v is None for v in vals):
        return None
    from .model import default_initial_state
    base = default_initial_state(params)
    x0, p0, chi0, pi0 = (v if v is not None else d
                         for v, d in zip(vals, (base.x, base.p, base.chi, base.pi)))
    return SemiclassicalState(t=0.0, x=x0, p=p0, chi=chi0, pi=pi0)


def _out_dir(args) -> Path:
    out = Path(args.out_dir or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _seed(args, cfg) -> int:
    if args.seed is not None:
        return args.seed
    return cfg.get("sweep", {}).get("base_seed", 2026)


def _print_estimate(est):
    print(f"lambda = {est.lam:+.6f} +- {est.standard_error:.6f} "
          f"({est.classification}, n_blocks={est.n_blocks}, "
          f"converged={est.converged})")


def cmd_simulate(args) -> int:
    cfg = _load_config(args.config)
    params = _params_from(args, cfg)
    out = _out_dir(args)
    if args.emit_potential_grid or args.emit_force_grid:
        n = args.grid_n
        if args.emit_potential_grid:
            x_max = 1.6 / params.beta
            chi_max = max(2.5, 1.5 / (math.sqrt(3.0) * params.beta))
            storage.write_potential_grid_csv(
                args.emit_potential_grid, params,
                np.linspace(-x_max, x_max, n),
                np.linspace(0.15, chi_max, n))
            print(f"wrote {args.emit_potential_grid}")
        if args.emit_force_grid:
            storage.write_force_grid_csv(
                args.emit_force_grid,
                np.linspace(0.3, 2.5, n), np.linspace(-2.0, 2.0, n))
            print(f"wrote {args.emit_force_grid}")
        return EXIT_OK
    config = _config_from(args, cfg)
    seed = _seed(args, cfg)
    traj = integrate(_initial(args, params), params, config,
                     stream=NoiseStream(seed), field_kind=_field_kind(args))
    storage.write_trajectory_csv(out / "trajectory.csv", traj)
    if args.binary:
        storage.write_trajectory_binary(out / "trajectory.mdt", traj)
    if traj.status == "ok":
        storage.write_stats_csv(out / "stats.csv",
                                diagnostics.trajectory_stats(traj))
    print(f"status={traj.status} records={len(traj.t)} seed={seed} "
          f"events={len(traj.events)}")
    return EXIT_OK


def cmd_poincare(args) -> int:
    cfg = _load_config(args.config)
    params = _params_from(args, cfg)
    config = _config_from(args, cfg)
    seed = _seed(args, cfg)
    out = _out_dir(args)
    traj = integrate(None, params, config, stream=NoiseStream(seed),
                     field_kind=_field_kind(args))
    if traj.status != "ok":
        print(f"trajectory aborted: {traj.status} at t={traj.fail_time:g}",
              file=sys.stderr)
    section = diagnostics.poincare(traj, params.omega, args.phase)
    storage.write_section_csv(out / "section.csv", section)
    print(f"section points: {len(section.points)} seed={seed}")
    return EXIT_OK


def cmd_lyapunov(args) -> int:
    cfg = _load_config(args.config)
    params = _params_from(args, cfg)
    config = _config_from(args, cfg, default_total=600)
    seed = _seed(args, cfg)
    out = _out_dir(args)
    est = diagnostics.lyapunov(params, config, NoiseStream(seed),
                               d0=args.d0, renorm_period=args.renorm_period,
                               field_kind=_field_kind(args))
    _print_estimate(est)
    storage.write_manifest(out / "lyapunov.json", {
        "lambda": est.lam, "standard_error": est.standard_error,
        "n_blocks": est.n_blocks, "converged": est.converged,
        "classification": est.classification,
        "params": asdict(params), "config": asdict(config), "seed": seed})
    return EXIT_OK


def cmd_energy(args) -> int:
    cfg = _load_config(args.config)
    params = _params_from(args, cfg)
    config = _config_from(args, cfg)
    seed = _seed(args, cfg)
    out = _out_dir(args)
    field = _field_kind(args)
    traj = integrate(None, params, config, stream=NoiseStream(seed),
                     field_kind=field)
    if traj.status != "ok":
        print(f"trajectory aborted: {traj.status} at t={traj.fail_time:g}",
              file=sys.stderr)
    ledger = diagnostics.energy_ledger(traj)
    storage.write_ledger_csv(out / "ledger.csv", ledger)
    means = ledger.means()
    summary = dict(means)
    summary["balance_ratio"] = ledger.balance_ratio()
    summary["seed"] = seed
    storage.write_manifest(out / "energy.json", summary)
    print("channel means (post-transient): "
          + " ".join(f"{k}={v:+.3e}" for k, v in means.items()))
    print(f"balance |dE_g + dE_gamma| / |dE_g| = {summary['balance_ratio']:.3%}")
    return EXIT_OK


def _parse_grid(text, fallback):
    if text is None:
        return tuple(fallback)
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise UsageError(f"bad grid value list: {text}") from exc


def cmd_sweep(args) -> int:
    cfg = _load_config(args.config)
    sweep_cfg = cfg.get("sweep", {})
    config = _config_from(args, cfg, default_total=600)
    try:
        spec = harness.SweepSpec(
            gammas=_parse_grid(args.gammas, sweep_cfg.get("gammas", ())),
            betas=_parse_grid(args.betas, sweep_cfg.get("betas", ())),
            phis=_parse_grid(args.phis, sweep_cfg.get("phis", ())),
            seeds=args.seeds or sweep_cfg.get("seeds", 1),
            config=config,
            base_seed=_seed(args, cfg),
            g=args.g if args.g is not None else sweep_cfg.get("g", harness.DEFAULT_G),
            omega=(args.omega if args.omega is not None
                   else sweep_cfg.get("omega", harness.DEFAULT_OMEGA)),
            classical_mode=args.classical or sweep_cfg.get("classical_mode", False),
            spread_mode=(args.spread_mode or sweep_cfg.get("spread_mode", "frozen")),
            workers=args.workers or sweep_cfg.get("workers", 1),
            save_trajectories=(args.save_trajectories
                               or sweep_cfg.get("save_trajectories", False)),
        )
    except ValueError as exc:
        raise UsageError(f"bad sweep spec: {exc}") from exc
    records = harness.run_sweep(spec, out_dir=args.out_dir or "sweep_out")
    n_ok = sum(1 for r in records if r.status == "ok")
    print(f"{n_ok}/{len(records)} tasks completed "
          f"({len(records) - n_ok} aborted)")
    if n_ok == 0:
        return EXIT_ALL_FAILED
    return EXIT_OK


def cmd_calibrate(args) -> int:
    cfg = _load_config(args.config)
    config = _config_from(args, cfg, default_total=600)
    out = _out_dir(args)
    n = int(round((args.g_max - args.g_min) / args.g_step)) + 1
    g_values = [round(args.g_min + k * args.g_step, 10) for k in range(n)]
    result = harness.calibrate_drive(
        config, g_values=g_values,
        omega=args.omega if args.omega is not None else harness.DEFAULT_OMEGA,
        seed=_seed(args, cfg))
    storage.write_manifest(out / "calibration.json", result)
    for row in result["table"]:
        print(row)
    if result["chosen_g"] is None:
        print("no admissible g found in the scan range", file=sys.stderr)
        return EXIT_USAGE
    print(f"calibrated g = {result['chosen_g']} at omega = {result['omega']}")
    return EXIT_OK


_COMMANDS = {
    "simulate": cmd_simulate,
    "poincare": cmd_poincare,
    "lyapunov": cmd_lyapunov,
    "energy": cmd_energy,
    "sweep": cmd_sweep,
    "calibrate": cmd_calibrate,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
