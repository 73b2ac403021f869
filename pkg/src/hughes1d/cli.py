"""Command line front end.

Subcommands
-----------
run        single evacuation, full artifact set
sweep      one evacuation per alpha grid point, jump detection
converge   refinement study over a list of n
validate   check the model assumptions and the configuration

Every subcommand accepts --config pointing at an INI file (see
hughes1d.config for the format) and a handful of overriding flags.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import (
    ExperimentConfig,
    apply_overrides,
    load_config,
    parse_alpha_range,
)
from .experiments import run_convergence, run_single, run_sweep
from .models import validate_assumptions

__all__ = ["build_parser", "main"]

_DEFAULT_PIECES = ((-0.9, 0.0, 0.9),)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hughes1d",
        description="two-exit corridor evacuation via the deterministic "
        "many-particle scheme",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("run", "single run: trajectories, turning curve, density, events"),
        ("sweep", "evacuation time over an alpha range"),
        ("converge", "refinement study over several particle counts"),
        ("validate", "check model assumptions and the configuration"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", type=Path, help="INI configuration file")
        cmd.add_argument("--out", type=Path, help="output directory")
        cmd.add_argument(
            "--engine",
            choices=("event", "discrete"),
            help="time stepping engine",
        )
        cmd.add_argument("--alpha", type=float, help="cost weight")
        cmd.add_argument(
            "--alpha-range",
            type=parse_alpha_range,
            metavar="START:STOP:STEP",
            help="inclusive alpha grid for sweeps",
        )
        cmd.add_argument("--n", type=int, help="number of gaps (n+1 particles)")
        cmd.add_argument("--dt", type=float, help="time step for the discrete engine")
        cmd.add_argument(
            "--allow-cfl-violation",
            action="store_true",
            default=None,
            help="accept a dt above the stability bound (a warning is still issued)",
        )
        cmd.add_argument(
            "--no-figures",
            action="store_true",
            help="skip PNG rendering, write only delimited output",
        )
    return parser


def _configure(args: argparse.Namespace) -> ExperimentConfig:
    if args.config is not None:
        cfg = load_config(args.config)
    else:
        cfg = ExperimentConfig(pieces=_DEFAULT_PIECES)
    cfg = apply_overrides(
        cfg,
        engine=args.engine,
        alpha=args.alpha,
        alpha_range=args.alpha_range,
        n=args.n,
        dt=args.dt,
        allow_cfl_violation=args.allow_cfl_violation,
        out_dir=args.out,
    )
    if args.no_figures:
        cfg = apply_overrides(cfg, figures=False)
    return cfg


def _cmd_run(cfg: ExperimentConfig) -> int:
    result, summary = run_single(cfg)
    print(f"engine={summary['engine']} n={summary['n']} alpha={summary['alpha']:g}")
    print(
        f"evacuation_time={summary['evacuation_time']:.6f} "
        f"exits={summary['exit_count']} switches={summary['switch_count']}"
    )
    print(f"artifacts in {cfg.out_dir}")
    return 0


def _cmd_sweep(cfg: ExperimentConfig) -> int:
    sweep = run_sweep(cfg)
    good = [r for r in sweep.rows if r.error is None]
    print(f"{len(good)}/{len(sweep.rows)} sweep rows succeeded")
    if good:
        best = min(good, key=lambda r: r.evacuation_time)
        print(f"fastest evacuation {best.evacuation_time:.6f} at alpha={best.alpha:g}")
    for jump in sweep.jumps:
        print(
            f"jump of {jump['delta']:+.4f} between alpha={jump['alpha_left']:g} "
            f"and alpha={jump['alpha_right']:g}"
        )
    print(f"artifacts in {cfg.out_dir}")
    return 0 if not sweep.failures else 1


def _cmd_converge(cfg: ExperimentConfig) -> int:
    rows = run_convergence(cfg)
    for row in rows:
        l1 = "-" if row.l1_to_reference is None else f"{row.l1_to_reference:.6f}"
        print(
            f"n={row.n:5d} max|xi-zeta|={row.max_xi_zeta_gap:.3e} "
            f"bound={row.xi_zeta_bound:.3e} l1={l1}"
        )
    print(f"artifacts in {cfg.out_dir}")
    return 0


def _cmd_validate(cfg: ExperimentConfig) -> int:
    report = validate_assumptions(cfg.model())
    checks = (
        ("endpoints v(0)=v_max, v(rho_max)=0", report.endpoints_ok,
         report.worst_endpoint_error),
        ("v strictly decreasing", report.decreasing_ok, report.worst_increase),
        ("flux strictly concave", report.concave_flux_ok, report.worst_convexity),
        ("rho*v'(rho) non-increasing", report.damping_ok,
         report.worst_damping_increase),
    )
    for label, ok, worst in checks:
        print(f"{'ok  ' if ok else 'FAIL'} {label} (worst {worst:.3e})")
    status = 0 if report.all_ok else 2
    try:
        cfg.validate()
    except ValueError as exc:
        print(f"configuration error: {exc}")
        status = 2
    else:
        print("configuration ok")
        bound = cfg.cfl_bound()
        print(f"stability bound dt <= {bound:.6g} for n={cfg.n}")
    return status


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _configure(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    handler = {
        "run": _cmd_run,
        "sweep": _cmd_sweep,
        "converge": _cmd_converge,
        "validate": _cmd_validate,
    }[args.command]
    try:
        return handler(cfg)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
