"""Experiment drivers: single runs, alpha sweeps, and n-convergence studies.

Every driver writes delimited text outputs (floats at 17 significant
digits, fixed column order, no timestamps) so that re-running a config
produces byte-identical files, plus a schema.json describing the columns.
Figures are rendered alongside the data unless disabled.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .config import ExperimentConfig
from .dynamics import RunResult, run_event_driven, run_fully_discrete
from .observables import (
    DensityProfile,
    block_reference,
    l1_distance,
)
from .turning import solve_xi_discrete, turning_state

__all__ = [
    "ConvergenceRow",
    "SweepResult",
    "SweepRow",
    "run_convergence",
    "run_single",
    "run_sweep",
]

SCHEMA = {
    "trajectories.csv": {
        "columns": "t, x_0 .. x_n",
        "description": "sampled particle positions; one row per sample time",
    },
    "turning.csv": {
        "columns": "t, zeta, xi_discrete",
        "description": "sharp turning point and its counting-form continuous "
        "variant at every sampled time",
    },
    "density.csv": {
        "columns": "t, x, rho",
        "description": "piecewise-constant density; rho holds on [x, next x) "
        "and the last breakpoint of each time carries 0",
    },
    "events.csv": {
        "columns": "time, kind, index, door, new_direction, zeta_before, zeta_after",
        "description": "exit and switch events; door is -1/+1 for exits, "
        "new_direction -1/+1 for switches, other cells empty",
    },
    "summary.json": {
        "description": "scalar run facts: evacuation time and its resolution, "
        "event counts, discretisation parameters",
    },
    "sweep.csv": {
        "columns": "alpha, evacuation_time, exit_count, switch_count, min_gap",
        "description": "one row per alpha grid point; cells empty on row failure",
    },
    "jumps.json": {
        "description": "alpha pairs where the evacuation time jumps by more "
        "than the threshold, plus any per-row failures",
    },
    "convergence.csv": {
        "columns": "n, ell, max_xi_zeta_gap, xi_zeta_bound, l1_to_reference",
        "description": "per-n turning-curve gap against its alpha*ell/2 bound "
        "and, for symmetric block data, the L1 distance to the exact "
        "conservation-law solution at the sample time",
    },
    "float_format": "17 significant digits (%.17g)",
}


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def _write_csv(path: Path, header: list[str], rows) -> None:
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([_fmt(v) for v in row])
    except OSError as exc:
        raise OSError(f"could not write {path}: {exc}") from exc


def _write_json(path: Path, payload) -> None:
    try:
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise OSError(f"could not write {path}: {exc}") from exc


def _prepare_out(cfg: ExperimentConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "schema.json", SCHEMA)
    return out


def _execute(
    cfg: ExperimentConfig,
    positions,
    ell: float,
    alpha: float,
    keep_trajectory: bool = True,
) -> RunResult:
    model = cfg.model()
    if cfg.engine == "event":
        return run_event_driven(
            positions,
            ell,
            alpha,
            model,
            sample_dt=cfg.sample_dt if keep_trajectory else None,
        )
    dt = cfg.dt if cfg.dt is not None else ell / (model.rho_max * model.v_max)
    stride: int | None = 1
    if not keep_trajectory:
        stride = None
    elif cfg.sample_dt:
        stride = max(1, round(cfg.sample_dt / dt))
    return run_fully_discrete(
        positions,
        ell,
        alpha,
        model,
        dt=dt,
        store_stride=stride,
        warn_cfl=not cfg.allow_cfl_violation,
    )


def run_single(cfg: ExperimentConfig) -> tuple[RunResult, dict]:
    """Run one configuration and write the full artifact set."""
    cfg.validate()
    out = _prepare_out(cfg)
    init = cfg.particles()
    result = _execute(cfg, init.positions, init.ell, cfg.alpha)
    n = init.n

    _write_csv(
        out / "trajectories.csv",
        ["t"] + [f"x_{i}" for i in range(n + 1)],
        ([t] + list(row) for t, row in zip(result.times, result.trajectories)),
    )

    turning_rows = []
    for t, row in zip(result.times, result.trajectories):
        state = turning_state(row, init.ell, cfg.alpha)
        xi_d = solve_xi_discrete(row, init.ell, cfg.alpha)
        turning_rows.append([t, state.zeta, xi_d])
    _write_csv(out / "turning.csv", ["t", "zeta", "xi_discrete"], turning_rows)

    def density_rows():
        for t, row in zip(result.times, result.trajectories):
            values = init.ell / np.diff(row)
            for x, rho in zip(row, np.append(values, 0.0)):
                yield [t, x, rho]

    _write_csv(out / "density.csv", ["t", "x", "rho"], density_rows())

    event_rows = [
        [e.time, "exit", e.index, e.door, None, e.zeta_before, e.zeta_after]
        for e in result.log.exits
    ] + [
        [s.time, "switch", s.index, None, s.new_direction, None, None]
        for s in result.log.switches
    ]
    event_rows.sort(key=lambda r: (r[0], r[1], r[2]))
    _write_csv(
        out / "events.csv",
        ["time", "kind", "index", "door", "new_direction", "zeta_before", "zeta_after"],
        event_rows,
    )

    summary = {
        "engine": result.engine,
        "n": n,
        "alpha": cfg.alpha,
        "ell": init.ell,
        "total_mass": n * init.ell,
        "v_max": cfg.v_max,
        "rho_max": cfg.rho_max,
        "dt": result.dt,
        "cfl_dt": result.cfl_dt,
        "evacuation_time": result.evacuation_time,
        "evacuation_time_resolution": result.dt if result.engine == "discrete" else 1e-12,
        "exit_count": len(result.log.exits),
        "switch_count": len(result.log.switches),
        "min_gap": result.min_gap,
        "n_steps": result.n_steps,
    }
    _write_json(out / "summary.json", summary)

    if cfg.figures:
        from . import figures

        figures.particle_paths(result, turning_rows, out / "paths.png")
        figures.density_map(result, out / "density.png")
    return result, summary


@dataclass(frozen=True)
class SweepRow:
    alpha: float
    evacuation_time: float | None
    exit_count: int | None
    switch_count: int | None
    min_gap: float | None
    error: str | None = None


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]
    jumps: tuple[dict, ...]
    threshold: float
    failures: tuple[dict, ...]


def _sweep_worker(args) -> dict:
    positions, ell, alpha, engine, dt, v_max, rho_max, warn_cfl = args
    from .models import VelocityModel

    try:
        model = VelocityModel(v_max=v_max, rho_max=rho_max)
        if engine == "event":
            res = run_event_driven(np.asarray(positions), ell, alpha, model)
        else:
            res = run_fully_discrete(
                np.asarray(positions),
                ell,
                alpha,
                model,
                dt=dt,
                store_stride=None,
                warn_cfl=warn_cfl,
            )
        return {
            "alpha": alpha,
            "evacuation_time": res.evacuation_time,
            "exit_count": len(res.log.exits),
            "switch_count": len(res.log.switches),
            "min_gap": res.min_gap,
        }
    except Exception as exc:  # per-row failures must not kill the sweep
        return {"alpha": alpha, "error": f"{type(exc).__name__}: {exc}"}


def run_sweep(cfg: ExperimentConfig) -> SweepResult:
    """Run one evacuation per alpha grid point and detect time jumps."""
    cfg.validate()
    if cfg.alpha_range is None:
        raise ValueError("sweep needs an alpha range (alpha_range / --alpha-range)")
    out = _prepare_out(cfg)
    init = cfg.particles()
    dt = cfg.dt if cfg.dt is not None else init.ell / (cfg.rho_max * cfg.v_max)
    jobs = [
        (
            tuple(init.positions),
            init.ell,
            alpha,
            cfg.engine,
            dt,
            cfg.v_max,
            cfg.rho_max,
            not cfg.allow_cfl_violation,
        )
        for alpha in cfg.alphas()
    ]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            raw = list(pool.map(_sweep_worker, jobs, chunksize=8))
    else:
        raw = [_sweep_worker(job) for job in jobs]

    rows = tuple(
        SweepRow(
            alpha=r["alpha"],
            evacuation_time=r.get("evacuation_time"),
            exit_count=r.get("exit_count"),
            switch_count=r.get("switch_count"),
            min_gap=r.get("min_gap"),
            error=r.get("error"),
        )
        for r in raw
    )
    jumps = []
    good = [r for r in rows if r.error is None]
    for left, right in zip(good, good[1:]):
        delta = right.evacuation_time - left.evacuation_time
        if abs(delta) > cfg.jump_threshold:
            jumps.append(
                {"alpha_left": left.alpha, "alpha_right": right.alpha, "delta": delta}
            )
    failures = tuple(
        {"alpha": r.alpha, "error": r.error} for r in rows if r.error is not None
    )

    _write_csv(
        out / "sweep.csv",
        ["alpha", "evacuation_time", "exit_count", "switch_count", "min_gap"],
        (
            [r.alpha, r.evacuation_time, r.exit_count, r.switch_count, r.min_gap]
            for r in rows
        ),
    )
    _write_json(
        out / "jumps.json",
        {
            "threshold": cfg.jump_threshold,
            "jumps": jumps,
            "failures": list(failures),
        },
    )
    sweep = SweepResult(
        rows=rows, jumps=tuple(jumps), threshold=cfg.jump_threshold, failures=failures
    )
    if cfg.figures:
        from . import figures

        figures.sweep_curve(sweep, out / "evacuation_time.png")
    return sweep


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    ell: float
    max_xi_zeta_gap: float
    xi_zeta_bound: float
    l1_to_reference: float | None


def _symmetric_block(cfg: ExperimentConfig) -> tuple[float, float] | None:
    """Half-width and value of the datum when it is one block symmetric
    about the origin, else None."""
    if len(cfg.pieces) != 1:
        return None
    a, b, value = cfg.pieces[0]
    if a != -b or b <= 0:
        return None
    return b, value


def run_convergence(cfg: ExperimentConfig) -> list[ConvergenceRow]:
    """Refinement study along cfg.n_list.

    For every n the run is sampled on an eighth of the sample time; the
    largest observed distance between the two turning points is compared
    with its alpha*ell/2 bound.  When the datum is a single symmetric
    block, the right-half particle density at the sample time is also
    measured in L1 against the exact conservation-law solution.
    """
    cfg.validate()
    out = _prepare_out(cfg)
    block = _symmetric_block(cfg)
    rows: list[ConvergenceRow] = []
    for n in sorted(cfg.n_list):
        init = cfg.particles(n)
        sample_dt = cfg.t_sample / 8.0
        sub = ExperimentConfig(**{**asdict(cfg), "n": n, "sample_dt": sample_dt})
        result = _execute(sub, init.positions, init.ell, cfg.alpha)
        gap = 0.0
        for row in result.trajectories:
            state = turning_state(row, init.ell, cfg.alpha)
            gap = max(gap, abs(state.xi - state.zeta))
        l1 = None
        if block is not None:
            half_width, value = block
            k = int(np.argmin(np.abs(result.times - cfg.t_sample)))
            if abs(result.times[k] - cfg.t_sample) > sample_dt:
                raise RuntimeError(
                    f"no sample near t={cfg.t_sample} for n={n}; "
                    "the run ended too early"
                )
            snapshot = result.trajectories[k]
            right = snapshot[snapshot >= 0.0]
            profile = DensityProfile(right.copy(), init.ell)
            reference = block_reference(
                value, 0.0, half_width, float(result.times[k]), cfg.model()
            )
            l1 = l1_distance(profile, reference, (0.0, 1.0))
        rows.append(
            ConvergenceRow(
                n=n,
                ell=init.ell,
                max_xi_zeta_gap=gap,
                xi_zeta_bound=cfg.alpha * init.ell / 2.0,
                l1_to_reference=l1,
            )
        )

    _write_csv(
        out / "convergence.csv",
        ["n", "ell", "max_xi_zeta_gap", "xi_zeta_bound", "l1_to_reference"],
        (
            [r.n, r.ell, r.max_xi_zeta_gap, r.xi_zeta_bound, r.l1_to_reference]
            for r in rows
        ),
    )
    if cfg.figures:
        from . import figures

        figures.convergence_curve(rows, out / "convergence.png")
    return rows
