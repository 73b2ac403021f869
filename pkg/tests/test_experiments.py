import csv
import json
from dataclasses import replace

import numpy as np
import pytest

import hughes1d.experiments as experiments
from hughes1d import (
    ExperimentConfig,
    load_config,
    parse_alpha_range,
    run_convergence,
    run_single,
    run_sweep,
)

SYMMETRIC = ((-0.45, 0.45, 0.8),)
OFFSET = ((-0.9, 0.1, 0.8),)


def make_cfg(tmp_path, **overrides):
    base = dict(
        pieces=SYMMETRIC,
        n=12,
        engine="event",
        alpha=1.0,
        sample_dt=0.25,
        out_dir=tmp_path / "out",
        figures=False,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def test_parse_alpha_range():
    assert parse_alpha_range("0:2:0.5") == (0.0, 2.0, 0.5)
    for bad in ("0:2", "a:b:c", "0:2:0", "3:1:0.5"):
        with pytest.raises(ValueError):
            parse_alpha_range(bad)


def test_alpha_grid_endpoints(tmp_path):
    cfg = make_cfg(tmp_path, alpha_range=(0.0, 2.0, 0.5))
    assert cfg.alphas() == [0.0, 0.5, 1.0, 1.5, 2.0]
    wide = make_cfg(tmp_path, alpha_range=(0.0, 20.0, 0.1))
    grid = wide.alphas()
    assert len(grid) == 201
    assert grid[0] == 0.0
    assert grid[-1] == pytest.approx(20.0, abs=1e-9)
    assert np.all(np.diff(grid) > 0)
    assert make_cfg(tmp_path, alpha=0.7).alphas() == [0.7]


def test_validate_rejects_bad_configs(tmp_path):
    with pytest.raises(ValueError):
        make_cfg(tmp_path, engine="magic").validate()
    with pytest.raises(ValueError):
        make_cfg(tmp_path, n=0).validate()
    with pytest.raises(ValueError):
        make_cfg(tmp_path, alpha=-1.0).validate()
    with pytest.raises(ValueError):
        make_cfg(tmp_path, pieces=((0.5, 0.4, 0.1),)).validate()


def test_validate_enforces_the_step_bound(tmp_path):
    cfg = make_cfg(tmp_path, engine="discrete", dt=1.0)
    with pytest.raises(ValueError) as err:
        cfg.validate()
    assert "allow-cfl-violation" in str(err.value)
    replace(cfg, allow_cfl_violation=True).validate()
    replace(cfg, dt=None).validate()
    replace(cfg, dt=cfg.cfl_bound()).validate()


def test_load_config_round_trip(tmp_path):
    path = tmp_path / "cfg.ini"
    path.write_text(
        "[model]\nv_max = 1.0\nrho_max = 1.0\n"
        "[datum]\npieces = -1:-0.5:0.9, -0.4:0:0.9\n"
        "[run]\nengine = discrete\nn = 50\nalpha = 1.3  # sweet spot\n"
        "sample_dt = 0.1\nout_dir = {}\nfigures = no\n"
        "[sweep]\nalpha_range = 0:2:0.5\nworkers = 2\n"
        "[convergence]\nn_list = 25, 50\nt_sample = 0.5\n".format(tmp_path / "runs")
    )
    cfg = load_config(path)
    assert cfg.pieces == ((-1.0, -0.5, 0.9), (-0.4, 0.0, 0.9))
    assert cfg.engine == "discrete"
    assert cfg.n == 50
    assert cfg.alpha == 1.3
    assert cfg.sample_dt == 0.1
    assert cfg.alpha_range == (0.0, 2.0, 0.5)
    assert cfg.workers == 2
    assert cfg.n_list == (25, 50)
    assert cfg.figures is False
    cfg.validate()
    with pytest.raises(FileNotFoundError):
        load_config(tmp_path / "missing.ini")
    bad = tmp_path / "bad.ini"
    bad.write_text("[run]\nn = 5\n")
    with pytest.raises(ValueError):
        load_config(bad)


def test_reference_step_bound(tmp_path):
    cfg = make_cfg(tmp_path, pieces=((-1.0, -0.5, 0.9), (-0.4, 0.0, 0.9)), n=200)
    assert cfg.cfl_bound() == 0.00405


def test_run_single_writes_the_artifact_set(tmp_path):
    cfg = make_cfg(tmp_path)
    result, summary = run_single(cfg)
    out = tmp_path / "out"
    for name in ("trajectories.csv", "turning.csv", "density.csv", "events.csv",
                 "summary.json", "schema.json"):
        assert (out / name).is_file(), name
    header, rows = read_csv(out / "trajectories.csv")
    assert header == ["t"] + [f"x_{i}" for i in range(13)]
    assert len(rows) == len(result.times)
    t_header, t_rows = read_csv(out / "turning.csv")
    assert t_header == ["t", "zeta", "xi_discrete"]
    assert len(t_rows) == len(rows)
    for key in ("engine", "n", "alpha", "ell", "evacuation_time",
                "evacuation_time_resolution", "exit_count", "switch_count",
                "min_gap", "n_steps", "dt", "cfl_dt", "total_mass"):
        assert key in summary, key
    assert summary["engine"] == "event"
    assert summary["n"] == 12
    assert summary["evacuation_time"] == result.evacuation_time
    on_disk = json.loads((out / "summary.json").read_text())
    assert on_disk == json.loads(json.dumps(summary))
    schema = json.loads((out / "schema.json").read_text())
    assert "trajectories.csv" in schema


def test_run_single_is_byte_identical_across_reruns(tmp_path):
    first = make_cfg(tmp_path, out_dir=tmp_path / "a")
    second = make_cfg(tmp_path, out_dir=tmp_path / "b")
    run_single(first)
    run_single(second)
    for name in ("trajectories.csv", "turning.csv", "density.csv", "events.csv",
                 "summary.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_run_single_without_crowd_weight_has_zero_turning_columns(tmp_path):
    cfg = make_cfg(tmp_path, engine="discrete", alpha=0.0, n=10, sample_dt=0.2)
    run_single(cfg)
    _, rows = read_csv(tmp_path / "out" / "turning.csv")
    assert rows
    for row in rows:
        assert row[1] == "0"
        assert row[2] == "0"


def test_run_single_mirror_symmetry_in_the_emitted_rows(tmp_path):
    # n = 13 places an even number of walkers, so none starts on the axis
    # where the direction tiebreak would push it to one door
    cfg = make_cfg(tmp_path, n=13)
    run_single(cfg)
    _, rows = read_csv(tmp_path / "out" / "trajectories.csv")
    for row in rows:
        xs = [float(cell) for cell in row[1:]]
        for left, right in zip(xs, reversed(xs)):
            assert left == -right


def test_run_single_renders_figures_when_asked(tmp_path):
    cfg = make_cfg(tmp_path, figures=True)
    run_single(cfg)
    for name in ("paths.png", "density.png"):
        path = tmp_path / "out" / name
        assert path.is_file()
        assert path.stat().st_size > 0


def test_sweep_single_point_matches_run_single(tmp_path):
    cfg = make_cfg(tmp_path, engine="discrete", alpha=0.0, n=10,
                   alpha_range=(0.0, 0.0, 0.1), out_dir=tmp_path / "sweep")
    sweep = run_sweep(cfg)
    assert len(sweep.rows) == 1
    _, summary = run_single(replace(cfg, out_dir=tmp_path / "single"))
    assert sweep.rows[0].alpha == 0.0
    assert sweep.rows[0].evacuation_time == summary["evacuation_time"]
    assert sweep.rows[0].error is None


def test_sweep_rows_files_and_pool_consistency(tmp_path):
    serial_cfg = make_cfg(tmp_path, engine="discrete", n=10,
                          alpha_range=(0.0, 0.4, 0.2), out_dir=tmp_path / "serial")
    serial = run_sweep(serial_cfg)
    assert [r.alpha for r in serial.rows] == pytest.approx([0.0, 0.2, 0.4])
    header, rows = read_csv(tmp_path / "serial" / "sweep.csv")
    assert header == ["alpha", "evacuation_time", "exit_count", "switch_count", "min_gap"]
    assert len(rows) == 3
    payload = json.loads((tmp_path / "serial" / "jumps.json").read_text())
    assert payload["threshold"] == serial.threshold
    assert payload["failures"] == []
    pooled_cfg = replace(serial_cfg, workers=2, out_dir=tmp_path / "pooled")
    pooled = run_sweep(pooled_cfg)
    assert pooled.rows == serial.rows
    assert (tmp_path / "pooled" / "sweep.csv").read_bytes() == (
        tmp_path / "serial" / "sweep.csv"
    ).read_bytes()


def test_sweep_requires_a_grid_and_records_row_failures(tmp_path, monkeypatch):
    cfg = make_cfg(tmp_path, engine="discrete", n=10)
    with pytest.raises(ValueError):
        run_sweep(cfg)
    real = experiments.run_fully_discrete

    def flaky(positions, ell, alpha, *args, **kwargs):
        if abs(alpha - 0.2) < 1e-12:
            raise RuntimeError("injected failure")
        return real(positions, ell, alpha, *args, **kwargs)

    monkeypatch.setattr(experiments, "run_fully_discrete", flaky)
    sweep = run_sweep(replace(cfg, alpha_range=(0.0, 0.4, 0.2)))
    assert len(sweep.rows) == 3
    assert sweep.rows[1].error == "RuntimeError: injected failure"
    assert sweep.rows[1].evacuation_time is None
    assert len(sweep.failures) == 1
    assert sweep.failures[0]["alpha"] == pytest.approx(0.2)
    _, rows = read_csv(tmp_path / "out" / "sweep.csv")
    assert rows[1][1] == ""
    payload = json.loads((tmp_path / "out" / "jumps.json").read_text())
    assert len(payload["failures"]) == 1


def test_convergence_rows_bounds_and_reference_column(tmp_path):
    cfg = make_cfg(tmp_path, engine="discrete", n_list=(50, 25), sample_dt=0.05)
    rows = run_convergence(cfg)
    assert [r.n for r in rows] == [25, 50]
    for row in rows:
        assert row.max_xi_zeta_gap <= row.xi_zeta_bound + 1e-12
        assert row.l1_to_reference is not None
    assert rows[1].l1_to_reference < rows[0].l1_to_reference
    header, emitted = read_csv(tmp_path / "out" / "convergence.csv")
    assert header == ["n", "ell", "max_xi_zeta_gap", "xi_zeta_bound", "l1_to_reference"]
    assert len(emitted) == 2


def test_convergence_without_crowd_weight_has_zero_gap(tmp_path):
    cfg = make_cfg(tmp_path, engine="discrete", alpha=0.0, n_list=(25,))
    rows = run_convergence(cfg)
    assert rows[0].max_xi_zeta_gap == 0.0
    assert rows[0].xi_zeta_bound == 0.0


def test_convergence_skips_reference_for_asymmetric_data(tmp_path):
    cfg = make_cfg(tmp_path, engine="discrete", pieces=OFFSET, n_list=(25,))
    rows = run_convergence(cfg)
    assert rows[0].l1_to_reference is None
    _, emitted = read_csv(tmp_path / "out" / "convergence.csv")
    assert emitted[0][-1] == ""
