"""Experiment configuration: INI file parsing, defaults, and validation.

A config file is a flat INI document with typed sections:

    [model]
    v_max = 1.0
    rho_max = 1.0

    [datum]
    pieces = -1:-0.5:0.9, -0.4:0:0.9

    [run]
    engine = discrete
    n = 200
    alpha = 1.3
    dt = 0.00405
    sample_dt = 0.05
    allow_cfl_violation = false

    [sweep]
    alpha_range = 0:20:0.1
    jump_threshold = 0.05
    workers = 1

    [convergence]
    n_list = 25, 50, 100, 200
    t_sample = 0.5

Each datum piece is start:end:value.  Anything omitted falls back to the
defaults above except the datum, which is required.  Command-line flags
override file values before validation.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .datum import InitialDatum, atomize
from .models import VelocityModel

__all__ = ["ExperimentConfig", "apply_overrides", "load_config", "parse_alpha_range"]


def parse_alpha_range(text: str) -> tuple[float, float, float]:
    """Parse 'start:stop:step' into floats."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"expected start:stop:step, got {text!r}")
    start, stop, step = (float(p) for p in parts)
    if step <= 0 or stop < start:
        raise ValueError(f"need stop >= start and step > 0 in {text!r}")
    return start, stop, step


def _parse_pieces(text: str) -> tuple[tuple[float, float, float], ...]:
    pieces = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split(":")
        if len(parts) != 3:
            raise ValueError(f"datum piece must be start:end:value, got {chunk!r}")
        pieces.append(tuple(float(p) for p in parts))
    if not pieces:
        raise ValueError("datum has no pieces")
    return tuple(pieces)


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated description of one experiment family."""

    pieces: tuple[tuple[float, float, float], ...]
    n: int = 200
    engine: str = "discrete"
    alpha: float = 0.0
    dt: float | None = None
    sample_dt: float | None = 0.05
    allow_cfl_violation: bool = False
    v_max: float = 1.0
    rho_max: float = 1.0
    alpha_range: tuple[float, float, float] | None = None
    jump_threshold: float = 0.05
    workers: int = 1
    n_list: tuple[int, ...] = (25, 50, 100, 200)
    t_sample: float = 0.5
    out_dir: Path = field(default_factory=lambda: Path("out"))
    figures: bool = True

    def model(self) -> VelocityModel:
        return VelocityModel(v_max=self.v_max, rho_max=self.rho_max)

    def datum(self) -> InitialDatum:
        return InitialDatum.from_pieces(self.pieces)

    def particles(self, n: int | None = None):
        return atomize(self.datum(), self.n if n is None else n)

    def cfl_bound(self, n: int | None = None) -> float:
        ell = self.particles(n).ell
        return ell / (self.rho_max * self.v_max)

    def alphas(self) -> list[float]:
        if self.alpha_range is None:
            return [self.alpha]
        start, stop, step = self.alpha_range
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        return [start + k * step for k in range(count)]

    def validate(self) -> "ExperimentConfig":
        if self.engine not in ("event", "discrete"):
            raise ValueError(f"engine must be 'event' or 'discrete', got {self.engine!r}")
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if self.alpha < 0:
            raise ValueError("alpha must be non-negative")
        self.datum()  # raises on malformed pieces
        if self.engine == "discrete" and self.dt is not None:
            bound = self.cfl_bound()
            if self.dt > bound * (1.0 + 1e-12) and not self.allow_cfl_violation:
                raise ValueError(
                    f"dt={self.dt:g} exceeds the CFL bound {bound:.17g}; "
                    "pass --allow-cfl-violation to run anyway"
                )
        return self


_DEFAULTS = ExperimentConfig(pieces=((0.0, 0.0, 0.0),))


def load_config(path: str | Path) -> ExperimentConfig:
    """Read an INI config file into an ExperimentConfig (not yet validated)."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    path = Path(path)
    with open(path) as fh:
        parser.read_file(fh)

    if not parser.has_option("datum", "pieces"):
        raise ValueError(f"{path}: [datum] pieces is required")
    kwargs: dict = {"pieces": _parse_pieces(parser.get("datum", "pieces"))}

    if parser.has_section("model"):
        kwargs["v_max"] = parser.getfloat("model", "v_max", fallback=_DEFAULTS.v_max)
        kwargs["rho_max"] = parser.getfloat("model", "rho_max", fallback=_DEFAULTS.rho_max)
    if parser.has_section("run"):
        run = parser["run"]
        kwargs["engine"] = run.get("engine", _DEFAULTS.engine)
        kwargs["n"] = run.getint("n", _DEFAULTS.n)
        kwargs["alpha"] = run.getfloat("alpha", _DEFAULTS.alpha)
        if run.get("dt", None) is not None:
            kwargs["dt"] = run.getfloat("dt")
        if run.get("sample_dt", None) is not None:
            kwargs["sample_dt"] = run.getfloat("sample_dt")
        kwargs["allow_cfl_violation"] = run.getboolean(
            "allow_cfl_violation", _DEFAULTS.allow_cfl_violation
        )
        if run.get("out_dir", None) is not None:
            kwargs["out_dir"] = Path(run.get("out_dir"))
        kwargs["figures"] = run.getboolean("figures", _DEFAULTS.figures)
    if parser.has_section("sweep"):
        sweep = parser["sweep"]
        if sweep.get("alpha_range", None) is not None:
            kwargs["alpha_range"] = parse_alpha_range(sweep.get("alpha_range"))
        kwargs["jump_threshold"] = sweep.getfloat(
            "jump_threshold", _DEFAULTS.jump_threshold
        )
        kwargs["workers"] = sweep.getint("workers", _DEFAULTS.workers)
    if parser.has_section("convergence"):
        conv = parser["convergence"]
        if conv.get("n_list", None) is not None:
            kwargs["n_list"] = tuple(
                int(part) for part in conv.get("n_list").replace(",", " ").split()
            )
        kwargs["t_sample"] = conv.getfloat("t_sample", _DEFAULTS.t_sample)

    return ExperimentConfig(**kwargs)


def apply_overrides(config: ExperimentConfig, **overrides) -> ExperimentConfig:
    """Replace config fields with non-None override values."""
    clean = {k: v for k, v in overrides.items() if v is not None}
    return replace(config, **clean) if clean else config
