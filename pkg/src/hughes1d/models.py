"""Velocity and cost models for the two-exit corridor.

The crowd moves in the corridor (-1, 1) with a density-dependent speed
``v(rho)``.  The default profile is the affine one,

    v(rho) = v_max * (1 - rho / rho_max),

for which the flux ``f(rho) = rho * v(rho)`` is strictly concave with a
unique critical density ``rho_max / 2``.  Custom decreasing profiles are
accepted as callables and can be screened with :func:`validate_assumptions`,
which checks on a uniform grid that

* v is strictly decreasing with v(0) = v_max and v(rho_max) = 0,
* the flux rho * v(rho) is strictly concave,
* rho * v'(rho) is non-increasing (a damping condition used by the
  sharp particle dynamics).

The walking cost per unit length at density rho is ``1 + alpha * rho``;
``alpha >= 0`` weighs how strongly pedestrians avoid crowded stretches
when choosing an exit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class VelocityModel:
    """Density-speed law on [0, rho_max].

    With ``v_func=None`` the affine law v_max*(1 - rho/rho_max) is used.
    A custom ``v_func`` must be defined on [0, rho_max].
    """

    v_max: float = 1.0
    rho_max: float = 1.0
    v_func: Callable[[float], float] | None = None

    def __post_init__(self):
        if not (self.v_max > 0.0):
            raise ValueError(f"v_max must be positive, got {self.v_max}")
        if not (self.rho_max > 0.0):
            raise ValueError(f"rho_max must be positive, got {self.rho_max}")

    @property
    def affine(self) -> bool:
        return self.v_func is None

    def v(self, rho):
        """Speed at density rho in [0, rho_max]."""
        rho = np.asarray(rho, dtype=float)
        if np.any(rho < 0.0) or np.any(rho > self.rho_max):
            raise ValueError("density outside [0, rho_max]")
        if self.v_func is None:
            out = self.v_max * (1.0 - rho / self.rho_max)
        else:
            out = np.vectorize(self.v_func, otypes=[float])(rho)
        return out if out.ndim else float(out)

    def v_plus(self, rho):
        """Speed clamped to be non-negative, defined for any rho >= 0.

        Densities at or above rho_max give speed zero, so a particle with a
        vanishing gap to its neighbour stops instead of reversing.
        """
        rho = np.asarray(rho, dtype=float)
        if np.any(rho < 0.0):
            raise ValueError("density must be non-negative")
        clipped = np.minimum(rho, self.rho_max)
        out = np.where(rho >= self.rho_max, 0.0, np.maximum(self.v(clipped), 0.0))
        return out if out.ndim else float(out)

    def flux(self, rho):
        """f(rho) = rho * v(rho)."""
        rho = np.asarray(rho, dtype=float)
        out = rho * self.v(rho)
        return out if out.ndim else float(out)

    def flux_prime(self, rho):
        """Derivative of the flux; closed form for the affine law only."""
        if self.v_func is not None:
            raise NotImplementedError("flux_prime is available for the affine law only")
        rho = np.asarray(rho, dtype=float)
        out = self.v_max * (1.0 - 2.0 * rho / self.rho_max)
        return out if out.ndim else float(out)

    def critical_density(self, grid_points: int = 2001) -> float:
        """Maximiser of the flux: rho_max/2 for the affine law, else a grid argmax."""
        if self.v_func is None:
            return 0.5 * self.rho_max
        grid = np.linspace(0.0, self.rho_max, grid_points)
        return float(grid[np.argmax(self.flux(grid))])


@dataclass(frozen=True)
class CostModel:
    """Linear walking cost 1 + alpha*rho per unit length."""

    alpha: float = 1.0

    def __post_init__(self):
        if self.alpha < 0.0:
            raise ValueError(f"alpha must be non-negative, got {self.alpha}")

    def cost(self, rho):
        return 1.0 + self.alpha * np.asarray(rho, dtype=float)


@dataclass(frozen=True)
class ModelConfig:
    """A velocity law paired with a cost slope; the full model parameterisation."""

    velocity: VelocityModel = field(default_factory=VelocityModel)
    cost: CostModel = field(default_factory=CostModel)

    @property
    def alpha(self) -> float:
        return self.cost.alpha

    @property
    def v_max(self) -> float:
        return self.velocity.v_max

    @property
    def rho_max(self) -> float:
        return self.velocity.rho_max


@dataclass(frozen=True)
class AssumptionReport:
    """Outcome of the structural checks on a velocity model."""

    endpoints_ok: bool
    decreasing_ok: bool
    concave_flux_ok: bool
    damping_ok: bool
    worst_endpoint_error: float
    worst_increase: float
    worst_convexity: float
    worst_damping_increase: float
    grid_points: int

    @property
    def all_ok(self) -> bool:
        return (self.endpoints_ok and self.decreasing_ok
                and self.concave_flux_ok and self.damping_ok)


def validate_assumptions(model: VelocityModel, grid_points: int = 1001,
                         tol: float = 1e-9) -> AssumptionReport:
    """Check the structural assumptions on ``model`` by finite differences.

    All sign conditions are evaluated on a uniform grid of ``grid_points``
    nodes over [0, rho_max] and judged against ``tol``: a quantity that must
    be strictly negative passes if it stays below ``tol``.
    """
    grid = np.linspace(0.0, model.rho_max, grid_points)
    v = np.asarray(model.v(grid), dtype=float)
    scale = model.v_max

    endpoint_err = max(abs(v[0] - model.v_max), abs(v[-1])) / scale
    endpoints_ok = endpoint_err <= tol

    # strict decrease: forward differences of v must be negative
    dv = np.diff(v)
    worst_increase = float(dv.max()) / scale if dv.size else 0.0
    decreasing_ok = worst_increase < tol

    # strict concavity of the flux: second differences negative
    f = grid * v
    d2f = f[2:] - 2.0 * f[1:-1] + f[:-2]
    worst_convexity = float(d2f.max()) / scale if d2f.size else 0.0
    concave_flux_ok = worst_convexity < tol

    # damping: rho * v'(rho) non-increasing (central-difference v')
    h = grid[1] - grid[0] if grid_points > 1 else 1.0
    vp = np.gradient(v, h)
    g = grid * vp
    dg = np.diff(g)
    worst_damping = float(dg.max()) / scale if dg.size else 0.0
    damping_ok = worst_damping <= tol

    return AssumptionReport(
        endpoints_ok=endpoints_ok,
        decreasing_ok=decreasing_ok,
        concave_flux_ok=concave_flux_ok,
        damping_ok=damping_ok,
        worst_endpoint_error=endpoint_err,
        worst_increase=worst_increase,
        worst_convexity=worst_convexity,
        worst_damping_increase=worst_damping,
        grid_points=grid_points,
    )
