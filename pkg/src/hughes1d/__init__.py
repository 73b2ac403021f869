"""Two-exit corridor evacuation via a deterministic many-particle scheme.

The package simulates pedestrians leaving the interval (-1, 1) through
either end.  Each walker moves toward the exit that minimises a cost
combining distance and the congestion integrated along the way; the
split point between left-going and right-going walkers is recomputed
from the particle positions as the crowd thins out.

Layers, bottom up: models (speed law and cost), datum (piecewise
constant initial data and its exact atomization), turning (the split
point solvers), dynamics (event-driven and fully discrete engines),
observables (density, total variation, transport distance, exact
references), experiments and cli (file emitting drivers).
"""

from .config import ExperimentConfig, load_config, parse_alpha_range
from .datum import InitialDatum, ParticleInit, atomize, datum_mass
from .dynamics import (
    CFLWarning,
    DiscreteState,
    EventLog,
    ExitEvent,
    ParticleSystem,
    RunResult,
    SwitchEvent,
    cfl_time_step,
    run_event_driven,
    run_fully_discrete,
    run_to_evacuation,
    step_event_driven,
    step_fully_discrete,
)
from .experiments import (
    ConvergenceRow,
    SweepResult,
    SweepRow,
    run_convergence,
    run_single,
    run_sweep,
)
from .models import (
    AssumptionReport,
    CostModel,
    ModelConfig,
    VelocityModel,
    validate_assumptions,
)
from .observables import (
    DensityProfile,
    PiecewiseLinearDensity,
    PseudoInverse,
    block_reference,
    datum_profile,
    density_from_particles,
    l1_distance,
    lwr_reference,
    total_variation,
    wasserstein1,
    windowed_mass_drift,
)
from .turning import (
    CostProfile,
    TurningState,
    build_Z,
    solve_xi,
    solve_xi_discrete,
    solve_zeta,
    turning_state,
)

__version__ = "0.1.0"

__all__ = [
    "AssumptionReport",
    "CFLWarning",
    "CostModel",
    "CostProfile",
    "ConvergenceRow",
    "DensityProfile",
    "DiscreteState",
    "EventLog",
    "ExitEvent",
    "ExperimentConfig",
    "InitialDatum",
    "ModelConfig",
    "ParticleInit",
    "ParticleSystem",
    "PiecewiseLinearDensity",
    "PseudoInverse",
    "RunResult",
    "SweepResult",
    "SweepRow",
    "SwitchEvent",
    "TurningState",
    "VelocityModel",
    "atomize",
    "block_reference",
    "build_Z",
    "cfl_time_step",
    "datum_mass",
    "datum_profile",
    "density_from_particles",
    "l1_distance",
    "load_config",
    "lwr_reference",
    "parse_alpha_range",
    "run_convergence",
    "run_event_driven",
    "run_fully_discrete",
    "run_single",
    "run_sweep",
    "run_to_evacuation",
    "solve_xi",
    "solve_xi_discrete",
    "solve_zeta",
    "step_event_driven",
    "step_fully_discrete",
    "total_variation",
    "turning_state",
    "validate_assumptions",
    "wasserstein1",
    "windowed_mass_drift",
]
