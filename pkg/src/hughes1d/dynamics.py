"""Time integration of the follow-the-leader evacuation dynamics.

Two interchangeable engines advance the particle system:

* event-driven: integrates the ODE system between door events with a
  classical RK4 step, brackets each exit by bisection, and re-solves the
  turning point at every exit to update walking directions.  This realises
  the exact semi-discrete evolution up to integration tolerances.
* fully discrete: the explicit marching scheme with a shared time step.
  The two extreme particles drift ballistically toward their doors; every
  interior particle re-derives its direction each step from a counting
  inequality, then takes one Euler step at the clamped gap speed.  Under
  the CFL bound dt <= ell/(rho_max*v_max) the scheme preserves particle
  ordering with gaps of at least ell/rho_max.

Both engines record exits, direction switches and the evacuation time in an
EventLog, and sample trajectories on a configurable cadence.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .models import VelocityModel
from .turning import TurningState, build_Z, solve_zeta

__all__ = [
    "CFLWarning",
    "DiscreteState",
    "EventLog",
    "ExitEvent",
    "ParticleSystem",
    "RunResult",
    "SwitchEvent",
    "cfl_time_step",
    "run_event_driven",
    "run_fully_discrete",
    "run_to_evacuation",
    "step_event_driven",
    "step_fully_discrete",
]

EXIT_BAND = 1e-13  # |x| >= 1 - EXIT_BAND counts as having reached a door
EVENT_TOL = 1e-12  # bisection width for event times
SIMULTANEITY_TOL = 1e-10  # exits closer than this count as one event


class CFLWarning(UserWarning):
    """Raised as a warning when the discrete time step exceeds the CFL bound."""


@dataclass(frozen=True)
class ExitEvent:
    time: float
    index: int
    door: int  # -1 for the left door, +1 for the right
    zeta_before: float | None = None
    zeta_after: float | None = None


@dataclass(frozen=True)
class SwitchEvent:
    time: float
    index: int
    new_direction: int  # -1 now walking left, +1 now walking right


@dataclass
class EventLog:
    exits: list[ExitEvent] = field(default_factory=list)
    switches: list[SwitchEvent] = field(default_factory=list)
    evacuation_time: float | None = None

    @property
    def exit_times(self) -> list[float]:
        return sorted({e.time for e in self.exits})


@dataclass
class ParticleSystem:
    """Snapshot of the event-driven integration state."""

    t: float
    x: np.ndarray
    ell: float
    alpha: float
    model: VelocityModel
    i_zero: int

    @property
    def n(self) -> int:
        return len(self.x) - 1


@dataclass(frozen=True)
class DiscreteState:
    """One step of the fully discrete scheme."""

    h: int
    dt: float
    x: np.ndarray

    @property
    def t(self) -> float:
        return self.h * self.dt


@dataclass
class RunResult:
    engine: str
    times: np.ndarray
    trajectories: np.ndarray
    log: EventLog
    ell: float
    alpha: float
    model: VelocityModel
    n_steps: int
    min_gap: float
    dt: float | None = None
    cfl_dt: float | None = None

    @property
    def evacuation_time(self) -> float | None:
        return self.log.evacuation_time

    @property
    def n(self) -> int:
        return self.trajectories.shape[1] - 1


def cfl_time_step(ell: float, model: VelocityModel) -> float:
    """Largest stable step of the discrete scheme, ell/(rho_max*v_max)."""
    return ell / (model.rho_max * model.v_max)


def default_time_cap(n: int, ell: float, r_max: float, v_max: float) -> float:
    """Safety bound on the evacuation time: ten corridor crossings plus
    slack for the at most n direction switches."""
    return 10.0 * (2.0 / v_max + n * ell / (r_max * v_max))


def _gap_speeds(x: np.ndarray, ell: float, model: VelocityModel) -> np.ndarray:
    """Clamped speed through each inter-particle gap."""
    gaps = np.diff(x)
    dens = np.where(gaps > 0.0, ell / np.where(gaps > 0.0, gaps, 1.0), np.inf)
    return model.v_plus(dens)


def _ftl_velocities(x: np.ndarray, i_zero: int, ell: float, model: VelocityModel) -> np.ndarray:
    """Velocity of every particle for a fixed direction split.

    Particles with index <= i_zero walk left at the speed set by their
    backward gap, the rest walk right at their forward-gap speed.  The two
    extreme indices see an empty half-line and move at full speed.
    """
    n = len(x) - 1
    w = _gap_speeds(x, ell, model)
    v = np.empty_like(x)
    if i_zero >= 0:
        v[0] = -model.v_max
        v[1 : i_zero + 1] = -w[:i_zero]
    if i_zero < n:
        v[i_zero + 1 : n] = w[i_zero + 1 : n]
        v[n] = model.v_max
    return v


def _rk4(x: np.ndarray, h: float, i_zero: int, ell: float, model: VelocityModel) -> np.ndarray:
    k1 = _ftl_velocities(x, i_zero, ell, model)
    k2 = _ftl_velocities(x + (0.5 * h) * k1, i_zero, ell, model)
    k3 = _ftl_velocities(x + (0.5 * h) * k2, i_zero, ell, model)
    k4 = _ftl_velocities(x + h * k3, i_zero, ell, model)
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


class _Sampler:
    """Collects trajectory rows at a fixed cadence plus run endpoints."""

    def __init__(self, sample_dt: float | None, t0: float):
        self.sample_dt = sample_dt
        self.times: list[float] = []
        self.rows: list[np.ndarray] = []
        self.next_index = int(np.floor(t0 / sample_dt)) + 1 if sample_dt else 0

    def next_time(self) -> float | None:
        if self.sample_dt is None:
            return None
        return self.next_index * self.sample_dt

    def record(self, t: float, x: np.ndarray):
        if self.times and self.times[-1] == t:
            return
        self.times.append(t)
        self.rows.append(x.copy())

    def on_step(self, t: float, x: np.ndarray):
        target = self.next_time()
        if target is not None and t == target:
            self.record(t, x)
            self.next_index += 1


def run_event_driven(
    positions,
    ell: float,
    alpha: float,
    model: VelocityModel | None = None,
    t_end: float | None = None,
    sample_dt: float | None = None,
    t_cap: float | None = None,
    t0: float = 0.0,
) -> RunResult:
    """Advance the event-driven engine until evacuation or ``t_end``.

    Between events all particles follow the gap-based ODE with directions
    frozen by the current split index.  A particle reaches a door when
    |x| >= 1 - 1e-13; the event time is bisected to 1e-12, the particle is
    snapped onto the door, and the turning point is re-solved on both sides
    of the event to determine which particles (if any) switch direction.
    Exits at both doors within 1e-10 of each other count as simultaneous
    and trigger no switch.
    """
    model = model or VelocityModel()
    x = np.asarray(positions, dtype=float).copy()
    n = len(x) - 1
    if n < 1 or not np.all(np.diff(x) > 0):
        raise ValueError("need at least two strictly increasing positions")
    t = float(t0)
    log = EventLog()
    exited = np.zeros(n + 1, dtype=bool)
    min_gap = float(np.min(np.diff(x)))
    if t_cap is None:
        r0 = float(np.max(ell / np.diff(x)))
        t_cap = default_time_cap(n, ell, r0, model.v_max)

    def flag_exits(record_time: float | None, zeta_pair=(None, None), relaxed=True):
        band = 1.0 - EXIT_BAND
        if relaxed:
            # an event pulls along same-time exits within the simultaneity window
            band -= model.v_max * SIMULTANEITY_TOL
        snap_limit = 1.0 + 16.0 * model.v_max * EVENT_TOL
        newly = np.flatnonzero(~exited & (np.abs(x) >= band))
        for i in newly:
            door = 1 if x[i] > 0 else -1
            if abs(x[i]) <= snap_limit:
                # fresh crossing: normalise the overshoot onto the door;
                # resumed runs hand in walkers already far outside, which
                # must keep their positions to stay ordered
                x[i] = float(door)
            exited[i] = True
            if record_time is not None:
                log.exits.append(
                    ExitEvent(record_time, int(i), door, zeta_pair[0], zeta_pair[1])
                )
        return newly

    # particles already at or beyond a door leave at once; on a resumed
    # run their exits were logged by the earlier segment
    band0 = np.abs(x) >= 1.0 - EXIT_BAND
    if np.any(band0 & ~exited):
        flag_exits(0.0 if t == 0.0 else None, relaxed=False)

    state = solve_zeta(build_Z(x, ell, alpha))
    i_zero = state.i_zero
    directions = np.where(np.arange(n + 1) <= i_zero, -1, 1)

    sampler = _Sampler(sample_dt, t)
    sampler.record(t, x)
    steps = 0

    def crossing(y: np.ndarray) -> bool:
        return bool(np.any(~exited & (np.abs(y) >= 1.0 - EXIT_BAND)))

    while True:
        if np.all(exited):
            log.evacuation_time = t
            break
        if t_end is not None and t >= t_end:
            break
        if t > t_cap:
            raise RuntimeError(
                f"evacuation did not complete before the safety cap t={t_cap:g}"
            )
        s_next = sampler.next_time()
        if s_next is not None and s_next <= t:
            # an event landed on (or a hair past) the cadence point
            sampler.record(t, x)
            sampler.next_index += 1
            continue
        gaps = np.diff(x)
        min_gap = min(min_gap, float(np.min(gaps)))
        doors = 1.0 - np.abs(x[~exited])
        h = min(
            float(np.min(gaps)) / (4.0 * model.v_max),
            max(float(np.min(doors)), 1e-9) / (2.0 * model.v_max),
        )
        target = t_end if t_end is not None else np.inf
        s_next = sampler.next_time()
        if s_next is not None:
            target = min(target, s_next)
        hit_target = t + h >= target
        if hit_target:
            h = target - t
        trial = _rk4(x, h, i_zero, ell, model)
        steps += 1
        if crossing(trial):
            lo, hi, x_lo, x_hi = 0.0, h, x, trial
            while hi - lo > EVENT_TOL:
                mid = 0.5 * (lo + hi)
                x_mid = _rk4(x, mid, i_zero, ell, model)
                if crossing(x_mid):
                    hi, x_hi = mid, x_mid
                else:
                    lo, x_lo = mid, x_mid
            t = t + hi
            x = x_hi
            # the pre-event turning point must still see the crossing
            # particles; at the bracket's low end they are strictly inside
            zeta_pre = solve_zeta(build_Z(x_lo, ell, alpha)).zeta
            flag_exits(t, (zeta_pre, None))
            if len(log.exits) > n + 2:
                raise RuntimeError("more exit events than particles plus two")
            state = solve_zeta(build_Z(x, ell, alpha))
            zeta_post = state.zeta
            for k in range(len(log.exits) - 1, -1, -1):
                if log.exits[k].time == t:
                    log.exits[k] = ExitEvent(
                        t, log.exits[k].index, log.exits[k].door, zeta_pre, zeta_post
                    )
                else:
                    break
            i_zero = state.i_zero
            new_directions = np.where(np.arange(n + 1) <= i_zero, -1, 1)
            flipped = np.flatnonzero(new_directions != directions)
            for i in flipped:
                log.switches.append(SwitchEvent(t, int(i), int(new_directions[i])))
            directions = new_directions
        else:
            t = target if hit_target else t + h
            x = trial
            if np.min(np.diff(x)) <= -1e-12:
                raise RuntimeError("particle ordering violated beyond 1e-12")
            sampler.on_step(t, x)

    sampler.record(t, x)
    min_gap = min(min_gap, float(np.min(np.diff(x))))
    return RunResult(
        engine="event",
        times=np.array(sampler.times),
        trajectories=np.array(sampler.rows),
        log=log,
        ell=ell,
        alpha=alpha,
        model=model,
        n_steps=steps,
        min_gap=min_gap,
    )


def step_event_driven(sys: ParticleSystem, t_end: float) -> tuple[ParticleSystem, EventLog]:
    """Advance a particle system to ``t_end`` (or evacuation) and return the
    new state together with the events encountered on the way."""
    if t_end <= sys.t:
        raise ValueError("t_end must exceed the current time")
    res = run_event_driven(
        sys.x, sys.ell, sys.alpha, sys.model, t_end=t_end, t0=sys.t
    )
    x_new = res.trajectories[-1]
    state = solve_zeta(build_Z(x_new, res.ell, res.alpha))
    out = ParticleSystem(
        t=float(res.times[-1]),
        x=x_new.copy(),
        ell=sys.ell,
        alpha=sys.alpha,
        model=sys.model,
        i_zero=state.i_zero,
    )
    return out, res.log


def _interior_left_mask(x: np.ndarray, ell: float, alpha: float) -> np.ndarray:
    """Direction test for interior particles of the discrete scheme.

    Particle i walks left when 2*x_i < alpha*ell*(N_right - N_left), where
    the counts take in particles strictly between x_i and the doors.  The
    boundary case walks right, and alpha = 0 reduces to the sign of x_i.
    """
    n = len(x) - 1
    idx = np.arange(1, n)
    at_most_left_door = int(np.searchsorted(x, -1.0, side="right"))
    below_right_door = int(np.searchsorted(x, 1.0, side="left"))
    n_left = np.maximum(0, idx - at_most_left_door)
    n_right = np.maximum(0, below_right_door - (idx + 1))
    return 2.0 * x[1:n] < alpha * ell * (n_right - n_left)


def step_fully_discrete(
    state: DiscreteState, ell: float, alpha: float, model: VelocityModel | None = None
) -> DiscreteState:
    """One explicit update of the fully discrete scheme."""
    model = model or VelocityModel()
    x = state.x
    n = len(x) - 1
    w = _gap_speeds(x, ell, model)
    v = np.empty_like(x)
    v[0] = -model.v_max
    if n:
        v[n] = model.v_max
    if n > 1:
        left = _interior_left_mask(x, ell, alpha)
        v[1:n] = np.where(left, -w[: n - 1], w[1:n])
    x_new = x + state.dt * v
    return DiscreteState(h=state.h + 1, dt=state.dt, x=x_new)


def run_fully_discrete(
    positions,
    ell: float,
    alpha: float,
    model: VelocityModel | None = None,
    dt: float | None = None,
    t_end: float | None = None,
    store_stride: int | None = 1,
    t_cap: float | None = None,
    warn_cfl: bool = True,
) -> RunResult:
    """March the fully discrete scheme until every particle is out.

    ``dt`` defaults to the CFL bound.  Evacuation is declared at the first
    step time at which all particles satisfy |x| >= 1, so the reported time
    is exact only up to the step resolution.  Exits and direction flips are
    logged at step times.
    """
    model = model or VelocityModel()
    x = np.asarray(positions, dtype=float).copy()
    n = len(x) - 1
    if n < 1 or not np.all(np.diff(x) > 0):
        raise ValueError("need at least two strictly increasing positions")
    cfl = cfl_time_step(ell, model)
    if dt is None:
        dt = cfl
    if warn_cfl and dt > cfl * (1.0 + 1e-12):
        warnings.warn(
            f"time step {dt:g} exceeds the CFL bound {cfl:g}; "
            "particle ordering is no longer guaranteed",
            CFLWarning,
            stacklevel=2,
        )
    if t_cap is None:
        r0 = float(np.max(ell / np.diff(x)))
        t_cap = default_time_cap(n, ell, r0, model.v_max)
    max_steps = int(np.ceil(t_cap / dt)) + 1

    log = EventLog()
    out = np.abs(x) >= 1.0
    for i in np.flatnonzero(out):
        log.exits.append(ExitEvent(0.0, int(i), 1 if x[i] > 0 else -1))
    prev_left = _interior_left_mask(x, ell, alpha) if n > 1 else np.zeros(0, bool)
    state = DiscreteState(h=0, dt=dt, x=x)
    times = [0.0]
    rows = [x.copy()]
    min_gap = float(np.min(np.diff(x)))

    while not np.all(out):
        if state.h >= max_steps:
            raise RuntimeError(
                f"evacuation did not complete before the safety cap t={t_cap:g}"
            )
        state = step_fully_discrete(state, ell, alpha, model)
        t = state.t
        min_gap = min(min_gap, float(np.min(np.diff(state.x))))
        now_out = np.abs(state.x) >= 1.0
        for i in np.flatnonzero(now_out & ~out):
            log.exits.append(ExitEvent(t, int(i), 1 if state.x[i] > 0 else -1))
        out = now_out
        if n > 1:
            left = _interior_left_mask(state.x, ell, alpha)
            for j in np.flatnonzero(left != prev_left):
                log.switches.append(SwitchEvent(t, int(j) + 1, -1 if left[j] else 1))
            prev_left = left
        if store_stride and state.h % store_stride == 0:
            times.append(t)
            rows.append(state.x.copy())
        if t_end is not None and t >= t_end:
            break
        if np.all(out):
            break

    if np.all(out):
        log.evacuation_time = state.t
    if times[-1] != state.t:
        times.append(state.t)
        rows.append(state.x.copy())
    return RunResult(
        engine="discrete",
        times=np.array(times),
        trajectories=np.array(rows),
        log=log,
        ell=ell,
        alpha=alpha,
        model=model,
        n_steps=state.h,
        min_gap=min_gap,
        dt=dt,
        cfl_dt=cfl,
    )


def run_to_evacuation(
    engine: str,
    init,
    alpha: float,
    model: VelocityModel | None = None,
    ell: float | None = None,
    dt: float | None = None,
    sample_dt: float | None = None,
    store_stride: int | None = 1,
    t_cap: float | None = None,
    warn_cfl: bool = True,
) -> RunResult:
    """Run either engine from an atomised initial condition to evacuation.

    ``init`` is either a ParticleInit or a plain position array (then
    ``ell`` is required).  Raises RuntimeError if the safety time cap is
    reached before the corridor empties.
    """
    positions = getattr(init, "positions", init)
    if ell is None:
        ell = getattr(init, "ell", None)
        if ell is None:
            raise ValueError("ell must be given when init is a bare array")
    if engine == "event":
        return run_event_driven(
            positions, ell, alpha, model, sample_dt=sample_dt, t_cap=t_cap
        )
    if engine == "discrete":
        return run_fully_discrete(
            positions,
            ell,
            alpha,
            model,
            dt=dt,
            store_stride=store_stride,
            t_cap=t_cap,
            warn_cfl=warn_cfl,
        )
    raise ValueError(f"unknown engine {engine!r}; expected 'event' or 'discrete'")
