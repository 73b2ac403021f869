"""Turning-point solvers for the two-exit cost balance.

Each pedestrian walks toward the exit with the lower total cost, where the
cost of reaching a door is the distance to it plus ``alpha`` times the crowd
mass along the way.  With the empirical density of the particle system the
two cost maps are piecewise linear in the position, so the balance point can
be found exactly by scanning breakpoints and solving one linear equation.

Two balance points are provided:

* ``solve_zeta``: the sharp balance point that drives the particle dynamics.
  Its cost maps count only particles strictly inside the corridor and anchor
  the crowd integral at the first such particle on each side.
* ``solve_xi``: the classical balance point whose cost integrals run from
  the doors themselves, picking up partial mass from gaps that straddle a
  door.  The two points never differ by more than ``alpha * ell / 2``.

``solve_xi_discrete`` solves the same equation as ``solve_xi`` in counting
form (cardinalities plus two fractional gap corrections) by bisection.  It
is cheap, robust, and the natural choice for plotting overlays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "CostProfile",
    "TurningState",
    "build_Z",
    "solve_zeta",
    "solve_xi",
    "solve_xi_discrete",
    "turning_state",
]


@dataclass(frozen=True)
class TurningState:
    """Solved turning data for one particle snapshot.

    ``i_zero`` splits the index range: particles with index <= i_zero move
    left, the rest move right.  It satisfies x[i_zero] < zeta <= x[i_zero+1]
    with sentinel values -1 (everyone right) and n (everyone left).
    """

    zeta: float
    xi: float
    i_minus: int | None
    i_plus: int | None
    i_zero: int


@dataclass(frozen=True)
class CostProfile:
    """Piecewise-linear cost-to-door maps on [-1, 1].

    ``xs`` holds the breakpoints (the doors plus every strictly-inside
    particle); ``z_minus``/``z_plus`` the map values there.  Between
    breakpoints both maps are affine because the empirical density is
    constant on each inter-particle gap.
    """

    xs: np.ndarray
    z_minus: np.ndarray
    z_plus: np.ndarray
    positions: np.ndarray
    ell: float
    alpha: float
    i_minus: int | None
    i_plus: int | None

    def __post_init__(self):
        for arr in (self.xs, self.z_minus, self.z_plus, self.positions):
            arr.setflags(write=False)

    def z_minus_at(self, x):
        """Cost of reaching the left door from x."""
        return np.interp(x, self.xs, self.z_minus)

    def z_plus_at(self, x):
        """Cost of reaching the right door from x."""
        return np.interp(x, self.xs, self.z_plus)


def _check_sorted(x: np.ndarray):
    if len(x) > 1 and not np.all(np.diff(x) > 0):
        raise ValueError("particle positions must be strictly increasing")


def build_Z(positions, ell: float, alpha: float) -> CostProfile:
    """Build the cost maps from a particle snapshot.

    Only particles strictly inside (-1, 1) enter the crowd term; a particle
    exactly at a door is already out.  With no particles inside, the maps
    reduce to the plain distances x+1 and 1-x.
    """
    x = np.asarray(positions, dtype=float)
    _check_sorted(x)
    inside = np.flatnonzero((x > -1.0) & (x < 1.0))
    if len(inside) == 0:
        xs = np.array([-1.0, 1.0])
        return CostProfile(
            xs=xs,
            z_minus=xs + 1.0,
            z_plus=1.0 - xs,
            positions=x.copy(),
            ell=ell,
            alpha=alpha,
            i_minus=None,
            i_plus=None,
        )
    i_minus = int(inside[0])
    i_plus = int(inside[-1])
    p = x[i_minus : i_plus + 1]
    m = len(p)
    xs = np.concatenate(([-1.0], p, [1.0]))
    # each gap between consecutive inside particles carries mass ell exactly
    k = np.arange(m)
    z_minus = np.concatenate(([0.0], p + 1.0 + alpha * ell * k, [2.0 + alpha * ell * (m - 1)]))
    z_plus = np.concatenate(
        ([2.0 + alpha * ell * (m - 1)], 1.0 - p + alpha * ell * (m - 1 - k), [0.0])
    )
    return CostProfile(
        xs=xs,
        z_minus=z_minus,
        z_plus=z_plus,
        positions=x.copy(),
        ell=ell,
        alpha=alpha,
        i_minus=i_minus,
        i_plus=i_plus,
    )


def _root_of_increasing_pl(xs: np.ndarray, d: np.ndarray) -> float:
    """Exact root of a strictly increasing piecewise-linear map."""
    hits = np.flatnonzero(d == 0.0)
    if len(hits):
        return float(xs[hits[0]])
    k = int(np.searchsorted(d > 0, True)) - 1
    x0, x1 = xs[k], xs[k + 1]
    d0, d1 = d[k], d[k + 1]
    return float(x0 - d0 * (x1 - x0) / (d1 - d0))


def solve_zeta(profile: CostProfile) -> TurningState:
    """Solve the sharp cost balance and classify the particle split.

    The difference of the two cost maps is strictly increasing (slope at
    least 2), negative at the left door and positive at the right one, so
    the root exists, is unique, and lies strictly inside the corridor.
    """
    if profile.alpha == 0.0:
        # no crowd term: the balance map is 2x, root exactly 0
        zeta = 0.0
    else:
        d = profile.z_minus - profile.z_plus
        zeta = _root_of_increasing_pl(profile.xs, d)
    i_zero = int(np.searchsorted(profile.positions, zeta, side="left")) - 1
    xi = solve_xi(profile.positions, profile.ell, profile.alpha)
    return TurningState(
        zeta=zeta,
        xi=xi,
        i_minus=profile.i_minus,
        i_plus=profile.i_plus,
        i_zero=i_zero,
    )


def turning_state(positions, ell: float, alpha: float) -> TurningState:
    """Convenience wrapper: build the cost maps and solve in one call."""
    return solve_zeta(build_Z(positions, ell, alpha))


def solve_xi(positions, ell: float, alpha: float) -> float:
    """Classical turning point with door-anchored cost integrals.

    The crowd integrals start at the doors, so gaps straddling a door
    contribute the fraction of their mass that lies inside the corridor.
    The balance map is again piecewise linear and solved exactly.
    """
    x = np.asarray(positions, dtype=float)
    _check_sorted(x)
    if alpha == 0.0:
        return 0.0
    inside = np.flatnonzero((x > -1.0) & (x < 1.0))
    xs = np.concatenate(([-1.0], x[inside], [1.0]))
    # cumulative corridor mass at each breakpoint, gap by gap
    cum = np.zeros(len(xs))
    if len(x) > 1:
        lo = np.clip(x[:-1], -1.0, 1.0)
        hi = np.clip(x[1:], -1.0, 1.0)
        dens = ell / (x[1:] - x[:-1])
        for a, b, r in zip(lo, hi, dens):
            if b <= a:
                continue
            seg = np.clip(xs, a, b)
            cum += r * (seg - a)
    # balance map: 2x + alpha * (mass behind minus mass ahead)
    d = 2.0 * xs + alpha * (2.0 * cum - cum[-1])
    return _root_of_increasing_pl(xs, d)


def _corridor_mass_counts(x: np.ndarray, upto: float) -> float:
    """Corridor crowd mass below ``upto`` in units of ell, by counting.

    Counts whole gaps between particles in [-1, upto) and adds fractional
    corrections for the gap containing ``upto`` and the gap straddling the
    left door.
    """
    n_below = int(np.searchsorted(x, upto, side="left"))
    if n_below == 0:
        return 0.0
    n_out_left = int(np.searchsorted(x, -1.0, side="left"))
    if n_out_left == len(x):
        return 0.0
    total = float(n_below - n_out_left - 1)
    if n_below <= len(x) - 1:
        a, b = x[n_below - 1], x[n_below]
        total += (upto - a) / (b - a)
    if 1 <= n_out_left:
        a, b = x[n_out_left - 1], x[n_out_left]
        total += (b + 1.0) / (b - a)
    return total


def solve_xi_discrete(positions, ell: float, alpha: float, tol: float = 1e-13) -> float:
    """Counting-form solve of the classical turning point.

    Solves  xi + alpha*ell*C(xi) = (alpha*ell/2)*C(1)  by bisection, where
    C(u) is the corridor crowd mass below u in units of ell.  The left side
    is strictly increasing, so the root is unique.
    """
    if alpha == 0.0:
        return 0.0
    x = np.asarray(positions, dtype=float)
    _check_sorted(x)
    half_total = 0.5 * _corridor_mass_counts(x, 1.0)

    def g(u: float) -> float:
        return u + alpha * ell * (_corridor_mass_counts(x, u) - half_total)

    lo, hi = -1.0, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if hi - lo <= tol:
            break
        if g(mid) <= 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
