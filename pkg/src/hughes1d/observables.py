"""Macroscopic diagnostics reconstructed from particle snapshots.

The empirical density of n+1 particles carries mass ell on each gap, giving
a piecewise-constant profile with total mass n*ell.  This module rebuilds
that profile, measures its total variation and windowed mass, computes the
1-Wasserstein distance between two profiles exactly through their
pseudo-inverse distribution functions, and provides closed-form entropy
solutions of the scalar conservation law (Riemann and single-block data)
for convergence checks against the particle density.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .models import VelocityModel

__all__ = [
    "DensityProfile",
    "PiecewiseLinearDensity",
    "PseudoInverse",
    "block_reference",
    "datum_profile",
    "density_from_particles",
    "l1_distance",
    "lwr_reference",
    "total_variation",
    "wasserstein1",
    "windowed_mass_drift",
]


@dataclass(frozen=True)
class DensityProfile:
    """Piecewise-constant density ell/gap on each [x_i, x_{i+1}), 0 outside."""

    positions: np.ndarray
    ell: float

    def __post_init__(self):
        self.positions.setflags(write=False)

    @property
    def n(self) -> int:
        return max(len(self.positions) - 1, 0)

    @property
    def values(self) -> np.ndarray:
        if self.n == 0:
            return np.zeros(0)
        return self.ell / np.diff(self.positions)

    def mass(self, a: float | None = None, b: float | None = None) -> float:
        """Mass carried in [a, b] (whole line by default)."""
        if self.n == 0:
            return 0.0
        if a is None and b is None:
            return self.n * self.ell
        a = -np.inf if a is None else a
        b = np.inf if b is None else b
        x = self.positions
        lo = np.clip(x[:-1], a, b)
        hi = np.clip(x[1:], a, b)
        return float(np.sum(self.values * np.maximum(hi - lo, 0.0)))

    def value_at(self, x: float) -> float:
        """Density at x, right-continuous on the gaps."""
        pos = self.positions
        if self.n == 0 or x < pos[0] or x >= pos[-1]:
            return 0.0
        k = int(np.searchsorted(pos, x, side="right")) - 1
        return float(self.ell / (pos[k + 1] - pos[k]))

    def jumps(self) -> tuple[np.ndarray, np.ndarray]:
        """Locations and signed sizes of the profile's discontinuities."""
        if self.n == 0:
            return np.zeros(0), np.zeros(0)
        padded = np.concatenate(([0.0], self.values, [0.0]))
        return self.positions.copy(), np.diff(padded)


def density_from_particles(positions, ell: float) -> DensityProfile:
    x = np.asarray(positions, dtype=float)
    if len(x) > 1 and not np.all(np.diff(x) > 0):
        raise ValueError("particle positions must be strictly increasing")
    return DensityProfile(positions=x.copy(), ell=ell)


def total_variation(profile: DensityProfile, window: tuple[float, float] | None = None) -> float:
    """Total variation of the profile, optionally restricted to a window.

    Counts jump magnitudes at discontinuity points strictly inside the
    window.  With no window the support-edge jumps to vacuum are interior
    points of the line and therefore included; a window edge that cuts
    through support contributes nothing, so the restricted value is the
    variation of the restricted function, not of a zero-padded one.
    """
    locations, sizes = profile.jumps()
    if window is None:
        return float(np.sum(np.abs(sizes)))
    a, b = window
    keep = (locations > a) & (locations < b)
    return float(np.sum(np.abs(sizes[keep])))


@dataclass(frozen=True)
class PseudoInverse:
    """Pseudo-inverse distribution function of a particle density.

    Piecewise-linear map of cumulative mass to position, with the node at
    mass i*ell sitting exactly at x_i.
    """

    masses: np.ndarray
    positions: np.ndarray

    @classmethod
    def from_profile(cls, profile: DensityProfile) -> "PseudoInverse":
        n = profile.n
        return cls(
            masses=profile.ell * np.arange(n + 1),
            positions=profile.positions.copy(),
        )

    def __call__(self, z):
        return np.interp(z, self.masses, self.positions)


def _abs_affine_segment(width: float, d0: float, d1: float) -> float:
    """Integral of |affine| over a segment given endpoint values."""
    if width <= 0.0:
        return 0.0
    if d0 * d1 >= 0.0:
        return 0.5 * (abs(d0) + abs(d1)) * width
    return 0.5 * (d0 * d0 + d1 * d1) * width / abs(d1 - d0)


def wasserstein1(a: DensityProfile, b: DensityProfile) -> float:
    """1-Wasserstein distance via exact L1 norm of pseudo-inverse difference."""
    if abs(a.mass() - b.mass()) > 1e-12:
        raise ValueError(
            f"profiles carry different mass: {a.mass():.17g} vs {b.mass():.17g}"
        )
    xa, xb = PseudoInverse.from_profile(a), PseudoInverse.from_profile(b)
    nodes = np.union1d(xa.masses, xb.masses)
    d = xa(nodes) - xb(nodes)
    total = 0.0
    for k in range(len(nodes) - 1):
        total += _abs_affine_segment(nodes[k + 1] - nodes[k], d[k], d[k + 1])
    return total


def windowed_mass_drift(result, a: float, b: float, s: float, t: float) -> tuple[float, float]:
    """Change of the mass in [a, b] between two sampled times, with the
    theoretical bound 6*v_max*R_max*(t-s).

    ``result`` is a RunResult whose sampled times include s and t.  Returns
    (observed drift, bound) so callers can assert drift <= bound.
    """
    if t < s:
        raise ValueError("need s <= t")

    def row_at(when: float) -> np.ndarray:
        k = int(np.argmin(np.abs(result.times - when)))
        if abs(result.times[k] - when) > 1e-9:
            raise ValueError(f"time {when} was not sampled")
        return result.trajectories[k]

    prof_s = DensityProfile(row_at(s).copy(), result.ell)
    prof_t = DensityProfile(row_at(t).copy(), result.ell)
    drift = abs(prof_t.mass(a, b) - prof_s.mass(a, b))
    r_max = float(np.max(result.ell / np.diff(result.trajectories[0])))
    bound = 6.0 * result.model.v_max * r_max * (t - s)
    return drift, bound


@dataclass(frozen=True)
class PiecewiseLinearDensity:
    """Density made of affine pieces between sorted breakpoints.

    ``slopes``/``intercepts`` have one entry more than ``breaks``; piece j
    covers (breaks[j-1], breaks[j]) with value slope*x + intercept.
    """

    breaks: np.ndarray
    slopes: np.ndarray
    intercepts: np.ndarray

    def __post_init__(self):
        for arr in (self.breaks, self.slopes, self.intercepts):
            arr.setflags(write=False)
        if len(self.slopes) != len(self.breaks) + 1:
            raise ValueError("need exactly one piece more than breakpoints")

    @classmethod
    def from_constant_pieces(cls, pieces) -> "PiecewiseLinearDensity":
        """Builds the 0-padded profile from disjoint (a, b, value) triples."""
        breaks: list[float] = []
        values: list[float] = [0.0]
        for a, b, v in sorted((float(a), float(b), float(v)) for a, b, v in pieces):
            if b <= a:
                continue
            if breaks and a < breaks[-1]:
                raise ValueError("pieces overlap")
            if breaks and a == breaks[-1]:
                values[-1] = float(v)  # piece starts where the last one ended
                breaks.append(float(b))
                values.append(0.0)
            else:
                breaks.extend([float(a), float(b)])
                values.extend([float(v), 0.0])
        return cls(
            breaks=np.array(breaks),
            slopes=np.zeros(len(values)),
            intercepts=np.array(values),
        )

    def piece_at(self, x: float) -> tuple[float, float]:
        j = int(np.searchsorted(self.breaks, x, side="right"))
        return float(self.slopes[j]), float(self.intercepts[j])

    def value_at(self, x: float) -> float:
        s, q = self.piece_at(x)
        return s * x + q


def datum_profile(datum) -> PiecewiseLinearDensity:
    """Float view of a piecewise-constant initial profile."""
    return PiecewiseLinearDensity.from_constant_pieces(
        (float(a), float(b), float(v)) for a, b, v in datum.pieces
    )


def lwr_reference(
    rho_left: float,
    rho_right: float,
    t: float,
    model: VelocityModel | None = None,
    x0: float = 0.0,
) -> PiecewiseLinearDensity:
    """Entropy solution of the conservation law for Riemann data at time t.

    With the strictly concave affine-law flux, a lower state on the left
    resolves into a shock at the Rankine-Hugoniot speed and a higher state
    on the left into a rarefaction fan that is affine in x.
    """
    model = model or VelocityModel()
    if not model.affine:
        raise NotImplementedError("closed-form solution requires the affine law")
    if t < 0:
        raise ValueError("time must be non-negative")
    if rho_left == rho_right:
        return PiecewiseLinearDensity(
            breaks=np.zeros(0), slopes=np.zeros(1), intercepts=np.array([float(rho_left)])
        )
    if rho_left < rho_right:
        sigma = (model.flux(rho_right) - model.flux(rho_left)) / (rho_right - rho_left)
        return PiecewiseLinearDensity(
            breaks=np.array([x0 + sigma * t]),
            slopes=np.zeros(2),
            intercepts=np.array([float(rho_left), float(rho_right)]),
        )
    if t == 0.0:
        return PiecewiseLinearDensity(
            breaks=np.array([x0]),
            slopes=np.zeros(2),
            intercepts=np.array([float(rho_left), float(rho_right)]),
        )
    edge_l = x0 + model.flux_prime(rho_left) * t
    edge_r = x0 + model.flux_prime(rho_right) * t
    fan_slope = -model.rho_max / (2.0 * model.v_max * t)
    fan_intercept = 0.5 * model.rho_max * (1.0 + x0 / (model.v_max * t))
    return PiecewiseLinearDensity(
        breaks=np.array([edge_l, edge_r]),
        slopes=np.array([0.0, fan_slope, 0.0]),
        intercepts=np.array([float(rho_left), fan_intercept, float(rho_right)]),
    )


def block_reference(
    value: float, a: float, b: float, t: float, model: VelocityModel | None = None
) -> PiecewiseLinearDensity:
    """Entropy solution for a single block value*1_[a,b) at time t.

    Valid until the shock released at ``a`` meets the rarefaction released
    at ``b``, which happens at time (b-a)*rho_max/(v_max*value).
    """
    model = model or VelocityModel()
    if not model.affine:
        raise NotImplementedError("closed-form solution requires the affine law")
    if not 0.0 < value <= model.rho_max or b <= a:
        raise ValueError("need a nonempty block with a density in (0, rho_max]")
    t_star = (b - a) * model.rho_max / (model.v_max * value)
    if t > t_star:
        raise ValueError(
            f"block solution only valid up to the interaction time {t_star:g}"
        )
    if t == 0.0:
        return PiecewiseLinearDensity.from_constant_pieces([(a, b, value)])
    shock = a + model.v(value) * t
    edge_l = b + model.flux_prime(value) * t
    edge_r = b + model.v_max * t
    fan_slope = -model.rho_max / (2.0 * model.v_max * t)
    fan_intercept = 0.5 * model.rho_max * (1.0 + b / (model.v_max * t))
    return PiecewiseLinearDensity(
        breaks=np.array([shock, edge_l, edge_r]),
        slopes=np.array([0.0, 0.0, fan_slope, 0.0]),
        intercepts=np.array([0.0, float(value), fan_intercept, 0.0]),
    )


def l1_distance(
    profile: DensityProfile,
    reference: PiecewiseLinearDensity,
    window: tuple[float, float],
) -> float:
    """Exact L1 distance between a particle profile and an affine-piece
    reference over a window, by integrating on merged breakpoints."""
    a, b = window
    if b <= a:
        raise ValueError("window must have positive width")
    cuts = [a, b]
    cuts.extend(p for p in np.asarray(profile.positions) if a < p < b)
    cuts.extend(p for p in reference.breaks if a < p < b)
    xs = np.unique(np.asarray(cuts, dtype=float))
    total = 0.0
    for lo, hi in zip(xs[:-1], xs[1:]):
        mid = 0.5 * (lo + hi)
        c = profile.value_at(mid)
        s, q = reference.piece_at(mid)
        total += _abs_affine_segment(hi - lo, c - (s * lo + q), c - (s * hi + q))
    return total
