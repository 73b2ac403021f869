"""Initial crowd profiles and their equal-mass particle discretisation.

An initial density is a piecewise-constant profile on the corridor [-1, 1]
given as disjoint pieces ``(a, b, value)``.  Atomisation places n+1 particle
positions so that every adjacent pair encloses exactly ell = L/n of mass,
where L is the total mass: the first particle sits at the left end of the
support, the last at the right end, and the interior ones at the exact
inverse-CDF points of i*ell.  All of this is done in rational arithmetic on
the piece breakpoints, so the positions and ell carry no quadrature error.

Numeric piece entries are read through their shortest decimal representation
(0.9 means exactly 9/10).  Mass queries with arbitrary float endpoints use
the exact binary value of the endpoint instead, since those come from
computed particle coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

Corridor = (Fraction(-1), Fraction(1))


def _literal_fraction(x) -> Fraction:
    """Exact rational for a construction-time number.

    Floats are parsed from their repr, so the decimal the user typed is what
    is stored: _literal_fraction(0.9) == Fraction(9, 10).
    """
    if isinstance(x, float):
        if not np.isfinite(x):
            raise ValueError(f"piece entries must be finite, got {x}")
        return Fraction(repr(x))
    return Fraction(x)


def _exact_fraction(x) -> Fraction:
    """Exact rational for a computed number (binary value of floats)."""
    if isinstance(x, float) and not np.isfinite(x):
        raise ValueError(f"query endpoint must be finite, got {x}")
    return Fraction(x)


@dataclass(frozen=True)
class InitialDatum:
    """Piecewise-constant initial density on the corridor.

    ``pieces`` is a normalised tuple of (a, b, value) Fractions: sorted,
    disjoint, positive value, contained in [-1, 1].
    """

    pieces: tuple[tuple[Fraction, Fraction, Fraction], ...]

    @classmethod
    def from_pieces(cls, pieces: Iterable[Sequence]) -> "InitialDatum":
        norm = []
        for entry in pieces:
            a, b, value = (_literal_fraction(p) for p in entry)
            if value < 0:
                raise ValueError(f"density value must be non-negative, got {value}")
            if b < a:
                raise ValueError(f"piece ({a}, {b}) has negative width")
            if value == 0 or a == b:
                continue
            if a < Corridor[0] or b > Corridor[1]:
                raise ValueError(f"piece ({a}, {b}) extends outside [-1, 1]")
            norm.append((a, b, value))
        norm.sort()
        for (a0, b0, _), (a1, _, _) in zip(norm, norm[1:]):
            if a1 < b0:
                raise ValueError(f"pieces overlap near x={float(a1)}")
        return cls(pieces=tuple(norm))

    @property
    def total_mass(self) -> Fraction:
        return sum((v * (b - a) for a, b, v in self.pieces), Fraction(0))

    @property
    def r_max(self) -> Fraction:
        """Essential sup of the profile."""
        return max((v for _, _, v in self.pieces), default=Fraction(0))

    @property
    def support(self) -> tuple[Fraction, Fraction]:
        """Convex hull of the support; raises on the zero profile."""
        if not self.pieces:
            raise ValueError("datum has no mass")
        return self.pieces[0][0], self.pieces[-1][1]

    def total_variation(self) -> Fraction:
        """TV of the profile on the whole line (jumps to zero outside pieces)."""
        tv = Fraction(0)
        prev_b = None
        prev_v = Fraction(0)
        for a, b, v in self.pieces:
            if prev_b is not None and a == prev_b:
                tv += abs(v - prev_v)
            else:
                tv += prev_v + v  # drop to vacuum, then rise
            prev_b, prev_v = b, v
        tv += prev_v
        return tv

    def mass(self, a=None, b=None) -> Fraction:
        """Exact mass over [a, b] (defaults to the whole line)."""
        if a is None and b is None:
            return self.total_mass
        lo = _exact_fraction(a) if a is not None else Fraction(-10)
        hi = _exact_fraction(b) if b is not None else Fraction(10)
        if hi < lo:
            raise ValueError("mass query with b < a")
        total = Fraction(0)
        for pa, pb, v in self.pieces:
            left = max(pa, lo)
            right = min(pb, hi)
            if right > left:
                total += v * (right - left)
        return total

    def mass_float(self, a=None, b=None) -> float:
        return float(self.mass(a, b))

    def value_at(self, x) -> Fraction:
        q = _exact_fraction(x)
        for a, b, v in self.pieces:
            if a <= q < b:
                return v
        return Fraction(0)


@dataclass(frozen=True)
class ParticleInit:
    """Atomised initial condition: n+1 positions enclosing ell of mass per gap."""

    positions: np.ndarray
    ell: float
    exact_positions: tuple[Fraction, ...]
    exact_ell: Fraction
    datum: InitialDatum

    @property
    def n(self) -> int:
        return len(self.positions) - 1

    def __post_init__(self):
        self.positions.setflags(write=False)


def atomize(datum: InitialDatum, n: int) -> ParticleInit:
    """Equal-mass particle positions for ``datum``.

    The cumulative mass from the left support edge is inverted exactly at the
    targets i*ell.  When a target lands exactly on a piece boundary that is
    followed by a vacuum gap, the particle is placed at the right end of the
    vacuum (the supremum of all points with strictly less than i*ell of mass
    behind them).
    """
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    if not datum.pieces:
        raise ValueError("cannot atomise a datum with no mass")
    L = datum.total_mass
    ell = L / n
    if ell / datum.r_max < Fraction(1, 10**14):
        raise ValueError("n too large: inter-particle gaps would underflow")

    cum = [Fraction(0)]
    for a, b, v in datum.pieces:
        cum.append(cum[-1] + v * (b - a))

    positions = [datum.pieces[0][0]]
    for i in range(1, n):
        target = i * ell
        for k, (a, b, v) in enumerate(datum.pieces):
            if target <= cum[k + 1]:
                if target == cum[k + 1] and k + 1 < len(datum.pieces):
                    # boundary hit with a vacuum gap ahead: skip the vacuum
                    positions.append(datum.pieces[k + 1][0])
                else:
                    positions.append(a + (target - cum[k]) / v)
                break
    positions.append(datum.pieces[-1][1])

    # every adjacent pair must satisfy the gap lower bound ell / r_max
    gap_floor = ell / datum.r_max
    for lo, hi in zip(positions, positions[1:]):
        if hi - lo < gap_floor:
            raise AssertionError("atomisation produced a gap below ell/r_max")

    arr = np.array([float(p) for p in positions])
    return ParticleInit(
        positions=arr,
        ell=float(ell),
        exact_positions=tuple(positions),
        exact_ell=ell,
        datum=datum,
    )


def datum_mass(datum: InitialDatum, a, b) -> float:
    """Convenience float wrapper for exact interval mass."""
    return datum.mass_float(a, b)
