"""Shared constants and helpers for the test suite."""

import numpy as np

from hughes1d import InitialDatum

# Two-block crowd used throughout as the reference configuration: a long
# dense block against the left door and a shorter one just left of centre.
REFERENCE_PIECES = ((-1.0, -0.5, 0.9), (-0.4, 0.0, 0.9))
REFERENCE_N = 200
REFERENCE_ALPHA = 1.3


def random_datum(rng, max_pieces=3, max_value=1.0):
    """Random piecewise-constant profile with disjoint 3-decimal pieces.

    Values stay in (0, max_value] so runs under the default capacity
    rho_max = 1 keep their discrete gap bounds.
    """
    while True:
        n_pieces = int(rng.integers(1, max_pieces + 1))
        cuts = np.round(np.sort(rng.uniform(-0.98, 0.98, size=2 * n_pieces)), 3)
        pieces = []
        for k in range(n_pieces):
            a, b = float(cuts[2 * k]), float(cuts[2 * k + 1])
            if b - a < 0.05:
                continue
            value = float(np.round(rng.uniform(0.15, max_value), 3))
            pieces.append((a, b, value))
        if pieces:
            return InitialDatum.from_pieces(pieces)
