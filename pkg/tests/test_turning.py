import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from hughes1d import (
    build_Z,
    solve_xi,
    solve_xi_discrete,
    solve_zeta,
    turning_state,
)

from helpers import REFERENCE_ALPHA

# four walkers with one gap straddling the centre; with ell = 0.1 the
# crowd term makes the balance point drift right as alpha grows
FOUR = np.array([-0.8, -0.2, 0.4, 0.6])


def random_positions(rng, lo=2, hi=24):
    count = int(rng.integers(lo, hi))
    x = np.sort(rng.uniform(-0.97, 0.97, size=count))
    while np.min(np.diff(x)) < 1e-4:
        x = np.sort(rng.uniform(-0.97, 0.97, size=count))
    return x


def bisect_balance(profile, iters=80):
    """Independent root of Z- minus Z+ by plain bisection on the corridor."""
    lo, hi = -1.0, 1.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if profile.z_minus_at(mid) - profile.z_plus_at(mid) <= 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def test_cost_maps_reduce_to_distances_without_crowd():
    profile = build_Z(np.array([-1.0, 1.0]), 0.1, 2.0)
    assert_array_equal(profile.xs, [-1.0, 1.0])
    assert_array_equal(profile.z_minus, [0.0, 2.0])
    assert_array_equal(profile.z_plus, [2.0, 0.0])
    assert profile.z_minus_at(0.3) == pytest.approx(1.3, abs=1e-15)
    assert turning_state(np.array([-1.0, 1.0]), 0.1, 2.0).zeta == 0.0


def test_cost_map_nodes_match_hand_computation():
    # two walkers at +-0.5 with alpha*ell = 0.4: one interior gap of crowd
    profile = build_Z(np.array([-0.5, 0.5]), 0.2, 2.0)
    assert_array_equal(profile.xs, [-1.0, -0.5, 0.5, 1.0])
    assert_allclose(profile.z_minus, [0.0, 0.5, 1.9, 2.4], rtol=0, atol=1e-15)
    assert_allclose(profile.z_plus, [2.4, 1.9, 0.5, 0.0], rtol=0, atol=1e-15)
    assert profile.z_minus[0] == 0.0
    assert profile.z_plus[-1] == 0.0


def test_cost_maps_ignore_walkers_at_or_beyond_doors():
    inner = build_Z(np.array([-0.5, 0.5]), 0.2, 2.0)
    padded = build_Z(np.array([-1.5, -1.0, -0.5, 0.5, 1.0, 1.2]), 0.2, 2.0)
    assert_array_equal(padded.xs, inner.xs)
    assert_array_equal(padded.z_minus, inner.z_minus)
    assert_array_equal(padded.z_plus, inner.z_plus)
    assert padded.i_minus == 2
    assert padded.i_plus == 3


def test_cost_map_slopes_are_at_least_unit():
    rng = np.random.default_rng(7)
    for _ in range(50):
        x = random_positions(rng)
        alpha = float(rng.uniform(0.0, 8.0))
        profile = build_Z(x, 0.02, alpha)
        up = np.diff(profile.z_minus) / np.diff(profile.xs)
        down = np.diff(profile.z_plus) / np.diff(profile.xs)
        assert np.all(up >= 1.0 - 1e-12)
        assert np.all(down <= -1.0 + 1e-12)


def test_balance_defect_vanishes_at_zeta():
    rng = np.random.default_rng(11)
    for _ in range(100):
        x = random_positions(rng)
        alpha = float(rng.uniform(0.0, 6.0))
        profile = build_Z(x, 0.01, alpha)
        zeta = solve_zeta(profile).zeta
        assert -1.0 < zeta < 1.0
        assert abs(profile.z_minus_at(zeta) - profile.z_plus_at(zeta)) <= 1e-12


def test_zeta_matches_bisection_oracle():
    rng = np.random.default_rng(13)
    for _ in range(300):
        x = random_positions(rng)
        alpha = float(rng.uniform(0.0, 10.0))
        ell = float(rng.uniform(0.005, 0.05))
        profile = build_Z(x, ell, alpha)
        zeta = solve_zeta(profile).zeta
        assert abs(zeta - bisect_balance(profile)) <= 1e-10


def test_no_crowd_weight_turns_exactly_at_zero():
    rng = np.random.default_rng(17)
    for _ in range(20):
        x = random_positions(rng)
        assert turning_state(x, 0.02, 0.0).zeta == 0.0
        assert solve_xi(x, 0.02, 0.0) == 0.0
        assert solve_xi_discrete(x, 0.02, 0.0) == 0.0


def test_symmetric_crowd_turns_at_zero():
    # odd walker count puts one exactly at the centre: exact nodal hit
    x = np.array([-0.6, -0.3, 0.0, 0.3, 0.6])
    state = turning_state(x, 0.1, 3.0)
    assert state.zeta == 0.0
    assert state.i_zero == 1
    # even count: the root sits in the middle gap, symmetric to rounding
    y = np.array([-0.7, -0.2, 0.2, 0.7])
    assert abs(turning_state(y, 0.1, 3.0).zeta) <= 1e-14


def test_strong_coupling_pins_zeta_at_the_middle_gap_midpoint():
    # closed form for FOUR: zeta = 0.2*A / (1.2 + 2*A) with A = alpha*ell
    state = turning_state(FOUR, 0.1, 1e6)
    assert state.zeta == pytest.approx(0.09999940000359998, abs=1e-12)
    assert abs(state.zeta - 0.1) <= 1e-3


def test_zeta_moves_monotonically_from_zero_to_the_midpoint():
    rng = np.random.default_rng(19)
    grid = [0.0, 0.25, 1.0, 4.0, 16.0, 256.0, 1e5]
    for _ in range(40):
        x = random_positions(rng, lo=3, hi=16)
        m = len(x)
        mid = x[(m - 1) // 2] if m % 2 else 0.5 * (x[m // 2 - 1] + x[m // 2])
        lo, hi = min(0.0, mid) - 1e-12, max(0.0, mid) + 1e-12
        previous = 0.0
        for alpha in grid:
            zeta = turning_state(x, 0.01, alpha).zeta
            assert lo <= zeta <= hi
            assert abs(zeta) >= previous - 1e-12
            previous = abs(zeta)


def test_split_index_brackets_zeta():
    state = turning_state(FOUR, 0.1, 1.0)
    assert state.zeta == pytest.approx(0.02 / 1.4, abs=1e-14)
    assert state.i_zero == 1
    assert FOUR[state.i_zero] < state.zeta <= FOUR[state.i_zero + 1]


def test_one_sided_crowds_use_sentinel_split_indices():
    # crowd entirely to the left: the balance point sits right of everyone
    left = np.array([-0.9, -0.8])
    state = turning_state(left, 0.05, 1.0)
    assert state.zeta == pytest.approx(-0.025, abs=1e-12)
    assert state.zeta > left[-1]
    assert state.i_zero == 1
    # mirrored crowd: everyone walks right
    right = np.array([0.8, 0.9])
    mirrored = turning_state(right, 0.05, 1.0)
    assert mirrored.zeta == pytest.approx(0.025, abs=1e-12)
    assert mirrored.i_zero == -1


def test_door_anchored_turning_point_stays_within_half_gap_of_zeta():
    rng = np.random.default_rng(23)
    for _ in range(100):
        x = random_positions(rng)
        alpha = float(rng.uniform(0.0, 6.0))
        ell = float(rng.uniform(0.005, 0.05))
        state = turning_state(x, ell, alpha)
        assert abs(state.xi - state.zeta) <= 0.5 * alpha * ell + 1e-12


def test_door_anchored_forms_agree():
    rng = np.random.default_rng(29)
    for _ in range(60):
        inner = random_positions(rng)
        alpha = float(rng.uniform(0.0, 6.0))
        ell = float(rng.uniform(0.005, 0.05))
        assert abs(solve_xi(inner, ell, alpha) - solve_xi_discrete(inner, ell, alpha)) <= 1e-10
        # rows from a running simulation carry walkers at and beyond the
        # doors; both forms must clip the crowd to the corridor
        padded = np.concatenate(([-1.4, -1.0], inner, [1.0, 1.3]))
        assert abs(solve_xi(padded, ell, alpha) - solve_xi_discrete(padded, ell, alpha)) <= 1e-10


def test_reference_crowd_turning_points(reference_init):
    x = reference_init.positions
    ell = reference_init.ell
    state = turning_state(x, ell, REFERENCE_ALPHA)
    assert abs(state.xi - state.zeta) <= 0.5 * REFERENCE_ALPHA * ell
    assert abs(solve_xi_discrete(x, ell, REFERENCE_ALPHA) - state.xi) <= ell * (1.0 + REFERENCE_ALPHA)
    # the whole crowd starts left of centre, so both points sit left of it
    assert state.zeta < 0.0
    assert state.xi < 0.0


def test_rejects_unsorted_positions():
    with pytest.raises(ValueError):
        build_Z(np.array([0.5, -0.5]), 0.1, 1.0)
    with pytest.raises(ValueError):
        solve_xi(np.array([0.0, 0.0]), 0.1, 1.0)
