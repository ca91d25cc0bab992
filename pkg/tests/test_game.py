"""Coalition bounds, worths, the share formulas, and their oracles."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from revalloc import game
from revalloc.game import (
    DegenerateDenominatorError,
    build_coalition_table,
    characteristic_value,
    coalition_bounds,
    coalition_weights,
    modified_shapley,
    shapley_bounds,
    shapley_triples,
)

import naive_oracles


def random_matrix(rng, n, low=0.05):
    E = rng.uniform(low, 1.0, (n, n))
    np.fill_diagonal(E, 1.0)
    return E


# ------------------------------------------------------------------- bounds

def test_worked_example_bounds(toy_matrix):
    mask = 0b111  # members 1..3 of the toy case
    assert coalition_bounds(toy_matrix, mask, 0) == (0.89, 0.58)
    assert coalition_bounds(toy_matrix, mask, 1) == (0.46, 0.43)
    assert coalition_bounds(toy_matrix, mask, 2) == (0.40, 0.25)


def test_singleton_bounds_are_one(toy_matrix):
    for j in range(5):
        assert coalition_bounds(toy_matrix, 1 << j, j) == (1.0, 1.0)


def test_non_member_rejected(toy_matrix):
    with pytest.raises(ValueError, match="not a member"):
        coalition_bounds(toy_matrix, 0b011, 2)


def test_characteristic_worked_example(toy_matrix):
    assert abs(characteristic_value(toy_matrix, 0b111) - 1.75) < 1e-12
    assert characteristic_value(toy_matrix, 0b00100) == 1.0
    assert characteristic_value(toy_matrix, 0) == 0.0


# ------------------------------------------------------------ coalition table

def test_table_matches_naive_on_all_toy_masks(toy_matrix):
    table = build_coalition_table(toy_matrix)
    E = toy_matrix.values
    for mask in range(1, 1 << 5):
        members = [j for j in range(5) if mask >> j & 1]
        coalition = set(members)
        assert abs(table.characteristic(mask)
                   - naive_oracles.coalition_worth(E, coalition)) < 1e-12
        assert abs(table.sum_lower[mask]
                   - naive_oracles.coalition_lower_total(E, coalition)) < 1e-12
        for j in members:
            up, lo = table.member_bounds(mask, j)
            ref = naive_oracles.bounds_in_coalition(E, coalition, j)
            assert (up, lo) == ref


def test_table_matches_naive_on_random_bank_masks(bank_matrix):
    table = build_coalition_table(bank_matrix)
    E = bank_matrix.values
    rng = np.random.default_rng(99)
    masks = rng.integers(1, 1 << 18, size=1000)
    for mask in masks:
        mask = int(mask)
        coalition = {j for j in range(18) if mask >> j & 1}
        assert abs(table.characteristic(mask)
                   - naive_oracles.coalition_worth(E, coalition)) < 1e-9
        j = min(coalition)
        assert table.member_bounds(mask, j) == naive_oracles.bounds_in_coalition(E, coalition, j)


def test_slim_table_agrees_with_dense():
    rng = np.random.default_rng(1)
    E = random_matrix(rng, 6)
    dense = build_coalition_table(E, store_member_bounds=True)
    slim = build_coalition_table(E, store_member_bounds=False)
    assert slim.bound_max is None
    assert_allclose(slim.sum_upper, dense.sum_upper, rtol=0, atol=1e-12)
    assert_allclose(slim.sum_lower, dense.sum_lower, rtol=0, atol=1e-12)
    for mask in (0b101, 0b111, 0b110110):
        for j in range(6):
            if mask >> j & 1:
                assert slim.member_bounds(mask, j) == dense.member_bounds(mask, j)


def test_table_cap():
    with pytest.raises(ValueError, match="cap"):
        build_coalition_table(np.eye(25))


def test_single_dmu_table_and_shares():
    table = build_coalition_table(np.array([[1.0]]))
    assert table.characteristic(1) == 1.0
    triple = shapley_triples(np.array([[1.0]]))
    assert triple.phi[0] == triple.phi_upper[0] == triple.phi_lower[0] == 1.0


def test_monotone_bounds_for_multi_member_coalitions():
    # growing a coalition can only raise a member's max and lower its min,
    # as long as the member is never alone (the lone-member value is pinned
    # to 1 by convention, which breaks monotonicity at that single step)
    rng = np.random.default_rng(8)
    E = random_matrix(rng, 7)
    table = build_coalition_table(E)
    for _ in range(300):
        S = int(rng.integers(1, 1 << 7))
        extra = int(rng.integers(0, 7))
        T = S | (1 << extra)
        for j in range(7):
            if S >> j & 1 and bin(S).count("1") >= 2:
                upS, loS = table.member_bounds(S, j)
                upT, loT = table.member_bounds(T, j)
                assert upS <= upT + 1e-12
                assert loS >= loT - 1e-12


# ----------------------------------------------------------------- weights

def test_coalition_weights_match_factorials():
    import math

    for n in (1, 2, 5, 18, 24):
        w = coalition_weights(n)
        for s in range(n):
            exact = math.factorial(s) * math.factorial(n - s - 1) / math.factorial(n)
            assert abs(w[s] - exact) < 1e-15
        # weights over all coalitions of the remaining n-1 players sum to 1
        total = sum(math.comb(n - 1, s) * w[s] for s in range(n))
        assert abs(total - 1.0) < 1e-12


# ------------------------------------------------------------------- shares

def test_two_player_symmetry_is_exact():
    for c in (0.3, 0.77, 1.0):
        E = np.array([[1.0, c], [c, 1.0]])
        phi = modified_shapley(E)
        assert phi[0] == phi[1]
        up, lo = shapley_bounds(E)
        assert up[0] == up[1] and lo[0] == lo[1]


def test_two_player_bounds_collapse():
    # a single evaluator makes max = min in every coalition
    rng = np.random.default_rng(3)
    for _ in range(20):
        E = random_matrix(rng, 2)
        triple = shapley_triples(E)
        assert (triple.phi_upper == triple.phi).all()
        assert (triple.phi_lower == triple.phi).all()


@pytest.mark.parametrize("include_empty", [False, True])
def test_matches_naive_enumeration(include_empty):
    rng = np.random.default_rng(17)
    convention = "unit" if include_empty else "exclude"
    for n in (3, 4, 5, 6):
        E = random_matrix(rng, n)
        triple = shapley_triples(E, empty_coalition=convention)
        lo, mid, up = naive_oracles.shapley_triple(E, include_empty=include_empty)
        assert_allclose(triple.phi, mid, rtol=0, atol=1e-12)
        assert_allclose(triple.phi_upper, up, rtol=0, atol=1e-12)
        assert_allclose(triple.phi_lower, lo, rtol=0, atol=1e-12)


def test_toy_fixture_matches_naive(toy_matrix):
    triple = shapley_triples(toy_matrix)
    lo, mid, up = naive_oracles.shapley_triple(toy_matrix.values)
    assert_allclose(triple.phi, mid, rtol=0, atol=1e-12)
    assert_allclose(triple.phi_upper, up, rtol=0, atol=1e-12)
    assert_allclose(triple.phi_lower, lo, rtol=0, atol=1e-12)


def test_unit_convention_adds_first_weight_exactly():
    rng = np.random.default_rng(23)
    E = random_matrix(rng, 5)
    w0 = coalition_weights(5)[0]
    a = shapley_triples(E, empty_coalition="exclude")
    b = shapley_triples(E, empty_coalition="unit")
    assert_allclose(b.phi - a.phi, w0, rtol=0, atol=1e-15)
    assert_allclose(b.phi_upper - a.phi_upper, w0, rtol=0, atol=1e-15)
    assert_allclose(b.phi_lower - a.phi_lower, w0, rtol=0, atol=1e-15)


def test_unknown_convention_rejected(toy_matrix):
    with pytest.raises(ValueError, match="empty_coalition"):
        modified_shapley(toy_matrix, empty_coalition="bogus")


def test_ordering_holds_on_random_matrices():
    rng = np.random.default_rng(31)
    for _ in range(200):
        n = int(rng.integers(2, 9))
        triple = shapley_triples(random_matrix(rng, n))
        assert (triple.phi_lower <= triple.phi + 1e-9).all()
        assert (triple.phi <= triple.phi_upper + 1e-9).all()


def test_positivity_on_positive_matrices():
    rng = np.random.default_rng(37)
    for _ in range(50):
        n = int(rng.integers(2, 8))
        triple = shapley_triples(random_matrix(rng, n))
        assert (triple.phi > 0).all()
        assert (triple.phi_upper > 0).all()
        assert (triple.phi_lower > 0).all()


def test_central_denominators_bounded_below_by_coalition_size():
    # for |S| >= 2 the member maxima can only grow when a player joins, so
    # the central denominator is at least s; |S| = 1 gives the joiner's score
    rng = np.random.default_rng(41)
    E = random_matrix(rng, 6)
    table = build_coalition_table(E)
    for i in range(6):
        for S in range(1, 1 << 6):
            if S >> i & 1:
                continue
            s = bin(S).count("1")
            T = S | (1 << i)
            eU, _ = table.member_bounds(T, i)
            den = s + (table.sum_upper[T] - eU) - table.sum_upper[S]
            if s >= 2:
                assert den >= s - 1e-12
            else:
                j = S.bit_length() - 1
                assert abs(den - E[i, j]) < 1e-12


def test_superadditive_for_multi_member_coalitions():
    # worth is superadditive when both sides have at least two members;
    # lone members are pinned to worth 1, which can exceed what they add
    rng = np.random.default_rng(43)
    for _ in range(50):
        n = int(rng.integers(4, 7))
        E = random_matrix(rng, n)
        for S1 in range(1, 1 << n):
            if bin(S1).count("1") < 2:
                continue
            for S2 in range(1, 1 << n):
                if S1 & S2 or bin(S2).count("1") < 2:
                    continue
                v1 = characteristic_value(E, S1)
                v2 = characteristic_value(E, S2)
                v12 = characteristic_value(E, S1 | S2)
                assert v12 >= v1 + v2 - 1e-9


def test_singleton_pair_breaks_superadditivity():
    # documented counterexample: two lone DMUs are worth 1 each, but the
    # pair is worth only the two mutual appraisals
    E = np.array([[1.0, 0.5], [0.5, 1.0]])
    v_pair = characteristic_value(E, 0b11)
    assert v_pair == 1.0
    assert v_pair < characteristic_value(E, 0b01) + characteristic_value(E, 0b10)


def test_degenerate_denominator_raises_with_location():
    E = np.array([
        [1.0, 1.0, 1.0],
        [1.0, 1.0, 1.0],
        [1e-10, 1e-10, 1.0],
    ])
    with pytest.raises(DegenerateDenominatorError) as info:
        shapley_triples(E)
    err = info.value
    assert 0 <= err.player < 3
    assert err.mask >= 1
    assert str(err.player) in str(err)
    assert "coalition" in str(err)


def test_degenerate_error_is_backend_independent():
    E = np.array([
        [1.0, 1.0, 1.0],
        [1.0, 1.0, 1.0],
        [1e-10, 1e-10, 1.0],
    ])
    found = {}
    for backend in ("numpy", None):
        try:
            shapley_triples(E, backend=backend)
        except DegenerateDenominatorError as err:
            found[backend] = (err.player, err.mask)
    assert found["numpy"] == found[None]


def test_shapley_shares_sum_near_relative_worth(bank_matrix):
    # sanity: shares are positive and comparable in scale to worth ratios
    triple = shapley_triples(bank_matrix)
    assert triple.phi.sum() > 1.0
    assert triple.phi.max() / triple.phi.min() < 10
