"""Distance chains and the two lifting routes, pinned against oracles."""

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from ptsm import (
    AtomMismatchError,
    Coupling,
    ParameterError,
    PriceFunction,
    PseudometricMatrix,
    RankViolationError,
    atom_gap_matrix,
    behavioural_distance,
    build_system,
    duality_gap,
    kantorovich_lift,
    logical_distance_lb,
    parse_modal,
    random_distribution,
    random_pseudometric,
    skewed_halves,
    skewed_twin,
    wasserstein_lift,
)

from oracles import kantorovich_enumerate, skewed_twin_tables

F = Fraction
SKEWS = [F(0), F(1, 10), F(1, 4), F(1, 2)]


class TestPseudometricMatrix:
    def test_zero_matrix(self):
        zero = PseudometricMatrix.zero(("a", "b"))
        assert zero.size == 2
        assert zero.value(0, 1) == 0
        assert zero.first_violation() is None

    @pytest.mark.parametrize(
        "rows, fragment",
        [
            ([[F(1, 2)]], "nonzero diagonal"),
            ([[F(0), F(3, 2)], [F(3, 2), F(0)]], "outside [0, 1]"),
            ([[F(0), F(1, 2)], [F(1, 4), F(0)]], "asymmetry"),
            (
                [
                    [F(0), F(1), F(0)],
                    [F(1), F(0), F(0)],
                    [F(0), F(0), F(0)],
                ],
                "triangle violation",
            ),
        ],
    )
    def test_axiom_violations_are_named(self, rows, fragment):
        m = PseudometricMatrix.from_rows([f"s{i}" for i in range(len(rows))], rows)
        assert fragment in m.first_violation()


class TestCouplingAndPrice:
    def test_coupling_cost_and_validity(self):
        d = PseudometricMatrix.from_rows(
            ("a", "b"), [[F(0), F(1, 2)], [F(1, 2), F(0)]]
        )
        pi = {0: F(1, 2), 1: F(1, 2)}
        swapped = Coupling({(0, 1): F(1, 2), (1, 0): F(1, 2)})
        assert swapped.cost(d) == F(1, 2)
        assert swapped.first_violation(pi, pi) is None
        assert swapped.transpose().cost(d) == F(1, 2)
        assert swapped.support() == [(0, 1), (1, 0)]

    def test_coupling_violations(self):
        pi = {0: F(1, 2), 1: F(1, 2)}
        assert "marginal" in Coupling({(0, 0): F(1)}).first_violation(pi, pi)
        bad = Coupling({(0, 0): F(0), (0, 1): F(1, 2), (1, 1): F(1, 2)})
        assert "non-positive" in bad.first_violation(pi, pi)

    def test_price_gap_and_validity(self):
        d = PseudometricMatrix.from_rows(
            ("a", "b"), [[F(0), F(1, 4)], [F(1, 4), F(0)]]
        )
        price = PriceFunction({0: F(1, 4), 1: F(0)})
        assert price.first_violation(d) is None
        assert price.gap({0: F(3, 4), 1: F(1, 4)}, {0: F(1, 4), 1: F(3, 4)}) == F(1, 8)
        steep = PriceFunction({0: F(1), 1: F(0)})
        assert "expansive" in steep.first_violation(d)
        assert "outside" in PriceFunction({0: F(2)}).first_violation(d)


class TestLifts:
    def test_termination_extension(self):
        d = PseudometricMatrix.zero(("a",))
        pi = {0: F(1)}
        assert wasserstein_lift(d, None, None) == (F(0), None)
        assert wasserstein_lift(d, None, pi)[0] == F(1)
        assert kantorovich_lift(d, pi, None)[0] == F(1)
        assert duality_gap(d, None, pi) == 0

    def test_equal_distributions_give_identity_plan(self):
        d = PseudometricMatrix.from_rows(
            ("a", "b"), [[F(0), F(1)], [F(1), F(0)]]
        )
        pi = {0: F(1, 3), 1: F(2, 3)}
        value, plan = wasserstein_lift(d, pi, pi)
        assert value == 0
        assert plan.weights == {(0, 0): F(1, 3), (1, 1): F(2, 3)}

    def test_zero_metric_shortcut_still_yields_valid_plan(self):
        d = PseudometricMatrix.zero(("a", "b", "c"))
        pi1 = {0: F(1, 2), 1: F(1, 2)}
        pi2 = {2: F(1)}
        value, plan = wasserstein_lift(d, pi1, pi2)
        assert value == 0
        assert plan.first_violation(pi1, pi2) is None

    def test_two_point_skew_instance(self):
        d = PseudometricMatrix.from_rows(
            ("a", "b"), [[F(0), F(1, 4)], [F(1, 4), F(0)]]
        )
        pi1 = {0: F(3, 4), 1: F(1, 4)}
        pi2 = {0: F(1, 4), 1: F(3, 4)}
        wv, plan = wasserstein_lift(d, pi1, pi2)
        kv, price = kantorovich_lift(d, pi1, pi2)
        assert wv == kv == F(1, 8)
        assert plan.cost(d) == wv and plan.first_violation(pi1, pi2) is None
        assert price.gap(pi1, pi2) == kv and price.first_violation(d) is None
        # brute force over grid-valued price functions reaches the same value
        assert kantorovich_enumerate(
            [[F(0), F(1, 4)], [F(1, 4), F(0)]], pi1, pi2, grid_denom=8
        ) == kv

    def test_zero_distance_quotient_path(self):
        # two points at distance zero force the dual LP onto the quotient
        d = PseudometricMatrix.from_rows(
            ("a", "b", "c"),
            [
                [F(0), F(0), F(1, 2)],
                [F(0), F(0), F(1, 2)],
                [F(1, 2), F(1, 2), F(0)],
            ],
        )
        pi1 = {0: F(1, 2), 1: F(1, 2)}
        pi2 = {2: F(1)}
        kv, price = kantorovich_lift(d, pi1, pi2)
        assert kv == F(1, 2)
        assert price.values[0] == price.values[1]

    @given(st.integers(min_value=0, max_value=10**6))
    @settings(max_examples=40, deadline=None)
    def test_duality_gap_vanishes(self, seed):
        rng = random.Random(seed)
        n = rng.randint(2, 5)
        d = random_pseudometric(rng, n)
        points = range(n)
        pi1 = random_distribution(rng, points)
        pi2 = random_distribution(rng, points)
        assert duality_gap(d, pi1, pi2) == 0


class TestDistanceChain:
    @pytest.mark.parametrize("eps", SKEWS)
    @pytest.mark.parametrize("method", ["W", "K"])
    def test_skewed_twin_tables(self, eps, method):
        twin = skewed_twin(eps)
        chain = behavioural_distance(twin, None, 3, method=method)
        d2_table, d3_root = skewed_twin_tables(eps)
        at = twin.state_by_label
        for (la, lb), want in d2_table.items():
            assert chain.value(2, at(la), at(lb)) == want
        assert chain.value(3, at("x"), at("y")) == d3_root
        assert d3_root == eps - eps * eps

    def test_levels_are_monotone_pseudometrics(self):
        chain = behavioural_distance(skewed_twin(F(1, 4)), None, 3)
        assert chain.depth == 3
        for level in chain.levels:
            assert level.first_violation() is None
        for m in range(3):
            lo, hi = chain.levels[m], chain.levels[m + 1]
            for i in range(lo.size):
                for j in range(lo.size):
                    assert lo.value(i, j) <= hi.value(i, j)

    def test_two_system_form_matches_self_union(self, twin_chain_w):
        fair, biased = skewed_halves(F(1, 4))
        chain = behavioural_distance(fair, biased, 3)
        assert chain.offsets == [0, 5]
        assert chain.cross(3, 0, 0) == F(3, 16)
        assert chain.levels == twin_chain_w.levels

    def test_methods_agree_level_by_level(self, twin_chain_w, twin_chain_k):
        assert twin_chain_w.levels == twin_chain_k.levels

    def test_stored_couplings_are_optimal(self, twin_chain_w):
        chain = twin_chain_w
        gaps = atom_gap_matrix(chain.system)
        for (m, i, j), plan in chain.couplings.items():
            pi1, pi2 = chain.system.successors[i], chain.system.successors[j]
            assert plan.first_violation(pi1, pi2) is None
            lifted = plan.cost(chain.levels[m])
            assert max(gaps.value(i, j), lifted) == chain.value(m + 1, i, j)

    def test_stored_prices_are_optimal(self, twin_chain_k):
        chain = twin_chain_k
        gaps = atom_gap_matrix(chain.system)
        for (m, i, j), price in chain.prices.items():
            pi1, pi2 = chain.system.successors[i], chain.system.successors[j]
            assert price.first_violation(chain.levels[m]) is None
            lifted = price.gap(pi1, pi2)
            assert max(gaps.value(i, j), lifted) == chain.value(m + 1, i, j)

    def test_coupling_accessor_directions(self, twin_quarter, twin_chain_w):
        at = twin_quarter.state_by_label
        x1, y1 = at("x1"), at("y1")
        forward = twin_chain_w.coupling(2, x1, y1)
        backward = twin_chain_w.coupling(2, y1, x1)
        assert backward.weights == forward.transpose().weights

    def test_diagonal_coupling_is_the_identity(self, twin_quarter, twin_chain_w):
        x1 = twin_quarter.state_by_label("x1")
        ident = twin_chain_w.coupling(0, x1, x1)
        assert ident.first_violation(
            twin_quarter.successors[x1], twin_quarter.successors[x1]
        ) is None
        assert all(i == j for i, j in ident.weights)

    def test_diagonal_coupling_of_terminating_state_rejected(
        self, twin_quarter, twin_chain_w
    ):
        x3 = twin_quarter.state_by_label("x3")
        with pytest.raises(ParameterError, match="terminating"):
            twin_chain_w.coupling(0, x3, x3)

    def test_depth_zero_chain(self):
        chain = behavioural_distance(skewed_twin(F(0)), None, 0)
        assert chain.depth == 0
        assert chain.levels[0].value(0, 5) == 0

    def test_parameter_validation(self):
        twin = skewed_twin(F(0))
        with pytest.raises(ParameterError):
            behavioural_distance(twin, None, -1)
        with pytest.raises(ParameterError, match="method"):
            behavioural_distance(twin, None, 1, method="X")
        other = build_system(["p"], [("a", {}, None)])
        with pytest.raises(AtomMismatchError):
            behavioural_distance(twin, other, 1)

    def test_method_name_is_case_insensitive(self):
        chain = behavioural_distance(skewed_twin(F(0)), None, 1, method="w")
        assert chain.method == "W"


class TestAtomGaps:
    def test_frozen_gaps(self):
        sys_a = build_system(
            ["p", "q"],
            [
                ("a", {"p": F(1)}, None),
                ("b", {"p": F(1, 2), "q": F(1, 4)}, None),
                ("c", {}, None),
            ],
        )
        gaps = atom_gap_matrix(sys_a)
        assert gaps.value(0, 1) == F(1, 2)
        assert gaps.value(0, 2) == F(1)
        assert gaps.value(1, 2) == F(1, 2)
        assert gaps.first_violation() is None


class TestLogicalLowerBound:
    def test_two_step_stopping_formula_is_a_tight_witness(self):
        # <><>[]0 reads off the probability of stopping after exactly two
        # steps: 1/4 on the fair side, 1/16 on the biased one. Its gap meets
        # the depth-3 distance 3/16, so the logical bound is tight here.
        fair, biased = skewed_halves(F(1, 4))
        two_step_stop = parse_modal("<><>[]0")
        got = logical_distance_lb(fair, biased, 0, 0, [two_step_stop], 3)
        assert got == F(3, 16)

    def test_maximum_over_formulas(self):
        fair, biased = skewed_halves(F(1, 4))
        formulas = [parse_modal("0"), parse_modal("<>[]0"), parse_modal("<><>[]0")]
        assert logical_distance_lb(fair, biased, 0, 0, formulas, 3) == F(3, 16)

    def test_rank_violation_rejected(self):
        fair, biased = skewed_halves(F(1, 4))
        with pytest.raises(RankViolationError, match="rank 3"):
            logical_distance_lb(fair, biased, 0, 0, [parse_modal("<><>[]0")], 2)
