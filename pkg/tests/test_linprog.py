"""Exact simplex and transport solver against brute-force and float oracles."""

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from ptsm.linprog import LPError, solve_lp, solve_transport

from oracles import transport_2x2, transport_enumerate

F = Fraction


class TestSolveLP:
    def test_bounded_maximization(self):
        # max x + y with x <= 1/2, y <= 1/3
        res = solve_lp(
            [F(1), F(1)],
            a_ub=[[F(1), F(0)], [F(0), F(1)]],
            b_ub=[F(1, 2), F(1, 3)],
            maximize=True,
        )
        assert res.status == "optimal"
        assert res.value == F(5, 6)
        assert res.solution == [F(1, 2), F(1, 3)]

    def test_equality_constraints(self):
        # min 2x + 3y with x + y = 1
        res = solve_lp([F(2), F(3)], a_eq=[[F(1), F(1)]], b_eq=[F(1)])
        assert res.status == "optimal"
        assert res.value == F(2)
        assert res.solution == [F(1), F(0)]

    def test_unbounded_detected(self):
        res = solve_lp([F(1)], maximize=True)
        assert res.status == "unbounded"
        assert res.value is None

    def test_infeasible_detected(self):
        # x >= 0 and x = -1 cannot hold together
        res = solve_lp([F(1)], a_eq=[[F(1)]], b_eq=[F(-1)])
        assert res.status == "infeasible"

    def test_negative_rhs_inequality_is_flipped_not_rejected(self):
        # -x <= -1/2 means x >= 1/2
        res = solve_lp([F(1)], a_ub=[[F(-1)]], b_ub=[F(-1, 2)])
        assert res.status == "optimal"
        assert res.value == F(1, 2)

    def test_degenerate_ties_terminate(self):
        # many constraints active at the optimum at once
        res = solve_lp(
            [F(-1), F(-1)],
            a_ub=[[F(1), F(0)], [F(1), F(0)], [F(0), F(1)], [F(1), F(1)]],
            b_ub=[F(1), F(1), F(1), F(2)],
        )
        assert res.status == "optimal"
        assert res.value == F(-2)

    def test_width_mismatch_rejected(self):
        with pytest.raises(LPError):
            solve_lp([F(1)], a_ub=[[F(1), F(1)]], b_ub=[F(1)])

    @given(st.integers(min_value=0, max_value=10**6))
    @settings(max_examples=30, deadline=None)
    def test_agrees_with_scipy_on_random_bounded_lps(self, seed):
        scipy_opt = pytest.importorskip("scipy.optimize")
        rng = random.Random(seed)
        n = rng.randint(1, 3)
        m = rng.randint(1, 3)
        c = [F(rng.randint(-4, 4), rng.randint(1, 4)) for _ in range(n)]
        a_ub = [
            [F(rng.randint(-3, 3), rng.randint(1, 3)) for _ in range(n)]
            for _ in range(m)
        ]
        b_ub = [F(rng.randint(0, 6), rng.randint(1, 3)) for _ in range(m)]
        # box rows keep the polytope bounded whatever else was drawn
        for k in range(n):
            row = [F(0)] * n
            row[k] = F(1)
            a_ub.append(row)
            b_ub.append(F(rng.randint(1, 3)))
        res = solve_lp(c, a_ub=a_ub, b_ub=b_ub)
        assert res.status == "optimal"
        ref = scipy_opt.linprog(
            [float(v) for v in c],
            A_ub=[[float(v) for v in row] for row in a_ub],
            b_ub=[float(v) for v in b_ub],
            bounds=[(0, None)] * n,
            method="highs",
        )
        assert ref.status == 0
        assert abs(float(res.value) - ref.fun) < 1e-9


class TestSolveTransport:
    def test_worked_2x2_instance(self):
        # marginal skew 1/4 with costs taken from a depth-2 distance table
        costs = [[F(1, 4), F(1, 2)], [F(1, 4), F(0)]]
        value, plan = solve_transport(
            costs, [F(1, 2), F(1, 2)], [F(1, 4), F(3, 4)]
        )
        assert value == F(3, 16)
        assert transport_2x2(costs, [F(1, 2), F(1, 2)], [F(1, 4), F(3, 4)]) == value
        # the plan is a feasible coupling achieving the value
        assert [sum(row) for row in plan] == [F(1, 2), F(1, 2)]
        assert [plan[0][j] + plan[1][j] for j in range(2)] == [F(1, 4), F(3, 4)]
        assert sum(costs[i][j] * plan[i][j] for i in range(2) for j in range(2)) == value

    def test_frozen_3x3_instance(self):
        costs = [
            [F(0), F(1, 3), F(1)],
            [F(1, 3), F(0), F(1, 2)],
            [F(1), F(1, 2), F(0)],
        ]
        supply = [F(1, 2), F(1, 3), F(1, 6)]
        demand = [F(1, 3), F(1, 3), F(1, 3)]
        # hand-checkable optimum: route the expensive sixth of supply 0 to
        # demand 1 (cost 1/18) and a sixth of supply 1 to demand 2 (1/12)
        value, _ = solve_transport(costs, supply, demand)
        assert value == F(1, 18) + F(1, 12)
        assert transport_enumerate(costs, supply, demand) == value

    def test_mismatched_totals_rejected(self):
        with pytest.raises(LPError, match="totals differ"):
            solve_transport([[F(0)]], [F(1)], [F(1, 2)])

    def test_point_masses(self):
        value, plan = solve_transport([[F(2, 3)]], [F(1)], [F(1)])
        assert value == F(2, 3)
        assert plan == [[F(1)]]

    @given(st.integers(min_value=0, max_value=10**6))
    @settings(max_examples=25, deadline=None)
    def test_agrees_with_enumeration_on_small_instances(self, seed):
        rng = random.Random(seed)
        s, d = rng.randint(1, 3), rng.randint(1, 3)
        costs = [
            [F(rng.randint(0, 4), 4) for _ in range(d)] for _ in range(s)
        ]
        den = 6
        supply = _random_split(rng, s, den)
        demand = _random_split(rng, d, den)
        value, plan = solve_transport(costs, supply, demand)
        assert value == transport_enumerate(costs, supply, demand)
        assert [sum(row, F(0)) for row in plan] == supply
        for j in range(d):
            assert sum(plan[i][j] for i in range(s)) == demand[j]
        assert all(v >= 0 for row in plan for v in row)


def _random_split(rng, k, den):
    """k positive weights with denominator den summing to one."""
    if k == 1:
        return [F(1)]
    cuts = sorted(rng.sample(range(1, den), k - 1))
    return [F(b - a, den) for a, b in zip([0] + cuts, cuts + [den])]
