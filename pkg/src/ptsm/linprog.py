"""Exact rational linear programming via a two-phase tableau simplex.

Everything runs over fractions.Fraction; there is no floating point and no
tolerance anywhere. Bland's rule (smallest eligible index, ties on the
leaving side broken by smallest basic index) guarantees termination on the
degenerate transport polytopes this package produces.

The instances are small (tens of variables), so a dense tableau is the
simplest robust choice; rows with a zero pivot-column entry are skipped
during elimination, which is where those tableaux are actually sparse.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .errors import LPError
from .rational import ONE, ZERO


@dataclass
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    value: Optional[Fraction]
    solution: Optional[list[Fraction]]


def solve_lp(
    objective: Sequence[Fraction],
    a_ub: Sequence[Sequence[Fraction]] = (),
    b_ub: Sequence[Fraction] = (),
    a_eq: Sequence[Sequence[Fraction]] = (),
    b_eq: Sequence[Fraction] = (),
    maximize: bool = False,
) -> LPResult:
    """Solve min (or max) c.x subject to a_ub.x <= b_ub, a_eq.x = b_eq, x >= 0."""
    n = len(objective)
    c = [Fraction(v) for v in objective]
    if maximize:
        c = [-v for v in c]
    rows = []
    kinds = []
    for a, b in zip(a_ub, b_ub, strict=True):
        rows.append([Fraction(v) for v in a])
        kinds.append("ub")
    for a, b in zip(a_eq, b_eq, strict=True):
        rows.append([Fraction(v) for v in a])
        kinds.append("eq")
    rhs = [Fraction(b) for b in list(b_ub) + list(b_eq)]
    for row in rows:
        if len(row) != n:
            raise LPError("constraint width does not match objective length")

    m = len(rows)
    n_slack = sum(1 for k in kinds if k == "ub")
    width = n + n_slack

    # Build [A | slacks | rhs]; then flip rows to make rhs non-negative.
    tab = []
    slack_at = {}
    si = 0
    for i in range(m):
        row = rows[i] + [ZERO] * n_slack + [rhs[i]]
        if kinds[i] == "ub":
            row[n + si] = ONE
            slack_at[i] = n + si
            si += 1
        tab.append(row)
    for i in range(m):
        if tab[i][-1] < ZERO:
            tab[i] = [-v for v in tab[i]]

    # Initial basis: slack columns that survived un-flipped, artificials
    # elsewhere.
    basis = [-1] * m
    art_cols = []
    for i in range(m):
        j = slack_at.get(i)
        if j is not None and tab[i][j] == ONE:
            basis[i] = j
    for i in range(m):
        if basis[i] == -1:
            col = width + len(art_cols)
            art_cols.append(col)
            for r in range(m):
                tab[r].insert(-1, ONE if r == i else ZERO)
            basis[i] = col
    total = width + len(art_cols)

    if art_cols:
        # Phase 1: minimize the sum of artificials.
        cost1 = [ZERO] * total
        for j in art_cols:
            cost1[j] = ONE
        val = _run_simplex(tab, basis, cost1, total)
        if val != ZERO:
            return LPResult("infeasible", None, None)
        _drive_out_artificials(tab, basis, width)

    art_set = set(art_cols)
    cost2 = c + [ZERO] * (total - n)
    for j in art_set:
        cost2[j] = None  # blocked column marker
    outcome = _run_simplex(tab, basis, cost2, total, blocked=art_set)
    if outcome == "unbounded":
        return LPResult("unbounded", None, None)
    solution = [ZERO] * n
    for i, j in enumerate(basis):
        if j < n:
            solution[j] = tab[i][-1]
    value = sum((ci * xi for ci, xi in zip(c, solution)), ZERO)
    if maximize:
        value = -value
    return LPResult("optimal", value, solution)


def _reduced_costs(tab, basis, cost, total, blocked):
    red = []
    for j in range(total):
        if j in blocked:
            red.append(None)
            continue
        r = cost[j]
        for i, b in enumerate(basis):
            cb = cost[b]
            if cb and tab[i][j]:
                r -= cb * tab[i][j]
        red.append(r)
    return red


def _run_simplex(tab, basis, cost, total, blocked=frozenset()):
    """Minimize cost over the tableau in place; returns objective value
    or the string 'unbounded'."""
    m = len(tab)
    # Objective row maintained by pivoting: z[j] = reduced cost, z[-1] = -value.
    z = _reduced_costs(tab, basis, cost, total, blocked)
    zval = ZERO
    for i, b in enumerate(basis):
        if cost[b]:
            zval += cost[b] * tab[i][-1]
    while True:
        enter = -1
        for j in range(total):
            if z[j] is not None and z[j] < ZERO:
                enter = j
                break
        if enter == -1:
            return zval if not isinstance(zval, str) else zval
        leave = -1
        best = None
        for i in range(m):
            a = tab[i][enter]
            if a > ZERO:
                ratio = tab[i][-1] / a
                if best is None or ratio < best or (
                    ratio == best and basis[i] < basis[leave]
                ):
                    best = ratio
                    leave = i
        if leave == -1:
            return "unbounded"
        zval += z[enter] * best
        _pivot(tab, basis, leave, enter, z)


def _pivot(tab, basis, leave, enter, z):
    m = len(tab)
    piv_row = tab[leave]
    p = piv_row[enter]
    if p != ONE:
        tab[leave] = piv_row = [v / p for v in piv_row]
    for i in range(m):
        if i == leave:
            continue
        f = tab[i][enter]
        if f:
            tab[i] = [a - f * b for a, b in zip(tab[i], piv_row)]
    f = z[enter]
    if f:
        for j in range(len(z)):
            if z[j] is not None:
                z[j] -= f * piv_row[j]
    basis[leave] = enter


def _drive_out_artificials(tab, basis, width):
    """Pivot basic artificials (value 0) onto real columns; drop dead rows."""
    i = 0
    while i < len(tab):
        if basis[i] < width:
            i += 1
            continue
        enter = next((j for j in range(width) if tab[i][j] != ZERO), None)
        if enter is None:
            del tab[i]
            del basis[i]
            continue
        _pivot(tab, basis, i, enter, [None] * (len(tab[i]) - 1))
        i += 1


def solve_transport(
    costs: Sequence[Sequence[Fraction]],
    supply: Sequence[Fraction],
    demand: Sequence[Fraction],
):
    """Minimum-cost transport plan between two exact distributions.

    Returns (value, plan) with plan[i][j] the mass moved from supply point i
    to demand point j. Total supply must equal total demand exactly.
    """
    s, d = len(supply), len(demand)
    if sum(supply, ZERO) != sum(demand, ZERO):
        raise LPError("supply and demand totals differ")
    n = s * d
    obj = [costs[i][j] for i in range(s) for j in range(d)]
    a_eq = []
    b_eq = []
    for i in range(s):
        row = [ZERO] * n
        for j in range(d):
            row[i * d + j] = ONE
        a_eq.append(row)
        b_eq.append(supply[i])
    # One demand constraint is implied by the others; dropping it removes the
    # rank deficiency before phase 1 ever sees it.
    for j in range(d - 1):
        row = [ZERO] * n
        for i in range(s):
            row[i * d + j] = ONE
        a_eq.append(row)
        b_eq.append(demand[j])
    res = solve_lp(obj, a_eq=a_eq, b_eq=b_eq)
    if res.status != "optimal":
        raise LPError(f"transport LP unexpectedly {res.status}")
    plan = [[res.solution[i * d + j] for j in range(d)] for i in range(s)]
    return res.value, plan
