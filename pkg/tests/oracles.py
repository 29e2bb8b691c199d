"""Independent reference computations used to pin expected test values.

Nothing here imports the package's LP solver or lifting code: the point is
to derive the same numbers along a different route. The 2x2 transport
oracle exploits the single degree of freedom of a 2x2 plan; the general
one enumerates integral plans after clearing denominators, which is sound
because the transport polytope with integer marginals has integral
vertices. Float LPs (scipy) serve as a third, approximate route.
"""
from fractions import Fraction
from itertools import product

ZERO = Fraction(0)


def transport_2x2(costs, supply, demand):
    """Exact optimum for at most 2x2 transport via the free parameter.

    With supplies (s1, s2) and demands (d1, d2), a plan is determined by
    t = mass on cell (0, 0), feasible on an interval; the cost is linear
    in t so an endpoint is optimal.
    """
    if len(supply) == 1:
        return sum(costs[0][j] * demand[j] for j in range(len(demand)))
    if len(demand) == 1:
        return sum(costs[i][0] * supply[i] for i in range(len(supply)))
    s1, _ = supply
    d1, d2 = demand
    lo = max(ZERO, s1 - d2)
    hi = min(s1, d1)
    assert lo <= hi, "infeasible marginals"
    best = None
    for t in (lo, hi):
        plan = ((t, s1 - t), (d1 - t, supply[1] - (d1 - t)))
        cost = sum(
            costs[i][j] * plan[i][j] for i in range(2) for j in range(2)
        )
        best = cost if best is None else min(best, cost)
    return best


def transport_enumerate(costs, supply, demand):
    """Exact optimum by enumerating integral plans on the common grid.

    Only usable when the common denominator is small; intended for pinning
    values on handcrafted instances, not for speed.
    """
    denom = 1
    for q in list(supply) + list(demand):
        denom = denom * q.denominator // _gcd(denom, q.denominator)
    s = [int(q * denom) for q in supply]
    d = [int(q * denom) for q in demand]
    m, n = len(s), len(d)
    best = [None]

    def go(i, remaining_demand, acc):
        if best[0] is not None and acc >= best[0]:
            return
        if i == m:
            if all(r == 0 for r in remaining_demand):
                best[0] = acc if best[0] is None else min(best[0], acc)
            return
        for split in _compositions(s[i], n):
            if all(split[j] <= remaining_demand[j] for j in range(n)):
                extra = sum(
                    Fraction(split[j], denom) * costs[i][j] for j in range(n)
                )
                go(
                    i + 1,
                    [remaining_demand[j] - split[j] for j in range(n)],
                    acc + extra,
                )

    go(0, d, ZERO)
    assert best[0] is not None, "infeasible marginals"
    return best[0]


def _compositions(total, parts):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


def kantorovich_enumerate(metric_rows, pi1, pi2, grid_denom=24):
    """Approximate dual optimum by brute force over grid-valued functions.

    Checks every function with values in {0, 1/g, ..., 1} on the support
    union, keeping the non-expansive ones. The true optimum is attained at
    a vertex whose coordinates lie in the additive group generated by the
    metric entries and 1, so with a grid refining those entries the result
    is exact.
    """
    support = sorted(set(pi1) | set(pi2))
    levels = [Fraction(k, grid_denom) for k in range(grid_denom + 1)]
    best = ZERO
    for values in product(levels, repeat=len(support)):
        f = dict(zip(support, values))
        ok = True
        for x in support:
            for y in support:
                if f[x] - f[y] > metric_rows[x][y]:
                    ok = False
                    break
            if not ok:
                break
        if not ok:
            continue
        gap = abs(
            sum(w * f[s] for s, w in pi1.items())
            - sum(w * f[s] for s, w in pi2.items())
        )
        best = max(best, gap)
    return best


def skewed_twin_tables(eps):
    """Depth-2 and depth-3 distances of the skewed twin, derived from the
    2x2 transport oracle and the termination rules only."""
    eps = Fraction(eps)
    half = Fraction(1, 2)
    # depth-1: atomless, so only termination separates; x3/y3 are the
    # terminating states, every other state is transient.
    def d1(term_a, term_b):
        return ZERO if term_a == term_b else Fraction(1)

    # x1 -> {x3: 1/2, x4: 1/2}, y1 -> {y3: 1/2 - eps, y4: 1/2 + eps}
    # with d1(x3, y4) = d1(x4, y3) = 1, d1(x3, y3) = d1(x4, y4) = 0.
    costs = ((ZERO, Fraction(1)), (Fraction(1), ZERO))
    if eps == half:
        d2_x1y1 = transport_2x2(
            ((Fraction(1),), (ZERO,)), (half, half), (Fraction(1),)
        )
    else:
        d2_x1y1 = transport_2x2(costs, (half, half), (half - eps, half + eps))
    # x1 vs y2 (self-loop): successors {x3, x4} vs {y2}, d1 = (1, 0)
    d2_x1y2 = transport_2x2(((Fraction(1),), (ZERO,)), (half, half), (Fraction(1),))
    # x2 (self-loop) vs y1: d1(x2, y3) = 1, d1(x2, y4) = 0
    if eps == half:
        d2_x2y1 = ZERO
    else:
        d2_x2y1 = transport_2x2(
            ((Fraction(1), ZERO),), (Fraction(1),), (half - eps, half + eps)
        )
    d2_x2y2 = ZERO
    # x vs y at depth 3 using the depth-2 table just derived
    cost3 = ((d2_x1y1, d2_x1y2), (d2_x2y1, d2_x2y2))
    if eps == half:
        d3 = transport_2x2(
            ((d2_x1y2,), (d2_x2y2,)), (half, half), (Fraction(1),)
        )
    else:
        d3 = transport_2x2(cost3, (half, half), (half - eps, half + eps))
    return {
        ("x1", "y1"): d2_x1y1,
        ("x1", "y2"): d2_x1y2,
        ("x2", "y1"): d2_x2y1,
        ("x2", "y2"): d2_x2y2,
    }, d3
