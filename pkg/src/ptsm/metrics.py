"""Behavioural pseudometrics via transport plans and price functions.

The depth-indexed distance chain starts at the zero matrix and alternates
taking the atom-value gap with a lifting of the previous level to successor
distributions. Two independent liftings are implemented:

* wasserstein_lift: minimum expected distance over exact couplings of the
  two distributions (primal transport LP);
* kantorovich_lift: maximum gap of expectations over non-expansive price
  functions into [0, 1] (dual LP).

Their values agree on every input; duality_gap recomputes both and reports
the difference, which the test suite pins to zero. Termination is handled
by the one-point extension: two terminating states are at distance 0, a
terminating state is at distance 1 from every distribution.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from .errors import LPError, ParameterError, RankViolationError
from .evaluator import eval_modal
from .formula import modal_rank
from .linprog import solve_lp, solve_transport
from .rational import ONE, ZERO
from .system import StateId, TransitionSystem, disjoint_union

Dist = Optional[Mapping[StateId, Fraction]]  # None encodes termination


@dataclass(frozen=True)
class PseudometricMatrix:
    """Symmetric matrix of exact distances in [0, 1] with zero diagonal."""

    labels: tuple[str, ...]
    rows: tuple[tuple[Fraction, ...], ...]

    @property
    def size(self) -> int:
        return len(self.labels)

    def value(self, i: StateId, j: StateId) -> Fraction:
        return self.rows[i][j]

    @classmethod
    def zero(cls, labels) -> "PseudometricMatrix":
        n = len(labels)
        return cls(tuple(labels), tuple((ZERO,) * n for _ in range(n)))

    @classmethod
    def from_rows(cls, labels, rows) -> "PseudometricMatrix":
        return cls(tuple(labels), tuple(tuple(r) for r in rows))

    def first_violation(self) -> Optional[str]:
        """Pseudometric axiom check over all entries and triples."""
        n = self.size
        for i in range(n):
            if self.rows[i][i] != ZERO:
                return f"nonzero diagonal at {self.labels[i]}"
            for j in range(n):
                v = self.rows[i][j]
                if v < ZERO or v > ONE:
                    return f"entry ({self.labels[i]}, {self.labels[j]}) outside [0, 1]"
                if v != self.rows[j][i]:
                    return f"asymmetry at ({self.labels[i]}, {self.labels[j]})"
        for i in range(n):
            for j in range(n):
                rij = self.rows[i][j]
                for k in range(n):
                    if rij > self.rows[i][k] + self.rows[k][j]:
                        return (
                            "triangle violation at "
                            f"({self.labels[i]}, {self.labels[j]}, {self.labels[k]})"
                        )
        return None


@dataclass(frozen=True)
class Coupling:
    """A joint distribution with prescribed marginals, sparse form."""

    weights: Mapping[tuple[StateId, StateId], Fraction]

    def cost(self, d: PseudometricMatrix) -> Fraction:
        return sum((w * d.value(i, j) for (i, j), w in self.weights.items()), ZERO)

    def transpose(self) -> "Coupling":
        return Coupling({(j, i): w for (i, j), w in self.weights.items()})

    def support(self):
        return sorted(self.weights)

    def first_violation(self, pi1: Dist, pi2: Dist) -> Optional[str]:
        """Check positivity and both marginals exactly."""
        left: dict[StateId, Fraction] = {}
        right: dict[StateId, Fraction] = {}
        for (i, j), w in self.weights.items():
            if w <= ZERO:
                return f"non-positive weight at ({i}, {j})"
            left[i] = left.get(i, ZERO) + w
            right[j] = right.get(j, ZERO) + w
        if left != {k: v for k, v in (pi1 or {}).items()}:
            return "left marginal mismatch"
        if right != {k: v for k, v in (pi2 or {}).items()}:
            return "right marginal mismatch"
        return None


@dataclass(frozen=True)
class PriceFunction:
    """Witness for the dual lift: non-expansive values in [0, 1] on the
    union of the two supports."""

    values: Mapping[StateId, Fraction]

    def gap(self, pi1: Dist, pi2: Dist) -> Fraction:
        total = ZERO
        for s, w in (pi1 or {}).items():
            total += w * self.values[s]
        for s, w in (pi2 or {}).items():
            total -= w * self.values[s]
        return abs(total)

    def first_violation(self, d: PseudometricMatrix) -> Optional[str]:
        pts = sorted(self.values)
        for x in pts:
            v = self.values[x]
            if v < ZERO or v > ONE:
                return f"value at {x} outside [0, 1]"
        for x in pts:
            for y in pts:
                if self.values[x] - self.values[y] > d.value(x, y):
                    return f"expansive on ({x}, {y})"
        return None


def _term_cases(pi1: Dist, pi2: Dist):
    if pi1 is None and pi2 is None:
        return ZERO
    if pi1 is None or pi2 is None:
        return ONE
    return None


def wasserstein_lift(d: PseudometricMatrix, pi1: Dist, pi2: Dist):
    """Primal lift: min integral of d over couplings; returns (value, plan).

    The plan is None in the termination cases, where no coupling exists.
    """
    quick = _term_cases(pi1, pi2)
    if quick is not None:
        return quick, None
    if dict(pi1) == dict(pi2):
        return ZERO, Coupling({(s, s): w for s, w in pi1.items()})
    s1 = sorted(pi1)
    s2 = sorted(pi2)
    if all(d.value(i, j) == ZERO for i in s1 for j in s2):
        return ZERO, _northwest_coupling(pi1, pi2, s1, s2)
    costs = [[d.value(i, j) for j in s2] for i in s1]
    value, plan = solve_transport(
        costs, [pi1[i] for i in s1], [pi2[j] for j in s2]
    )
    weights = {}
    for a, i in enumerate(s1):
        for b, j in enumerate(s2):
            if plan[a][b] > ZERO:
                weights[(i, j)] = plan[a][b]
    return value, Coupling(weights)


def _northwest_coupling(pi1, pi2, s1, s2) -> Coupling:
    # Greedy matching in sorted order; when the marginals are translates of
    # one another this degenerates to the 1:1 pairing.
    weights = {}
    a, b = 0, 0
    left = pi1[s1[0]]
    right = pi2[s2[0]]
    while True:
        take = min(left, right)
        if take > ZERO:
            weights[(s1[a], s2[b])] = take
        left -= take
        right -= take
        if left == ZERO:
            a += 1
            if a == len(s1):
                break
            left = pi1[s1[a]]
        if right == ZERO:
            b += 1
            if b == len(s2):
                break
            right = pi2[s2[b]]
    return Coupling(weights)


def kantorovich_lift(d: PseudometricMatrix, pi1: Dist, pi2: Dist):
    """Dual lift: max |E_pi1 f - E_pi2 f| over non-expansive f into [0, 1].

    Because both marginals have total mass one, f -> 1 - f maps the feasible
    polytope onto itself and negates the objective, so one LP sign suffices;
    its optimum already equals the maximum absolute gap. Returns
    (value, price function), the latter None in the termination cases.
    """
    quick = _term_cases(pi1, pi2)
    if quick is not None:
        return quick, None
    support = sorted(set(pi1) | set(pi2))
    # Quotient by zero distance: non-expansive functions are constant on the
    # classes, which shrinks the LP and removes its equality constraints.
    parent = {s: s for s in support}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i in support:
        for j in support:
            if i < j and d.value(i, j) == ZERO:
                parent[find(j)] = find(i)
    reps = sorted({find(s) for s in support})
    idx = {r: k for k, r in enumerate(reps)}
    nvar = len(reps)
    coeff = [ZERO] * nvar
    for s, w in pi1.items():
        coeff[idx[find(s)]] += w
    for s, w in pi2.items():
        coeff[idx[find(s)]] -= w
    a_ub = []
    b_ub = []
    for x in reps:
        for y in reps:
            if x == y:
                continue
            dxy = d.value(x, y)
            if dxy < ONE:
                row = [ZERO] * nvar
                row[idx[x]] = ONE
                row[idx[y]] = -ONE
                a_ub.append(row)
                b_ub.append(dxy)
    for k in range(nvar):
        row = [ZERO] * nvar
        row[k] = ONE
        a_ub.append(row)
        b_ub.append(ONE)
    res = solve_lp(coeff, a_ub=a_ub, b_ub=b_ub, maximize=True)
    if res.status != "optimal":
        raise LPError(f"price LP unexpectedly {res.status}")
    values = {s: res.solution[idx[find(s)]] for s in support}
    price = PriceFunction(values)
    bad = price.first_violation(d)
    if bad is not None:
        raise LPError(f"price LP produced an invalid witness: {bad}")
    if price.gap(pi1, pi2) != res.value:
        raise LPError("price LP value does not match its witness")
    return res.value, price


def duality_gap(d: PseudometricMatrix, pi1: Dist, pi2: Dist) -> Fraction:
    """|primal - dual| for one lifting instance; exactly 0 when both solvers
    are correct. Kept as a runtime oracle rather than an assertion."""
    w, _ = wasserstein_lift(d, pi1, pi2)
    k, _ = kantorovich_lift(d, pi1, pi2)
    return abs(w - k)


# ---------------------------------------------------------------------------
# Distance chains


@dataclass
class DistanceChain:
    """Levels d_0 .. d_n on the disjoint union of the compared systems.

    couplings[(m, i, j)] (method W) holds the optimal plan used to lift
    level m at the pair i < j; prices[(m, i, j)] (method K) the optimal
    price function. Cross-system pairs are addressed through offsets.
    """

    system: TransitionSystem
    offsets: list[int]
    method: str
    levels: list[PseudometricMatrix]
    couplings: dict = field(default_factory=dict)
    prices: dict = field(default_factory=dict)

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    def value(self, m: int, i: StateId, j: StateId) -> Fraction:
        return self.levels[m].value(i, j)

    def cross(self, m: int, a: StateId, b: StateId) -> Fraction:
        """Distance between state a of part 0 and state b of the last part."""
        return self.levels[m].value(self.offsets[0] + a, self.offsets[-1] + b)

    def coupling(self, m: int, i: StateId, j: StateId) -> Coupling:
        if i == j:
            # Diagonal pairs are never solved as LPs; the identity coupling
            # is optimal at cost zero.
            dist = self.system.successors[i]
            if dist is None:
                raise ParameterError(
                    f"state {self.system.labels[i]!r} is terminating; no coupling"
                )
            return Coupling({(s, s): w for s, w in dist.items()})
        if i < j:
            return self.couplings[(m, i, j)]
        return self.couplings[(m, j, i)].transpose()

    def price(self, m: int, i: StateId, j: StateId) -> PriceFunction:
        return self.prices[(m, min(i, j), max(i, j))]


def atom_gap_matrix(system: TransitionSystem) -> PseudometricMatrix:
    """Max atom-value gap per state pair; the depth-1 distance when lifted
    distributions cannot separate anything yet."""
    n = system.n_states
    rows = [[ZERO] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            g = ZERO
            for p in system.atoms:
                g = max(g, abs(system.atom_value(i, p) - system.atom_value(j, p)))
            rows[i][j] = rows[j][i] = g
    return PseudometricMatrix.from_rows(system.labels, rows)


def behavioural_distance(
    sys_a: TransitionSystem,
    sys_b: Optional[TransitionSystem],
    n: int,
    method: str = "W",
) -> DistanceChain:
    """Compute the chain d_0 .. d_n on the disjoint union.

    method 'W' lifts by optimal transport and stores the plans, 'K' by the
    dual price LP and stores the price functions. The chain is monotone in
    the depth and every level is a pseudometric; both facts are exact.
    """
    if n < 0:
        raise ParameterError("depth must be non-negative")
    method = method.upper()
    if method not in ("W", "K"):
        raise ParameterError(f"unknown lifting method {method!r}")
    parts = [sys_a] if sys_b is None else [sys_a, sys_b]
    union, offsets = disjoint_union(parts)
    size = union.n_states
    gaps = atom_gap_matrix(union)
    chain = DistanceChain(union, offsets, method, [PseudometricMatrix.zero(union.labels)])
    for m in range(n):
        prev = chain.levels[m]
        rows = [[ZERO] * size for _ in range(size)]
        for i in range(size):
            pi_i = union.successors[i]
            for j in range(i + 1, size):
                if method == "W":
                    lifted, cert = wasserstein_lift(prev, pi_i, union.successors[j])
                    if cert is not None:
                        chain.couplings[(m, i, j)] = cert
                else:
                    lifted, cert = kantorovich_lift(prev, pi_i, union.successors[j])
                    if cert is not None:
                        chain.prices[(m, i, j)] = cert
                v = max(gaps.value(i, j), lifted)
                rows[i][j] = rows[j][i] = v
        chain.levels.append(PseudometricMatrix.from_rows(union.labels, rows))
    return chain


def logical_distance_lb(
    sys_a: TransitionSystem,
    sys_b: TransitionSystem,
    a: StateId,
    b: StateId,
    formulas: Sequence,
    n: int,
) -> Fraction:
    """Best separation achieved by the given rank <= n modal formulas.

    A lower bound for d_n(a, b); the bound is tight for witnesses produced
    by the approximation module, up to their stated slack.
    """
    best = ZERO
    for formula in formulas:
        r = modal_rank(formula)
        if r > n:
            raise RankViolationError(
                f"formula of rank {r} exceeds the depth bound {n}"
            )
        va = eval_modal(sys_a, formula, a)
        vb = eval_modal(sys_b, formula, b)
        best = max(best, abs(va - vb))
    return best
