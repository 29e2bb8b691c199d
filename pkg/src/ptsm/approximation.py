"""Constructive approximation of non-expansive state functions by formulas.

Three mutually recursive synthesis steps, each with an explicit exact slack
budget:

* witness(a, b, m, delta): a rank <= m formula separating a from b by at
  least d_m(a, b) - delta. Atom gaps and one-sided termination are handled
  directly; otherwise the optimal price function of the underlying lift is
  approximated one level down and wrapped in the expectation modality,
  which loses at most the sup-norm error on each side.
* approximate(f, m, gamma): a rank <= m formula within gamma of f in sup
  norm, assembled as max over states x of min over y of pair formulas, the
  finite lattice version of Stone-Weierstrass.
* pair(f, x, y, delta): a rank <= m formula matching f at the two states x
  and y up to delta, built by shifting and clipping a separating witness
  with constants rounded to a grid of delta / (4 |A|), which keeps
  denominators bounded.

The budget halves at each step, so level m - 1 runs at an eighth of the
level-m budget. Every synthesized formula is re-checked by exact evaluation
before it leaves the synthesizer; formulas are hash-consed so shared
subterms are shared objects, and construction order is deterministic.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Mapping, Optional, Sequence

from .errors import LPError, NonExpansiveError, ParameterError, SlackTooSmallError
from .evaluator import eval_modal_all
from .formula import And, Atom, Const, Diamond, ModalFormula, Neg, Or, TruncSub
from .metrics import (
    DistanceChain,
    PseudometricMatrix,
    behavioural_distance,
    kantorovich_lift,
)
from .rational import ONE, ZERO, ceil_to_grid, floor_to_grid, format_rational, nearest_grid
from .system import StateId, TransitionSystem


class StateFunction:
    """A [0, 1]-valued state vector that is non-expansive for a depth level.

    base_depth records the level; non-expansivity against the supplied
    metric (the matching chain level) is checked on construction.
    """

    def __init__(self, values: Sequence[Fraction], base_depth: int, metric: PseudometricMatrix):
        values = tuple(Fraction(v) for v in values)
        if len(values) != metric.size:
            raise ParameterError(
                f"{len(values)} values for a metric on {metric.size} states"
            )
        if base_depth < 0:
            raise ParameterError("base_depth must be non-negative")
        for v in values:
            if v < ZERO or v > ONE:
                raise NonExpansiveError(
                    f"state value {format_rational(v)} outside [0, 1]"
                )
        for i in range(len(values)):
            for j in range(i + 1, len(values)):
                if abs(values[i] - values[j]) > metric.value(i, j):
                    raise NonExpansiveError(
                        f"gap at ({metric.labels[i]}, {metric.labels[j]}) exceeds "
                        f"their distance {format_rational(metric.value(i, j))}"
                    )
        self.values = values
        self.base_depth = base_depth

    def __repr__(self):
        vals = ", ".join(format_rational(v) for v in self.values)
        return f"StateFunction([{vals}], base_depth={self.base_depth})"


def mcshane_extend(metric: PseudometricMatrix, partial: Mapping[StateId, Fraction]):
    """Extend values given on a subset to all states, non-expansively.

    Uses the clipped lower McShane extension min(1, min_y f(y) + d(x, y)),
    which agrees with f on its domain and preserves [0, 1] bounds. The
    partial function must itself be non-expansive on its domain.
    """
    if not partial:
        raise ParameterError("cannot extend an empty partial function")
    for x, v in partial.items():
        if v < ZERO or v > ONE:
            raise NonExpansiveError("partial value outside [0, 1]")
    for x in partial:
        for y in partial:
            if partial[x] - partial[y] > metric.value(x, y):
                raise NonExpansiveError(
                    f"partial function expansive on ({x}, {y})"
                )
    out = []
    for x in range(metric.size):
        if x in partial:
            out.append(partial[x])
        else:
            out.append(
                min(
                    ONE,
                    min(partial[y] + metric.value(x, y) for y in partial),
                )
            )
    return tuple(out)


class FormulaSynthesizer:
    """Shared-cache synthesis driver bound to one transport chain.

    The chain fixes the system (a disjoint union when two systems are
    compared) and all distance levels. Separating witnesses depend only on
    (pair, level, budget), so they are cached and reused across every
    approximation run on the same chain; optimal price functions are cached
    per (level, pair). Formulas are interned, making structurally equal
    synthesized subterms identical objects.
    """

    def __init__(self, chain: DistanceChain):
        if chain.method != "W":
            raise ParameterError("synthesis needs a transport (method W) chain")
        self.chain = chain
        self.system = chain.system
        self._intern: dict = {}
        self._values: dict[int, tuple] = {}
        self._witnesses: dict = {}
        self._prices: dict = {}
        self._zero = self._const(ZERO)
        self._one = self._const(ONE)

    # -- interned constructors ------------------------------------------

    def _get(self, key, build):
        f = self._intern.get(key)
        if f is None:
            f = build()
            self._intern[key] = f
        return f

    def _const(self, v: Fraction) -> ModalFormula:
        return self._get(("c", v), lambda: Const(v))

    def _atom(self, name: str) -> ModalFormula:
        return self._get(("p", name), lambda: Atom(name))

    def _sub(self, f: ModalFormula, amount: Fraction) -> ModalFormula:
        if amount == ZERO:
            return f
        if isinstance(f, Const):
            return self._const(max(f.value - amount, ZERO))
        return self._get(("s", id(f), amount), lambda: TruncSub(f, amount))

    def _neg(self, f: ModalFormula) -> ModalFormula:
        if isinstance(f, Const):
            return self._const(ONE - f.value)
        if isinstance(f, Neg):
            return f.sub
        return self._get(("n", id(f)), lambda: Neg(f))

    def _and(self, l: ModalFormula, r: ModalFormula) -> ModalFormula:
        if l is r:
            return l
        if isinstance(l, Const) and isinstance(r, Const):
            return self._const(min(l.value, r.value))
        for x, other in ((l, r), (r, l)):
            if isinstance(x, Const):
                if x.value == ONE:
                    return other
                if x.value == ZERO:
                    return self._zero
        return self._get(("a", id(l), id(r)), lambda: And(l, r))

    def _or(self, l: ModalFormula, r: ModalFormula) -> ModalFormula:
        if l is r:
            return l
        if isinstance(l, Const) and isinstance(r, Const):
            return self._const(max(l.value, r.value))
        for x, other in ((l, r), (r, l)):
            if isinstance(x, Const):
                if x.value == ZERO:
                    return other
                if x.value == ONE:
                    return self._one
        return self._get(("o", id(l), id(r)), lambda: Or(l, r))

    def _dia(self, f: ModalFormula) -> ModalFormula:
        return self._get(("d", id(f)), lambda: Diamond(f))

    def _min_of(self, items) -> ModalFormula:
        acc = None
        seen = set()
        for it in items:
            if id(it) in seen:
                continue
            seen.add(id(it))
            acc = it if acc is None else self._and(acc, it)
        return self._one if acc is None else acc

    def _max_of(self, items) -> ModalFormula:
        acc = None
        seen = set()
        for it in items:
            if id(it) in seen:
                continue
            seen.add(id(it))
            acc = it if acc is None else self._or(acc, it)
        return self._zero if acc is None else acc

    def values_of(self, formula: ModalFormula):
        """Exact value vector on the chain's system, cached per subterm."""
        vec = self._values.get(id(formula))
        if vec is None:
            vec = eval_modal_all(self.system, formula)
            self._values[id(formula)] = vec
        return vec

    # -- price functions -------------------------------------------------

    def price_vector(self, level: int, a: StateId, b: StateId):
        """Optimal dual price function for lifting d_level at (a, b),
        McShane-extended to every state; cached."""
        key = (level, min(a, b), max(a, b))
        vec = self._prices.get(key)
        if vec is None:
            d = self.chain.levels[level]
            value, price = kantorovich_lift(
                d, self.system.successors[key[1]], self.system.successors[key[2]]
            )
            lifted = self.chain.value(level + 1, a, b)
            if value > lifted:
                raise LPError(
                    "dual lift exceeds the chain value; the two LP routes disagree"
                )
            vec = (value, mcshane_extend(d, dict(price.values)))
            self._prices[key] = vec
        return vec

    # -- synthesis -------------------------------------------------------

    def witness(self, a: StateId, b: StateId, depth: int, delta: Fraction) -> ModalFormula:
        """Rank <= depth formula phi with |phi(a) - phi(b)| >= d_depth(a, b) - delta."""
        delta = Fraction(delta)
        if delta <= ZERO:
            raise SlackTooSmallError("witness synthesis needs a positive slack")
        if depth < 0 or depth > self.chain.depth:
            raise ParameterError("depth outside the precomputed chain")
        key = (min(a, b), max(a, b), depth, delta)
        got = self._witnesses.get(key)
        if got is not None:
            return got
        phi = self._build_witness(a, b, depth, delta)
        vals = self.values_of(phi)
        target = self.chain.value(depth, a, b)
        if abs(vals[a] - vals[b]) < target - delta:
            raise AssertionError(
                "witness construction missed its separation bound; this is a bug"
            )
        self._witnesses[key] = phi
        return phi

    def _build_witness(self, a, b, depth, delta):
        target = self.chain.value(depth, a, b)
        if depth == 0 or target == ZERO:
            return self._zero
        system = self.system
        best_atom, best_gap = None, ZERO
        for p in system.atoms:
            gap = abs(system.atom_value(a, p) - system.atom_value(b, p))
            if gap > best_gap:
                best_atom, best_gap = p, gap
        if best_gap == target:
            return self._atom(best_atom)
        ta = system.successors[a] is None
        tb = system.successors[b] is None
        if ta and tb:
            raise AssertionError("distance above atom gap between terminating states")
        if ta or tb:
            # The lift is 1 against a terminating side; <>1 separates fully.
            return self._dia(self._one)
        value, price = self.price_vector(depth - 1, a, b)
        if value != target:
            raise LPError("dual lift does not realize the chain value")
        psi = self.approximate_values(price, depth - 1, delta / 2)
        return self._dia(psi)

    def approximate_values(
        self, values: Sequence[Fraction], base_depth: int, gamma: Fraction
    ) -> ModalFormula:
        """Rank <= base_depth formula within gamma of the vector in sup norm.

        The vector must be non-expansive w.r.t. the chain level; the result
        is max_x min_y of pair approximations at budget gamma / 2.
        """
        gamma = Fraction(gamma)
        if gamma <= ZERO:
            raise SlackTooSmallError("approximation needs a positive slack")
        n = self.system.n_states
        if len(values) != n:
            raise ParameterError("value vector length does not match the system")
        distinct = set(values)
        if len(distinct) == 1:
            grid = self._grid(gamma)
            return self._const(self._clip(nearest_grid(values[0], grid)))
        rows = []
        for x in range(n):
            rows.append(
                self._min_of(
                    self.pair_values(values, x, y, base_depth, gamma / 2)
                    for y in range(n)
                )
            )
        phi = self._max_of(rows)
        vals = self.values_of(phi)
        worst = max(abs(u - v) for u, v in zip(vals, values))
        if worst > gamma:
            raise AssertionError(
                "approximation missed its sup-norm bound; this is a bug"
            )
        return phi

    def pair_values(
        self,
        values: Sequence[Fraction],
        x: StateId,
        y: StateId,
        base_depth: int,
        delta: Fraction,
    ) -> ModalFormula:
        """Formula agreeing with the vector at x and y up to delta, rank <=
        base_depth."""
        delta = Fraction(delta)
        if delta <= ZERO:
            raise SlackTooSmallError("pair approximation needs a positive slack")
        grid = self._grid(delta)
        fx, fy = values[x], values[y]
        if x == y or fx == fy:
            return self._const(self._clip(nearest_grid(fx, grid)))
        hi, lo = (x, y) if fx > fy else (y, x)
        u, v = values[hi], values[lo]
        psi = self.witness(hi, lo, base_depth, delta / 2)
        pv = self.values_of(psi)
        if pv[hi] < pv[lo]:
            psi = self._neg(psi)
            pv = self.values_of(psi)
        # Shift to zero at the low state, clip to the required height, then
        # raise the floor to the low value: min(max(psi - c1, 0) /\ c2 + c3, 1).
        c1 = floor_to_grid(pv[lo], grid)
        c2 = min(ONE, ceil_to_grid(u - v, grid))
        c3 = floor_to_grid(v, grid)
        shifted = self._sub(psi, c1)
        clipped = self._and(shifted, self._const(c2))
        phi = self._neg(self._sub(self._neg(clipped), c3))
        vals = self.values_of(phi)
        if abs(vals[x] - fx) > delta or abs(vals[y] - fy) > delta:
            raise AssertionError(
                "pair approximation missed its bound; this is a bug"
            )
        return phi

    def _grid(self, budget: Fraction) -> Fraction:
        return budget / (4 * self.system.n_states)

    @staticmethod
    def _clip(v: Fraction) -> Fraction:
        return min(ONE, max(ZERO, v))


# ---------------------------------------------------------------------------
# Public entry points


def witness_formula(
    sys_a: TransitionSystem,
    sys_b: Optional[TransitionSystem],
    a: StateId,
    b: StateId,
    n: int,
    delta: Fraction,
    chain: Optional[DistanceChain] = None,
) -> ModalFormula:
    """A rank <= n formula separating a (in sys_a) from b (in sys_b) by at
    least d_n(a, b) - delta.

    The formula contains only constants, atoms and connectives, so it can
    be evaluated on either system alone. Pass a precomputed transport chain
    (or reuse a FormulaSynthesizer) when calling repeatedly.
    """
    if chain is None:
        chain = behavioural_distance(sys_a, sys_b, n, "W")
    synth = FormulaSynthesizer(chain)
    return synth.witness(chain.offsets[0] + a, chain.offsets[-1] + b, n, delta)


def approximate_nonexpansive(
    system: TransitionSystem,
    f: StateFunction,
    delta: Fraction,
    chain: Optional[DistanceChain] = None,
) -> ModalFormula:
    """Rank <= f.base_depth formula within delta of f in sup norm."""
    if chain is None:
        chain = behavioural_distance(system, None, f.base_depth, "W")
    _check_function(chain, f)
    synth = FormulaSynthesizer(chain)
    return synth.approximate_values(f.values, f.base_depth, delta)


def pair_approximation(
    system: TransitionSystem,
    f: StateFunction,
    a: StateId,
    b: StateId,
    delta: Fraction,
    chain: Optional[DistanceChain] = None,
) -> ModalFormula:
    """Formula agreeing with f at a and b up to delta, rank <= f.base_depth."""
    if chain is None:
        chain = behavioural_distance(system, None, f.base_depth, "W")
    _check_function(chain, f)
    synth = FormulaSynthesizer(chain)
    return synth.pair_values(f.values, a, b, f.base_depth, delta)


def _check_function(chain: DistanceChain, f: StateFunction):
    if chain.depth < f.base_depth:
        raise ParameterError("chain shallower than the function's base depth")
    metric = chain.levels[f.base_depth]
    if len(f.values) != metric.size:
        raise ParameterError("state function does not match the system size")
    for i in range(metric.size):
        for j in range(i + 1, metric.size):
            if abs(f.values[i] - f.values[j]) > metric.value(i, j):
                raise NonExpansiveError(
                    "state function is expansive for the supplied chain"
                )


def optimal_price_profile(
    chain: DistanceChain, level: int, a: StateId, b: StateId
) -> StateFunction:
    """The optimal dual price function for lifting d_level at (a, b),
    extended to every state; a ready-made non-expansive StateFunction of
    base depth level."""
    d = chain.levels[level]
    pa, pb = chain.system.successors[a], chain.system.successors[b]
    if pa is None or pb is None:
        raise ParameterError("price profiles need two transient states")
    _, price = kantorovich_lift(d, pa, pb)
    full = mcshane_extend(d, dict(price.values))
    return StateFunction(full, level, d)
