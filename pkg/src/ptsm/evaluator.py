"""Exact evaluation of modal and first-order formulas on systems.

eval_modal is a plain top-down recursion memoized per (subformula, state);
eval_modal_all computes whole value vectors bottom-up over the subformula
DAG. The two are independent code paths kept consistent by tests. All
results are exact rationals in [0, 1].
"""
from __future__ import annotations

from fractions import Fraction
from typing import Mapping

from .errors import UnboundVariableError, UnknownAtomError
from .formula import (
    And,
    Atom,
    Box,
    Const,
    Diamond,
    FOAnd,
    FOAtom,
    FOConst,
    FODiamondBind,
    FOEq,
    FOExists,
    FOFormula,
    FONeg,
    FOOr,
    FOTruncSub,
    ModalFormula,
    Neg,
    Or,
    TruncSub,
)
from .rational import ONE, ZERO
from .system import StateId, TransitionSystem


def _check_atom(system, name):
    if name not in system.atoms:
        raise UnknownAtomError(
            f"atom {name!r} is not declared by the system (atoms: {list(system.atoms)})"
        )


def eval_modal(system: TransitionSystem, formula: ModalFormula, state: StateId) -> Fraction:
    """Value of the formula at one state."""
    memo: dict[tuple[int, StateId], Fraction] = {}

    def go(f, a):
        key = (id(f), a)
        if key in memo:
            return memo[key]
        if isinstance(f, Const):
            v = f.value
        elif isinstance(f, Atom):
            _check_atom(system, f.name)
            v = system.atom_value(a, f.name)
        elif isinstance(f, TruncSub):
            v = max(go(f.sub, a) - f.amount, ZERO)
        elif isinstance(f, Neg):
            v = ONE - go(f.sub, a)
        elif isinstance(f, And):
            v = min(go(f.left, a), go(f.right, a))
        elif isinstance(f, Or):
            v = max(go(f.left, a), go(f.right, a))
        elif isinstance(f, Diamond):
            dist = system.successors[a]
            if dist is None:
                v = ZERO
            else:
                v = sum((w * go(f.sub, t) for t, w in dist.items()), ZERO)
        elif isinstance(f, Box):
            dist = system.successors[a]
            if dist is None:
                v = ONE
            else:
                v = sum((w * go(f.sub, t) for t, w in dist.items()), ZERO)
        else:
            raise TypeError(f"not a modal formula: {f!r}")
        memo[key] = v
        return v

    return go(formula, state)


def eval_modal_all(system: TransitionSystem, formula: ModalFormula):
    """Value vector of the formula over all states, as a tuple."""
    n = system.n_states
    memo: dict[int, tuple[Fraction, ...]] = {}

    def go(f):
        key = id(f)
        if key in memo:
            return memo[key]
        if isinstance(f, Const):
            vec = (f.value,) * n
        elif isinstance(f, Atom):
            _check_atom(system, f.name)
            vec = tuple(system.atom_value(a, f.name) for a in range(n))
        elif isinstance(f, TruncSub):
            vec = tuple(max(v - f.amount, ZERO) for v in go(f.sub))
        elif isinstance(f, Neg):
            vec = tuple(ONE - v for v in go(f.sub))
        elif isinstance(f, And):
            vec = tuple(map(min, go(f.left), go(f.right)))
        elif isinstance(f, Or):
            vec = tuple(map(max, go(f.left), go(f.right)))
        elif isinstance(f, Diamond):
            vec = successor_expectation(system, go(f.sub))
        elif isinstance(f, Box):
            sub = go(f.sub)
            vec = tuple(
                ONE if system.successors[a] is None else v
                for a, v in enumerate(successor_expectation(system, sub))
            )
        else:
            raise TypeError(f"not a modal formula: {f!r}")
        memo[key] = vec
        return vec

    return go(formula)


def successor_expectation(system: TransitionSystem, values):
    """Apply the expectation modality to a state-indexed value vector.

    Terminating states map to 0. This is the semantic clause behind `<>`
    and is non-expansive w.r.t. the sup norm.
    """
    out = []
    for a in range(system.n_states):
        dist = system.successors[a]
        if dist is None:
            out.append(ZERO)
        else:
            out.append(sum((w * values[t] for t, w in dist.items()), ZERO))
    return tuple(out)


def eval_fo(
    system: TransitionSystem, formula: FOFormula, env: Mapping[str, StateId]
) -> Fraction:
    """Value of a first-order formula under a variable assignment.

    Free variables must all be bound by env; quantifiers extend the
    assignment. E realizes a maximum (finite state space), the binding
    modality an expectation over successors of the source state.
    """

    def lookup(e, var):
        try:
            return e[var]
        except KeyError:
            raise UnboundVariableError(f"variable {var!r} is not bound") from None

    def go(f, e):
        if isinstance(f, FOConst):
            return f.value
        if isinstance(f, FOAtom):
            _check_atom(system, f.name)
            return system.atom_value(lookup(e, f.var), f.name)
        if isinstance(f, FOEq):
            return ONE if lookup(e, f.left) == lookup(e, f.right) else ZERO
        if isinstance(f, FOTruncSub):
            return max(go(f.sub, e) - f.amount, ZERO)
        if isinstance(f, FONeg):
            return ONE - go(f.sub, e)
        if isinstance(f, FOAnd):
            return min(go(f.left, e), go(f.right, e))
        if isinstance(f, FOOr):
            return max(go(f.left, e), go(f.right, e))
        if isinstance(f, FOExists):
            best = ZERO
            for a in range(system.n_states):
                e2 = dict(e)
                e2[f.var] = a
                best = max(best, go(f.body, e2))
            return best
        if isinstance(f, FODiamondBind):
            a = lookup(e, f.source)
            dist = system.successors[a]
            if dist is None:
                return ZERO
            total = ZERO
            for t, w in dist.items():
                e2 = dict(e)
                e2[f.bound] = t
                total += w * go(f.body, e2)
            return total
        raise TypeError(f"not a first-order formula: {f!r}")

    return go(formula, dict(env))
