"""Bounded epsilon-bisimulation games and strategy certificates.

A configuration is (a, b, epsilon) with a number of rounds left. In each
round the duplicator proposes an exact coupling of the two successor
distributions together with a slack function on its support whose integral
under the coupling stays within epsilon; the spoiler picks any support pair
and play continues there with the assigned slack.

Rule order at every configuration with rounds left, checked by synthesis,
verification and the play simulator alike:

1. atom condition: |p(a) - p(b)| <= epsilon for every atom, else the
   spoiler wins;
2. both states terminating, or epsilon = 1: the duplicator wins outright
   and the certificate may stop here;
3. exactly one state terminating: the spoiler wins;
4. otherwise a round is played.

Nothing at all is checked once the rounds are used up. The atom condition
comes before the termination rules; the reverse order would declare the
duplicator the winner on terminating pairs with differing atom values and
break the exact agreement between game values and the transport chain.

The least epsilon the duplicator can win with equals the depth-n transport
distance, and on finite systems it is attained, so synthesis accepts
epsilon = d_n(a, b) itself.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional

from .errors import (
    CertificateFormatError,
    DanglingStateError,
    LengthMismatchError,
    NotWinnableError,
    ParameterError,
    RangeError,
)
from .metrics import Coupling, DistanceChain, behavioural_distance
from .rational import ONE, ZERO, format_rational, parse_rational
from .system import StateId, TransitionSystem


@dataclass(frozen=True)
class GameConfig:
    a: StateId
    b: StateId
    epsilon: Fraction
    rounds_left: int


@dataclass(frozen=True)
class DuplicatorMove:
    """A coupling of the successor distributions plus the slack assignment
    on its support. Keys pair a state of the left system with one of the
    right system."""

    coupling: Coupling
    slack: Mapping[tuple[StateId, StateId], Fraction]


@dataclass
class StrategyCertificate:
    config: GameConfig
    move: Optional[DuplicatorMove]
    children: dict[tuple[StateId, StateId], "StrategyCertificate"]


def _resolve_pair(sys_a, sys_b):
    return sys_a, (sys_a if sys_b is None else sys_b)


def game_distance(
    sys_a: TransitionSystem,
    sys_b: Optional[TransitionSystem],
    a: StateId,
    b: StateId,
    n: int,
    chain: Optional[DistanceChain] = None,
) -> Fraction:
    """Value of the n-round game: the least epsilon the duplicator wins.

    Equal to the depth-n transport distance; computed through the chain and
    certified independently by synthesize plus verify/exhaustive_spoiler.
    """
    chain = _chain_for(sys_a, sys_b, n, chain)
    return chain.cross(n, a, b)


def _chain_for(sys_a, sys_b, n, chain):
    if chain is None:
        chain = behavioural_distance(sys_a, sys_b, n, "W")
    if chain.method != "W" or chain.depth < n:
        raise ParameterError("need a transport chain of at least the game depth")
    return chain


def synthesize_duplicator_strategy(
    sys_a: TransitionSystem,
    sys_b: Optional[TransitionSystem],
    a: StateId,
    b: StateId,
    n: int,
    epsilon: Fraction,
    chain: Optional[DistanceChain] = None,
) -> StrategyCertificate:
    """Build a winning duplicator strategy for the n-round game at epsilon.

    Raises NotWinnable when epsilon < d_n(a, b). Each move reuses the
    optimal transport plan of the corresponding chain level; the slack at a
    support pair is its next-level distance plus a uniform share of the
    surplus epsilon - plan cost, so the integral constraint is met exactly.
    """
    epsilon = Fraction(epsilon)
    if epsilon < ZERO or epsilon > ONE:
        raise RangeError(f"epsilon {format_rational(epsilon)} outside [0, 1]")
    if n < 0:
        raise ParameterError("round count must be non-negative")
    chain = _chain_for(sys_a, sys_b, n, chain)
    off_a, off_b = chain.offsets[0], chain.offsets[-1]
    union = chain.system
    need = chain.value(n, off_a + a, off_b + b)
    if epsilon < need:
        raise NotWinnableError(
            f"spoiler wins: epsilon {format_rational(epsilon)} is below the "
            f"game value {format_rational(need)}"
        )

    def build(ua, ub, eps, rounds):
        config = GameConfig(ua - off_a, ub - off_b, eps, rounds)
        if rounds == 0:
            return StrategyCertificate(config, None, {})
        ta = union.successors[ua] is None
        tb = union.successors[ub] is None
        if (ta and tb) or eps == ONE:
            return StrategyCertificate(config, None, {})
        if ta or tb:
            raise NotWinnableError(
                "internal invariant broke: one-sided termination below the "
                "distance bound"
            )
        plan = chain.coupling(rounds - 1, ua, ub)
        prev = chain.levels[rounds - 1]
        cost = plan.cost(prev)
        share = (eps - cost) / len(plan.weights)
        move_weights = {}
        slack = {}
        children = {}
        for (ui, uj), w in sorted(plan.weights.items()):
            eps_child = min(ONE, prev.value(ui, uj) + share)
            key = (ui - off_a, uj - off_b)
            move_weights[key] = w
            slack[key] = eps_child
            children[key] = build(ui, uj, eps_child, rounds - 1)
        move = DuplicatorMove(Coupling(move_weights), slack)
        return StrategyCertificate(config, move, children)

    return build(off_a + a, off_b + b, epsilon, n)


# ---------------------------------------------------------------------------
# Certificate checking


def verify_certificate(
    cert: StrategyCertificate,
    sys_a: TransitionSystem,
    sys_b: Optional[TransitionSystem] = None,
):
    """Recursive rule check of a strategy certificate.

    Independent of how the certificate was produced: checks the atom
    condition, the termination rules, exact coupling marginals, the slack
    integral bound, and that children agree with the stored move. Returns
    (True, None) or (False, reason at the first offending node).
    """
    sys_a, sys_b = _resolve_pair(sys_a, sys_b)
    sys_a.same_atoms(sys_b)

    def where(cfg):
        return (
            f"({sys_a.labels[cfg.a]}, {sys_b.labels[cfg.b]}, "
            f"eps={format_rational(cfg.epsilon)}, rounds={cfg.rounds_left})"
        )

    def go(node):
        cfg = node.config
        if not (0 <= cfg.a < sys_a.n_states) or not (0 <= cfg.b < sys_b.n_states):
            raise CertificateFormatError("certificate references unknown states")
        if cfg.epsilon < ZERO or cfg.epsilon > ONE:
            return False, f"epsilon outside [0, 1] at {where(cfg)}"
        if cfg.rounds_left < 0:
            return False, f"negative round count at {where(cfg)}"
        if cfg.rounds_left == 0:
            if node.move is not None or node.children:
                return False, f"data after the last round at {where(cfg)}"
            return True, None
        for p in sys_a.atoms:
            gap = abs(sys_a.atom_value(cfg.a, p) - sys_b.atom_value(cfg.b, p))
            if gap > cfg.epsilon:
                return False, (
                    f"atom condition fails for {p!r} at {where(cfg)}: gap "
                    f"{format_rational(gap)}"
                )
        pa = sys_a.successors[cfg.a]
        pb = sys_b.successors[cfg.b]
        if (pa is None and pb is None) or cfg.epsilon == ONE:
            # Duplicator has won outright; any further data is ignored.
            return True, None
        if pa is None or pb is None:
            return False, f"one-sided termination at {where(cfg)}"
        if node.move is None:
            return False, f"missing duplicator move at {where(cfg)}"
        bad = node.move.coupling.first_violation(pa, pb)
        if bad is not None:
            return False, f"illegal coupling at {where(cfg)}: {bad}"
        support = set(node.move.coupling.weights)
        if set(node.move.slack) != support:
            return False, f"slack keys differ from the support at {where(cfg)}"
        integral = ZERO
        for key, w in node.move.coupling.weights.items():
            s = node.move.slack[key]
            if s < ZERO or s > ONE:
                return False, f"slack outside [0, 1] at {where(cfg)}"
            integral += w * s
        if integral > cfg.epsilon:
            return False, (
                f"slack integral {format_rational(integral)} exceeds epsilon "
                f"at {where(cfg)}"
            )
        if set(node.children) != support:
            return False, f"children do not cover the support at {where(cfg)}"
        for key in sorted(support):
            child = node.children[key]
            expect = GameConfig(key[0], key[1], node.move.slack[key], cfg.rounds_left - 1)
            if child.config != expect:
                return False, (
                    f"child configuration mismatch under {where(cfg)} at "
                    f"({sys_a.labels[key[0]]}, {sys_b.labels[key[1]]})"
                )
            ok, reason = go(child)
            if not ok:
                return False, reason
        return True, None

    return go(cert)


def exhaustive_spoiler(
    cert: StrategyCertificate,
    sys_a: TransitionSystem,
    sys_b: Optional[TransitionSystem] = None,
) -> bool:
    """Play every spoiler line against the certificate's strategy.

    A deliberately separate code path from verify_certificate: the game
    state (states, epsilon, rounds) is tracked by the simulator itself and
    the stored moves are only trusted after their legality is re-derived
    from the systems. Returns True iff the duplicator survives every line.
    """
    sys_a, sys_b = _resolve_pair(sys_a, sys_b)
    sys_a.same_atoms(sys_b)
    root = cert.config
    stack = [(cert, root.a, root.b, root.epsilon, root.rounds_left)]
    while stack:
        node, a, b, eps, rounds = stack.pop()
        if rounds == 0:
            continue
        if any(
            abs(sys_a.atom_value(a, p) - sys_b.atom_value(b, p)) > eps
            for p in sys_a.atoms
        ):
            return False
        pa = sys_a.successors[a]
        pb = sys_b.successors[b]
        if (pa is None and pb is None) or eps == ONE:
            continue
        if pa is None or pb is None:
            return False
        move = node.move
        if move is None:
            return False
        mass_left: dict[StateId, Fraction] = {}
        mass_right: dict[StateId, Fraction] = {}
        integral = ZERO
        legal = True
        for (i, j), w in move.coupling.weights.items():
            s = move.slack.get((i, j))
            if w <= ZERO or s is None or s < ZERO or s > ONE:
                legal = False
                break
            mass_left[i] = mass_left.get(i, ZERO) + w
            mass_right[j] = mass_right.get(j, ZERO) + w
            integral += w * s
        if (
            not legal
            or len(move.slack) != len(move.coupling.weights)
            or mass_left != dict(pa)
            or mass_right != dict(pb)
            or integral > eps
        ):
            return False
        for key in move.coupling.weights:
            child = node.children.get(key)
            if child is None:
                return False
            stack.append((child, key[0], key[1], move.slack[key], rounds - 1))
    return True


# ---------------------------------------------------------------------------
# Partial isomorphism predicate


def partial_isomorphism(
    sys_a: TransitionSystem,
    tuple_a,
    sys_b: TransitionSystem,
    tuple_b,
) -> bool:
    """Exact local isomorphism of two state tuples.

    Checks the equality pattern, atom values, and pairwise transition
    weights (zero at terminating states). This is the winning predicate of
    the crisp back-and-forth comparison; no game solver is attached to it.
    """
    sys_a.same_atoms(sys_b)
    if len(tuple_a) != len(tuple_b):
        raise LengthMismatchError(
            f"tuples of length {len(tuple_a)} and {len(tuple_b)}"
        )
    for a in tuple_a:
        if not (0 <= a < sys_a.n_states):
            raise DanglingStateError(f"unknown state id {a}")
    for b in tuple_b:
        if not (0 <= b < sys_b.n_states):
            raise DanglingStateError(f"unknown state id {b}")
    k = len(tuple_a)
    for i in range(k):
        for j in range(k):
            if (tuple_a[i] == tuple_a[j]) != (tuple_b[i] == tuple_b[j]):
                return False
    for a, b in zip(tuple_a, tuple_b):
        for p in sys_a.atoms:
            if sys_a.atom_value(a, p) != sys_b.atom_value(b, p):
                return False
    def weight(system, x, y):
        dist = system.successors[x]
        if dist is None:
            return ZERO
        return dist.get(y, ZERO)

    for i in range(k):
        for j in range(k):
            if weight(sys_a, tuple_a[i], tuple_a[j]) != weight(
                sys_b, tuple_b[i], tuple_b[j]
            ):
                return False
    return True


# ---------------------------------------------------------------------------
# JSON form

_CERT_FORMAT = "strategy-certificate"


def certificate_to_dict(
    cert: StrategyCertificate,
    sys_a: TransitionSystem,
    sys_b: Optional[TransitionSystem] = None,
) -> dict:
    sys_a, sys_b = _resolve_pair(sys_a, sys_b)

    def node_doc(node):
        cfg = node.config
        doc = {
            "a": sys_a.labels[cfg.a],
            "b": sys_b.labels[cfg.b],
            "epsilon": format_rational(cfg.epsilon),
            "rounds_left": cfg.rounds_left,
        }
        if node.move is None:
            doc["move"] = None
        else:
            entries = []
            for key in sorted(node.move.coupling.weights):
                entries.append(
                    {
                        "a": sys_a.labels[key[0]],
                        "b": sys_b.labels[key[1]],
                        "mass": format_rational(node.move.coupling.weights[key]),
                        "slack": format_rational(node.move.slack[key]),
                        "child": node_doc(node.children[key]),
                    }
                )
            doc["move"] = entries
        return doc

    return {"format": _CERT_FORMAT, "root": node_doc(cert)}


def certificate_from_dict(
    doc,
    sys_a: TransitionSystem,
    sys_b: Optional[TransitionSystem] = None,
) -> StrategyCertificate:
    sys_a, sys_b = _resolve_pair(sys_a, sys_b)
    if not isinstance(doc, dict) or doc.get("format") != _CERT_FORMAT:
        raise CertificateFormatError(
            f"not a {_CERT_FORMAT} document (format field missing or wrong)"
        )

    def node_from(d, path):
        if not isinstance(d, dict):
            raise CertificateFormatError(f"{path}: node must be an object")
        try:
            a = sys_a.state_by_label(d["a"])
            b = sys_b.state_by_label(d["b"])
            eps = parse_rational(d["epsilon"], f"{path}.epsilon")
            rounds = d["rounds_left"]
        except KeyError as exc:
            raise CertificateFormatError(f"{path}: missing key {exc}") from None
        if not isinstance(rounds, int) or isinstance(rounds, bool):
            raise CertificateFormatError(f"{path}.rounds_left must be an integer")
        config = GameConfig(a, b, eps, rounds)
        move_doc = d.get("move")
        if move_doc is None:
            return StrategyCertificate(config, None, {})
        if not isinstance(move_doc, list):
            raise CertificateFormatError(f"{path}.move must be a list or null")
        weights = {}
        slack = {}
        children = {}
        for idx, entry in enumerate(move_doc):
            sub = f"{path}.move[{idx}]"
            if not isinstance(entry, dict):
                raise CertificateFormatError(f"{sub} must be an object")
            try:
                key = (
                    sys_a.state_by_label(entry["a"]),
                    sys_b.state_by_label(entry["b"]),
                )
                weights[key] = parse_rational(entry["mass"], f"{sub}.mass")
                slack[key] = parse_rational(entry["slack"], f"{sub}.slack")
                children[key] = node_from(entry["child"], f"{sub}.child")
            except KeyError as exc:
                raise CertificateFormatError(f"{sub}: missing key {exc}") from None
        move = DuplicatorMove(Coupling(weights), slack)
        return StrategyCertificate(config, move, children)

    return node_from(doc["root"], "root")
