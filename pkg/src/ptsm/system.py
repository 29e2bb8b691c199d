"""Finite probabilistic transition systems.

A system is a finite set of states, each carrying a fuzzy valuation for every
declared atom (a rational in [0, 1]) and either a probability distribution
over successor states (weights strictly positive, summing to exactly one) or
the terminating marker. All arithmetic is exact; floats never enter.

States are addressed by dense integer ids; labels are for display and JSON
serialization only. Structural operations (disjoint union, Gaifman
neighbourhoods, restriction, unravelling, morphism checking) and a seeded
random generator live here too.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import inf
from typing import Mapping, Optional, Sequence

from .errors import (
    AtomMismatchError,
    DanglingStateError,
    DuplicateLabelError,
    ParameterError,
    RangeError,
    SystemFormatError,
    WeightSumError,
)
from .rational import ONE, ZERO, check_unit_interval, format_rational, parse_rational

StateId = int

# Sparse successor distribution; absent states have weight zero.
Distribution = dict[StateId, Fraction]


@dataclass(frozen=True)
class TransitionSystem:
    """Immutable finite probabilistic transition system.

    successors[i] is None exactly when state i is terminating. Valuation
    dicts store only nonzero atom values.
    """

    atoms: tuple[str, ...]
    labels: tuple[str, ...]
    valuations: tuple[Mapping[str, Fraction], ...]
    successors: tuple[Optional[Mapping[StateId, Fraction]], ...]

    @property
    def n_states(self) -> int:
        return len(self.labels)

    def is_terminating(self, a: StateId) -> bool:
        return self.successors[a] is None

    def distribution(self, a: StateId) -> Optional[Mapping[StateId, Fraction]]:
        return self.successors[a]

    def atom_value(self, a: StateId, atom: str) -> Fraction:
        return self.valuations[a].get(atom, ZERO)

    @cached_property
    def label_index(self) -> Mapping[str, StateId]:
        return {lab: i for i, lab in enumerate(self.labels)}

    def state_by_label(self, label: str) -> StateId:
        try:
            return self.label_index[label]
        except KeyError:
            raise DanglingStateError(f"no state labelled {label!r}") from None

    def same_atoms(self, other: "TransitionSystem") -> None:
        if self.atoms != other.atoms:
            raise AtomMismatchError(
                f"atom lists differ: {list(self.atoms)} vs {list(other.atoms)}"
            )


def build_system(atoms, states) -> TransitionSystem:
    """Assemble and validate a system from label-keyed state specs.

    states is a sequence of (label, valuation, successors) triples where
    valuation maps atom name to Fraction and successors maps target label
    to Fraction, or is None for a terminating state.
    """
    labels = tuple(lab for lab, _, _ in states)
    index = {}
    for i, lab in enumerate(labels):
        if lab in index:
            raise DuplicateLabelError(f"duplicate state label {lab!r}")
        index[lab] = i
    atoms = tuple(atoms)
    valuations = []
    successors = []
    for lab, val, succ in states:
        valuations.append({p: Fraction(v) for p, v in val.items() if v != 0})
        if succ is None or len(succ) == 0:
            successors.append(None)
        else:
            dist = {}
            for target, w in succ.items():
                if target not in index:
                    raise DanglingStateError(
                        f"state {lab!r} has an edge to unknown state {target!r}"
                    )
                dist[index[target]] = Fraction(w)
            successors.append(dist)
    system = TransitionSystem(atoms, labels, tuple(valuations), tuple(successors))
    return validate_system(system)


def validate_system(system: TransitionSystem) -> TransitionSystem:
    """Check every structural invariant; return the system unchanged."""
    n = system.n_states
    if n == 0:
        raise ParameterError("a system needs at least one state")
    seen = set()
    for lab in system.labels:
        if lab in seen:
            raise DuplicateLabelError(f"duplicate state label {lab!r}")
        seen.add(lab)
    atom_set = set(system.atoms)
    if len(atom_set) != len(system.atoms):
        raise AtomMismatchError("duplicate atom names")
    for i in range(n):
        where = f"state {system.labels[i]!r}"
        for p, v in system.valuations[i].items():
            if p not in atom_set:
                raise AtomMismatchError(f"{where}: valuation for undeclared atom {p!r}")
            check_unit_interval(v, f"{where}: valuation of {p!r}")
        dist = system.successors[i]
        if dist is None:
            continue
        total = ZERO
        for target, w in dist.items():
            if not (0 <= target < n):
                raise DanglingStateError(f"{where}: edge to unknown state id {target}")
            if w <= ZERO or w > ONE:
                raise RangeError(
                    f"{where}: transition weight {format_rational(w)} outside (0, 1]"
                )
            total += w
        if total != ONE:
            raise WeightSumError(
                f"{where}: transition weights sum to {format_rational(total)}, not 1"
            )
    return system


# ---------------------------------------------------------------------------
# JSON serialization


def system_from_dict(doc) -> TransitionSystem:
    """Parse the canonical JSON object form; reject floats loudly."""
    if not isinstance(doc, dict):
        raise SystemFormatError("top level must be an object")
    try:
        atoms = doc["atoms"]
        states = doc["states"]
    except KeyError as exc:
        raise SystemFormatError(f"missing top-level key {exc}") from None
    if not isinstance(atoms, list) or not all(isinstance(a, str) for a in atoms):
        raise SystemFormatError("'atoms' must be a list of strings")
    if not isinstance(states, list) or not states:
        raise SystemFormatError("'states' must be a non-empty list")
    triples = []
    for i, st in enumerate(states):
        where = f"states[{i}]"
        if not isinstance(st, dict):
            raise SystemFormatError(f"{where} must be an object")
        label = st.get("label", f"s{i}")
        if not isinstance(label, str):
            raise SystemFormatError(f"{where}.label must be a string")
        val_doc = st.get("valuation", {})
        if not isinstance(val_doc, dict):
            raise SystemFormatError(f"{where}.valuation must be an object")
        valuation = {
            p: parse_rational(v, f"{where}.valuation[{p!r}]")
            for p, v in val_doc.items()
        }
        succ_doc = st.get("successors", None)
        if succ_doc is None:
            succ = None
        elif isinstance(succ_doc, dict):
            succ = {
                t: parse_rational(w, f"{where}.successors[{t!r}]")
                for t, w in succ_doc.items()
            }
        else:
            raise SystemFormatError(f"{where}.successors must be an object or null")
        triples.append((label, valuation, succ))
    try:
        return build_system(atoms, triples)
    except (DanglingStateError, DuplicateLabelError) as exc:
        raise SystemFormatError(str(exc)) from exc


def system_to_dict(system: TransitionSystem) -> dict:
    states = []
    for i in range(system.n_states):
        entry = {
            "label": system.labels[i],
            "valuation": {
                p: format_rational(v)
                for p, v in sorted(system.valuations[i].items())
            },
        }
        dist = system.successors[i]
        if dist is None:
            entry["successors"] = None
        else:
            entry["successors"] = {
                system.labels[t]: format_rational(w) for t, w in sorted(dist.items())
            }
        states.append(entry)
    return {"atoms": list(system.atoms), "states": states}


def load_system(path) -> TransitionSystem:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh, parse_float=_reject_float, parse_int=_reject_int)
        except json.JSONDecodeError as exc:
            raise SystemFormatError(f"{path}: invalid JSON: {exc}") from exc
    return system_from_dict(doc)


def save_system(system: TransitionSystem, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(system_to_dict(system), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _reject_float(text):
    raise SystemFormatError(
        f"float literal {text} not allowed; write rationals as strings like '1/2'"
    )


def _reject_int(text):
    # Bare JSON integers in value position would silently bypass the string
    # format, so they are rejected as well; ids and counts never occur in
    # system documents.
    raise SystemFormatError(
        f"numeric literal {text} not allowed; write rationals as strings like '1/2'"
    )


# ---------------------------------------------------------------------------
# Structural operations


def disjoint_union(parts: Sequence[TransitionSystem]):
    """Disjoint union; returns (system, offsets) with offsets[i] the id shift."""
    if not parts:
        raise ParameterError("disjoint_union needs at least one part")
    first = parts[0]
    for other in parts[1:]:
        first.same_atoms(other)
    all_labels = [lab for part in parts for lab in part.labels]
    collide = len(set(all_labels)) != len(all_labels)
    offsets = []
    labels = []
    valuations = []
    successors = []
    shift = 0
    for idx, part in enumerate(parts):
        offsets.append(shift)
        for i in range(part.n_states):
            lab = part.labels[i]
            labels.append(f"{lab}#{idx}" if collide else lab)
            valuations.append(dict(part.valuations[i]))
            dist = part.successors[i]
            if dist is None:
                successors.append(None)
            else:
                successors.append({t + shift: w for t, w in dist.items()})
        shift += part.n_states
    system = TransitionSystem(
        first.atoms, tuple(labels), tuple(valuations), tuple(successors)
    )
    return validate_system(system), offsets


def _adjacency(system: TransitionSystem):
    adj = [set() for _ in range(system.n_states)]
    for a in range(system.n_states):
        dist = system.successors[a]
        if dist is None:
            continue
        for b in dist:
            adj[a].add(b)
            adj[b].add(a)
    return adj


def gaifman_distances_from(system: TransitionSystem, centers):
    """BFS distances in the undirected Gaifman graph; inf if unreachable."""
    dist = [inf] * system.n_states
    queue = []
    for c in centers:
        if dist[c] == inf:
            dist[c] = 0
            queue.append(c)
    adj = _adjacency(system)
    head = 0
    while head < len(queue):
        a = queue[head]
        head += 1
        for b in adj[a]:
            if dist[b] == inf:
                dist[b] = dist[a] + 1
                queue.append(b)
    return dist


def gaifman_distance(system: TransitionSystem, a: StateId, b: StateId):
    return gaifman_distances_from(system, [a])[b]


def neighborhood(system: TransitionSystem, centers, k: int) -> set[StateId]:
    """States within Gaifman distance k of any of the given centers."""
    if k < 0:
        raise ParameterError("neighbourhood radius must be non-negative")
    dist = gaifman_distances_from(system, list(centers))
    return {i for i, d in enumerate(dist) if d <= k}


def restrict(system: TransitionSystem, a: StateId, k: int):
    """k-neighbourhood restriction around a.

    States at Gaifman distance exactly k become terminating; everything
    closer keeps its transitions. Returns (subsystem, old-to-new id map).
    """
    dist = gaifman_distances_from(system, [a])
    keep = sorted(i for i in range(system.n_states) if dist[i] <= k)
    state_map = {old: new for new, old in enumerate(keep)}
    labels = tuple(system.labels[i] for i in keep)
    valuations = tuple(dict(system.valuations[i]) for i in keep)
    successors = []
    for old in keep:
        src = system.successors[old]
        if src is None or dist[old] == k:
            successors.append(None)
        else:
            successors.append({state_map[t]: w for t, w in src.items()})
    sub = TransitionSystem(system.atoms, labels, valuations, tuple(successors))
    return validate_system(sub), state_map


def unravel(system: TransitionSystem, a: StateId, depth: int):
    """Depth-bounded tree unravelling from a.

    Nodes are the transition paths of length <= depth starting at a, in BFS
    order; a node inherits the valuation of its last state, and nodes at the
    cut depth are terminating. Returns (tree system, root id).
    """
    if depth < 0:
        raise ParameterError("unravelling depth must be non-negative")
    paths = [(a,)]
    ids = {(a,): 0}
    labels = []
    valuations = []
    successors = []
    head = 0
    while head < len(paths):
        path = paths[head]
        head += 1
        last = path[-1]
        labels.append(".".join(system.labels[s] for s in path))
        valuations.append(dict(system.valuations[last]))
        dist = system.successors[last]
        if dist is None or len(path) - 1 == depth:
            successors.append(None)
            continue
        out = {}
        for t, w in sorted(dist.items()):
            child = path + (t,)
            ids[child] = len(paths)
            paths.append(child)
            out[ids[child]] = w
        successors.append(out)
    tree = TransitionSystem(
        system.atoms, tuple(labels), tuple(valuations), tuple(successors)
    )
    return validate_system(tree), 0


@dataclass(frozen=True)
class MorphismCandidate:
    """A total state map between systems, to be checked for morphism-hood."""

    source: TransitionSystem
    target: TransitionSystem
    mapping: tuple[StateId, ...]


def check_morphism(candidate: MorphismCandidate):
    """Decide whether the candidate map is a system morphism.

    The map must preserve atom valuations exactly, reflect and preserve
    termination, and push each successor distribution forward to the target
    distribution (target weight equals the sum over the fibre). Returns
    (True, None) or (False, reason for the first violation found).
    """
    src, tgt, f = candidate.source, candidate.target, candidate.mapping
    src.same_atoms(tgt)
    if len(f) != src.n_states:
        raise ParameterError(
            f"mapping has {len(f)} entries for {src.n_states} source states"
        )
    for b in f:
        if not (0 <= b < tgt.n_states):
            raise DanglingStateError(f"mapping hits unknown target id {b}")
    for a in range(src.n_states):
        fa = f[a]
        name = f"{src.labels[a]!r} -> {tgt.labels[fa]!r}"
        for p in src.atoms:
            va, vb = src.atom_value(a, p), tgt.atom_value(fa, p)
            if va != vb:
                return False, (
                    f"{name}: atom {p!r} differs "
                    f"({format_rational(va)} vs {format_rational(vb)})"
                )
        sa, sb = src.successors[a], tgt.successors[fa]
        if (sa is None) != (sb is None):
            side = "source" if sa is None else "target"
            return False, f"{name}: only the {side} state is terminating"
        if sa is None:
            continue
        pushed: Distribution = {}
        for t, w in sa.items():
            pushed[f[t]] = pushed.get(f[t], ZERO) + w
        targets = set(pushed) | set(sb)
        for b in sorted(targets):
            wa, wb = pushed.get(b, ZERO), sb.get(b, ZERO)
            if wa != wb:
                return False, (
                    f"{name}: weight onto {tgt.labels[b]!r} is "
                    f"{format_rational(wa)} pushed forward vs "
                    f"{format_rational(wb)} in the target"
                )
    return True, None


# ---------------------------------------------------------------------------
# Random generation

_ATOM_NAMES = "pqrstuvw"


def random_system(
    n_states: int,
    n_atoms: int,
    branching: int,
    denominator_bound: int,
    termination_prob: Fraction,
    seed: int,
) -> TransitionSystem:
    """Seeded random system; identical parameters give identical output.

    Each transient state gets `branching` distinct successors (fewer only if
    the system is smaller) with positive weights over a common denominator
    of at most denominator_bound; atom values use denominators up to the same
    bound. termination_prob is applied exactly, no float comparison.
    """
    if n_states < 1:
        raise ParameterError("n_states must be at least 1")
    if n_atoms < 0 or branching < 1 or denominator_bound < 1:
        raise ParameterError("n_atoms, branching and denominator_bound out of range")
    if branching > denominator_bound:
        raise ParameterError(
            "branching exceeds denominator_bound; weights cannot sum to 1"
        )
    tp = Fraction(termination_prob)
    check_unit_interval(tp, "termination_prob")
    if n_atoms > len(_ATOM_NAMES):
        atoms = tuple(f"p{i}" for i in range(n_atoms))
    else:
        atoms = tuple(_ATOM_NAMES[:n_atoms])
    rng = random.Random(seed)
    labels = tuple(f"s{i}" for i in range(n_states))
    valuations = []
    successors = []
    for i in range(n_states):
        val = {}
        for p in atoms:
            den = rng.randint(1, denominator_bound)
            num = rng.randint(0, den)
            if num:
                val[p] = Fraction(num, den)
        valuations.append(val)
        terminate = rng.randrange(tp.denominator) < tp.numerator
        if terminate:
            successors.append(None)
            continue
        k = min(branching, n_states)
        targets = sorted(rng.sample(range(n_states), k))
        den = rng.randint(k, denominator_bound)
        if k == 1:
            parts = [den]
        else:
            cuts = sorted(rng.sample(range(1, den), k - 1))
            parts = [b - a for a, b in zip([0] + cuts, cuts + [den])]
        successors.append(
            {t: Fraction(c, den) for t, c in zip(targets, parts)}
        )
    system = TransitionSystem(atoms, labels, tuple(valuations), tuple(successors))
    return validate_system(system)
