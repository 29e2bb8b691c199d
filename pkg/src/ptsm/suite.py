"""Randomized invariant suite over seeded system generators.

Each property draws fresh random instances from its own deterministically
seeded stream, checks one exact invariant, and reports the first
counterexample as a serializable document. The CLI `suite` subcommand runs
every property; the test suite reuses both the generators and the
properties directly.
"""
from __future__ import annotations

import random
from fractions import Fraction

from .approximation import FormulaSynthesizer
from .errors import NotWinnableError
from .evaluator import eval_fo, eval_modal, eval_modal_all, successor_expectation
from .formula import (
    And,
    Atom,
    Box,
    Const,
    Diamond,
    ModalFormula,
    Neg,
    Or,
    TruncSub,
    modal_rank,
    quantifier_rank,
    render_modal,
    standard_translation,
)
from .game import (
    exhaustive_spoiler,
    game_distance,
    synthesize_duplicator_strategy,
    verify_certificate,
)
from .metrics import (
    PseudometricMatrix,
    atom_gap_matrix,
    behavioural_distance,
    duality_gap,
)
from .rational import ONE, ZERO, format_rational
from .system import (
    MorphismCandidate,
    check_morphism,
    disjoint_union,
    random_system,
    restrict,
    system_to_dict,
    unravel,
)

THOUSANDTH = Fraction(1, 1000)


# ---------------------------------------------------------------------------
# Random instance generators


def random_unit(rng, denominator_bound=8) -> Fraction:
    den = rng.randint(1, denominator_bound)
    return Fraction(rng.randint(0, den), den)


def random_distribution(rng, points, max_support=4, denominator_bound=12):
    """Sparse distribution over a nonempty subset of the given points."""
    k = rng.randint(1, min(max_support, len(points)))
    support = sorted(rng.sample(list(points), k))
    den = rng.randint(k, denominator_bound)
    if k == 1:
        parts = [den]
    else:
        cuts = sorted(rng.sample(range(1, den), k - 1))
        parts = [b - a for a, b in zip([0] + cuts, cuts + [den])]
    return {s: Fraction(c, den) for s, c in zip(support, parts)}


def random_pseudometric(rng, n, denominator_bound=8) -> PseudometricMatrix:
    """Random exact pseudometric: symmetric unit-interval seed matrix closed
    under min-plus (Floyd-Warshall), which enforces the triangle law."""
    rows = [[ZERO] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            rows[i][j] = rows[j][i] = random_unit(rng, denominator_bound)
    for k in range(n):
        for i in range(n):
            for j in range(n):
                through = rows[i][k] + rows[k][j]
                if through < rows[i][j]:
                    rows[i][j] = through
    labels = tuple(f"m{i}" for i in range(n))
    return PseudometricMatrix.from_rows(labels, rows)


def random_modal_formula(rng, atoms, rank: int) -> ModalFormula:
    """Random formula with modal_rank at most the given budget."""
    if rank <= 0:
        return Const(random_unit(rng))
    roll = rng.random()
    if roll < 0.18:
        return Const(random_unit(rng))
    if roll < 0.36 and atoms:
        return Atom(rng.choice(atoms))
    if roll < 0.50:
        return (Diamond if rng.random() < 0.5 else Box)(
            random_modal_formula(rng, atoms, rank - 1)
        )
    if roll < 0.62:
        return Neg(random_modal_formula(rng, atoms, rank))
    if roll < 0.74:
        return TruncSub(random_modal_formula(rng, atoms, rank), random_unit(rng))
    left = random_modal_formula(rng, atoms, rank)
    right = random_modal_formula(rng, atoms, rank)
    return (And if rng.random() < 0.5 else Or)(left, right)


def _draw_system(rng, size, n_atoms=None, termination_prob=Fraction(1, 4)):
    if n_atoms is None:
        n_atoms = rng.randint(1, 2)
    return random_system(
        n_states=size,
        n_atoms=n_atoms,
        branching=min(rng.randint(2, 3), size),
        denominator_bound=12,
        termination_prob=termination_prob,
        seed=rng.randrange(2**31),
    )


def _sample_pairs(rng, n, count):
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    if len(pairs) <= count:
        return pairs
    return rng.sample(pairs, count)


# ---------------------------------------------------------------------------
# Properties: return None when the invariant holds, else a counterexample


def prop_chain_wellformed(rng, size, depth):
    system = _draw_system(rng, size)
    chain = behavioural_distance(system, None, depth, "W")
    for m, level in enumerate(chain.levels):
        bad = level.first_violation()
        if bad is not None:
            return _cex(system, f"level {m} is not a pseudometric: {bad}")
        if m > 0:
            prev = chain.levels[m - 1]
            for i in range(level.size):
                for j in range(level.size):
                    if level.value(i, j) < prev.value(i, j):
                        return _cex(
                            system,
                            f"chain not monotone at level {m}, pair ({i}, {j})",
                        )
    return None


def prop_lift_routes_agree(rng, size, depth):
    system = _draw_system(rng, size)
    w = behavioural_distance(system, None, depth, "W")
    k = behavioural_distance(system, None, depth, "K")
    gaps = atom_gap_matrix(w.system)
    for m in range(depth + 1):
        if w.levels[m].rows != k.levels[m].rows:
            return _cex(system, f"transport and dual chain differ at level {m}")
    for (m, i, j), plan in w.couplings.items():
        bad = plan.first_violation(system.successors[i], system.successors[j])
        if bad is not None:
            return _cex(system, f"stored coupling invalid at {(m, i, j)}: {bad}")
        cost = plan.cost(w.levels[m])
        if max(gaps.value(i, j), cost) != w.levels[m + 1].value(i, j):
            return _cex(system, f"stored plan not optimal at {(m, i, j)}")
    for (m, i, j), price in k.prices.items():
        bad = price.first_violation(k.levels[m])
        if bad is not None:
            return _cex(system, f"stored price invalid at {(m, i, j)}: {bad}")
        gap = price.gap(system.successors[i], system.successors[j])
        if max(gaps.value(i, j), gap) != k.levels[m + 1].value(i, j):
            return _cex(system, f"stored price not optimal at {(m, i, j)}")
    return None


def prop_duality_gap_zero(rng, size, depth):
    del depth
    metric = random_pseudometric(rng, max(size, 2))
    points = range(metric.size)
    for _ in range(3):
        pick = rng.random()
        pi1 = None if pick < 0.15 else random_distribution(rng, points)
        pi2 = None if pick > 0.85 else random_distribution(rng, points)
        gap = duality_gap(metric, pi1, pi2)
        if gap != ZERO:
            return {
                "metric": [[format_rational(v) for v in row] for row in metric.rows],
                "detail": f"duality gap {format_rational(gap)}",
            }
    return None


def prop_game_matches_chain(rng, size, depth):
    system = _draw_system(rng, size)
    chain = behavioural_distance(system, None, depth, "W")
    for i, j in _sample_pairs(rng, system.n_states, 3):
        d = chain.value(depth, i, j)
        if game_distance(system, None, i, j, depth, chain=chain) != d:
            return _cex(system, "game value drifts from the chain value")
        cert = synthesize_duplicator_strategy(
            system, None, i, j, depth, d, chain=chain
        )
        ok, reason = verify_certificate(cert, system)
        if not ok:
            return _cex(system, f"certificate at the game value rejected: {reason}")
        if not exhaustive_spoiler(cert, system):
            return _cex(system, "spoiler simulation disagrees with verification")
        low = d - THOUSANDTH
        if d > ZERO and low >= ZERO:
            try:
                synthesize_duplicator_strategy(
                    system, None, i, j, depth, low, chain=chain
                )
                return _cex(system, "synthesis accepted an epsilon below the value")
            except NotWinnableError:
                pass
        high = min(ONE, d + THOUSANDTH)
        cert = synthesize_duplicator_strategy(
            system, None, i, j, depth, high, chain=chain
        )
        ok, reason = verify_certificate(cert, system)
        if not ok or not exhaustive_spoiler(cert, system):
            return _cex(system, f"certificate just above the value rejected: {reason}")
    return None


def prop_formulas_nonexpansive(rng, size, depth):
    system = _draw_system(rng, size)
    chain = behavioural_distance(system, None, depth, "W")
    for _ in range(4):
        formula = random_modal_formula(rng, list(system.atoms), depth)
        r = modal_rank(formula)
        values = eval_modal_all(system, formula)
        for i in range(system.n_states):
            for j in range(system.n_states):
                if abs(values[i] - values[j]) > chain.value(r, i, j):
                    return _cex(
                        system,
                        f"{render_modal(formula)} separates ({i}, {j}) beyond "
                        f"their depth-{r} distance",
                    )
    return None


def prop_expectation_nonexpansive(rng, size, depth):
    del depth
    system = _draw_system(rng, size)
    f = tuple(random_unit(rng) for _ in range(size))
    g = tuple(random_unit(rng) for _ in range(size))
    ef = successor_expectation(system, f)
    eg = successor_expectation(system, g)
    bound = max(abs(x - y) for x, y in zip(f, g))
    worst = max(abs(x - y) for x, y in zip(ef, eg))
    if worst > bound:
        return _cex(system, "expectation expanded the sup distance")
    return None


def prop_translation_preserves(rng, size, depth):
    system = _draw_system(rng, size)
    for _ in range(4):
        formula = random_modal_formula(rng, list(system.atoms), depth)
        translated = standard_translation(formula, "x")
        if quantifier_rank(translated) != modal_rank(formula):
            return _cex(system, f"rank drifts for {render_modal(formula)}")
        a = rng.randrange(system.n_states)
        direct = eval_modal(system, formula, a)
        via_fo = eval_fo(system, translated, {"x": a})
        if direct != via_fo:
            return _cex(
                system,
                f"translation changes the value of {render_modal(formula)} at {a}",
            )
    return None


def prop_witness_certifies(rng, size, depth):
    # Synthesis cost grows quadratically in states per recursion level, so
    # this property caps the instance size independently of the suite knob.
    system = _draw_system(rng, min(size, 8))
    chain = behavioural_distance(system, None, depth, "W")
    synth = FormulaSynthesizer(chain)
    delta = Fraction(1, 32)
    for i, j in _sample_pairs(rng, system.n_states, 2):
        phi = synth.witness(i, j, depth, delta)
        if modal_rank(phi) > depth:
            return _cex(system, "witness exceeds its rank budget")
        vals = eval_modal_all(system, phi)
        gap = abs(vals[i] - vals[j])
        d = chain.value(depth, i, j)
        if gap < d - delta:
            return _cex(system, f"witness gap {format_rational(gap)} too small")
        if gap > d:
            return _cex(system, "witness separates beyond the distance ceiling")
    return None


def prop_restriction_local(rng, size, depth):
    system = _draw_system(rng, size)
    k = rng.randint(1, depth)
    formula = random_modal_formula(rng, list(system.atoms), k)
    k = modal_rank(formula)
    a = rng.randrange(system.n_states)
    sub, state_map = restrict(system, a, k)
    full = eval_modal(system, formula, a)
    local = eval_modal(sub, formula, state_map[a])
    if full != local:
        return _cex(
            system,
            f"rank-{k} formula {render_modal(formula)} changes at {a} under the "
            f"radius-{k} restriction",
        )
    return None


def prop_unravelling_equivalent(rng, size, depth):
    # The unravelling grows with branching^depth; keep both small so the
    # distance chain on the union stays cheap.
    depth = min(depth, 2)
    system = _draw_system(rng, min(size, 4), termination_prob=Fraction(1, 2))
    a = rng.randrange(system.n_states)
    tree, root = unravel(system, a, depth)
    cert = synthesize_duplicator_strategy(system, tree, a, root, depth, ZERO)
    ok, reason = verify_certificate(cert, system, tree)
    if not ok:
        return _cex(system, f"zero-distance certificate to the unravelling: {reason}")
    if not exhaustive_spoiler(cert, system, tree):
        return _cex(system, "spoiler beats the unravelling certificate")
    return None


def prop_morphism_zero_distance(rng, size, depth):
    system = _draw_system(rng, min(size, 6))
    union, offsets = disjoint_union([system, system])
    mapping = tuple(offsets[1] + i for i in range(system.n_states))
    ok, reason = check_morphism(MorphismCandidate(system, union, mapping))
    if not ok:
        return _cex(system, f"injection is not a morphism: {reason}")
    a = rng.randrange(system.n_states)
    cert = synthesize_duplicator_strategy(system, union, a, mapping[a], depth, ZERO)
    ok, reason = verify_certificate(cert, system, union)
    if not ok:
        return _cex(system, f"zero-distance certificate along the injection: {reason}")
    return None


def _cex(system, detail):
    return {"system": system_to_dict(system), "detail": detail}


PROPERTIES = {
    "chain-wellformed": prop_chain_wellformed,
    "lift-routes-agree": prop_lift_routes_agree,
    "duality-gap-zero": prop_duality_gap_zero,
    "game-matches-chain": prop_game_matches_chain,
    "formulas-nonexpansive": prop_formulas_nonexpansive,
    "expectation-nonexpansive": prop_expectation_nonexpansive,
    "translation-preserves": prop_translation_preserves,
    "witness-certifies": prop_witness_certifies,
    "restriction-local": prop_restriction_local,
    "unravelling-equivalent": prop_unravelling_equivalent,
    "morphism-zero-distance": prop_morphism_zero_distance,
}


def run_suite(seed: int, sizes, depth: int, trials: int, progress=None) -> dict:
    """Run every property for the given number of trials.

    Each property draws from its own stream seeded by (seed, name), so
    results do not depend on the order properties run in. Returns a
    JSON-ready summary; `progress` is called with each finished property.
    """
    sizes = list(sizes)
    if not sizes or any(s < 1 for s in sizes):
        sizes = [12]
    results = []
    all_pass = True
    for name, prop in PROPERTIES.items():
        rng = random.Random(f"{seed}:{name}")
        failure = None
        ran = 0
        for t in range(trials):
            size = sizes[t % len(sizes)]
            ran += 1
            cex = prop(rng, size, depth)
            if cex is not None:
                failure = dict(cex, trial=t)
                all_pass = False
                break
        entry = {
            "property": name,
            "trials": ran,
            "status": "fail" if failure else "pass",
        }
        if failure is not None:
            entry["counterexample"] = failure
        if trials == 0:
            entry["warning"] = "no trials requested; vacuous pass"
        results.append(entry)
        if progress is not None:
            progress(entry)
    return {"properties": results, "passed": all_pass, "trials": trials}
