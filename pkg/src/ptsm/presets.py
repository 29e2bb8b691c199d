"""Built-in example systems.

The main preset is a pair of five-state processes that agree except for a
skew parameter eps in [0, 1/2] on one branch: the left process flips fair
coins, the right one flips coins biased by eps. Their depth-3 distance
works out to eps - eps^2, and the depth-2 distances between the branch
states are (eps, 1/2, 1/2 - eps, 0), which makes the pair a convenient
smoke test for the transport, dual, game and synthesis routes at once.

Zero-weight edges are dropped when eps hits the boundary, so every preset
is a valid system for any eps in [0, 1/2].
"""
from __future__ import annotations

from fractions import Fraction
from pathlib import Path

from .errors import ParameterError
from .rational import ONE, ZERO
from .system import TransitionSystem, build_system, disjoint_union, save_system

HALF = Fraction(1, 2)


def _weighted(*pairs):
    # keep only positive-weight edges; {} means terminating elsewhere
    kept = {label: w for label, w in pairs if w > ZERO}
    return kept


def skewed_halves(eps) -> tuple[TransitionSystem, TransitionSystem]:
    """The fair process (states x, x1..x4) and its eps-biased twin
    (states y, y1..y4), as two separate systems with no atoms."""
    eps = Fraction(eps)
    if eps < ZERO or eps > HALF:
        raise ParameterError("skew must lie in [0, 1/2]")
    fair = build_system(
        [],
        [
            ("x", {}, {"x1": HALF, "x2": HALF}),
            ("x1", {}, {"x3": HALF, "x4": HALF}),
            ("x2", {}, {"x2": ONE}),
            ("x3", {}, None),
            ("x4", {}, {"x4": ONE}),
        ],
    )
    biased = build_system(
        [],
        [
            ("y", {}, _weighted(("y1", HALF - eps), ("y2", HALF + eps))),
            ("y1", {}, _weighted(("y3", HALF - eps), ("y4", HALF + eps))),
            ("y2", {}, {"y2": ONE}),
            ("y3", {}, None),
            ("y4", {}, {"y4": ONE}),
        ],
    )
    return fair, biased


def skewed_twin(eps) -> TransitionSystem:
    """Both halves in one ten-state system (labels x.. and y..)."""
    fair, biased = skewed_halves(eps)
    union, _ = disjoint_union([fair, biased])
    return union


FIXTURE_SKEWS = (
    ("twin_eps_0", Fraction(0)),
    ("twin_eps_1_10", Fraction(1, 10)),
    ("twin_eps_1_4", Fraction(1, 4)),
    ("twin_eps_1_2", Fraction(1, 2)),
)


def write_fixtures(directory) -> list[Path]:
    """Write the standard twin fixtures as JSON files; returns the paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    out = []
    for name, eps in FIXTURE_SKEWS:
        path = directory / f"{name}.json"
        save_system(skewed_twin(eps), path)
        out.append(path)
    return out
