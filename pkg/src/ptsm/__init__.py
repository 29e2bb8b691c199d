"""Exact behavioural distances for probabilistic transition systems.

The toolkit computes depth-indexed behavioural pseudometrics through two
independent LP routes (optimal transport and dual price functions), plays
the matching bisimulation game with checkable strategy certificates, and
synthesizes bounded-rank modal formulas whose truth-value gaps certify the
distances. All arithmetic is exact rational; no floats anywhere.
"""

__version__ = "0.1.0"

from .approximation import (
    FormulaSynthesizer,
    StateFunction,
    approximate_nonexpansive,
    mcshane_extend,
    optimal_price_profile,
    pair_approximation,
    witness_formula,
)
from .errors import (
    AtomMismatchError,
    CertificateFormatError,
    DanglingStateError,
    DuplicateLabelError,
    FormulaSyntaxError,
    LengthMismatchError,
    LPError,
    NonExpansiveError,
    NotWinnableError,
    ParameterError,
    PTSError,
    RangeError,
    RankViolationError,
    RationalSyntaxError,
    SlackTooSmallError,
    SystemFormatError,
    UnboundVariableError,
    UnknownAtomError,
    WeightSumError,
)
from .evaluator import eval_fo, eval_modal, eval_modal_all, successor_expectation
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
    fo_from_dict,
    fo_to_dict,
    free_variables,
    modal_from_dict,
    modal_rank,
    modal_to_dict,
    normalize_modal,
    parse_fo,
    parse_modal,
    quantifier_rank,
    render_fo,
    render_modal,
    simplify_modal,
    standard_translation,
)
from .game import (
    DuplicatorMove,
    GameConfig,
    StrategyCertificate,
    certificate_from_dict,
    certificate_to_dict,
    exhaustive_spoiler,
    game_distance,
    partial_isomorphism,
    synthesize_duplicator_strategy,
    verify_certificate,
)
from .metrics import (
    Coupling,
    DistanceChain,
    PriceFunction,
    PseudometricMatrix,
    atom_gap_matrix,
    behavioural_distance,
    duality_gap,
    kantorovich_lift,
    logical_distance_lb,
    wasserstein_lift,
)
from .presets import skewed_halves, skewed_twin, write_fixtures
from .rational import (
    ceil_to_grid,
    check_unit_interval,
    decimal_repr,
    floor_to_grid,
    format_rational,
    nearest_grid,
    parse_rational,
)
from .suite import (
    random_distribution,
    random_modal_formula,
    random_pseudometric,
    random_unit,
    run_suite,
)
from .system import (
    MorphismCandidate,
    TransitionSystem,
    build_system,
    check_morphism,
    disjoint_union,
    gaifman_distance,
    gaifman_distances_from,
    load_system,
    neighborhood,
    random_system,
    restrict,
    save_system,
    system_from_dict,
    system_to_dict,
    unravel,
    validate_system,
)

__all__ = [
    "AtomMismatchError",
    "And",
    "Atom",
    "Box",
    "CertificateFormatError",
    "Const",
    "Coupling",
    "DanglingStateError",
    "Diamond",
    "DistanceChain",
    "DuplicateLabelError",
    "DuplicatorMove",
    "FOAnd",
    "FOAtom",
    "FOConst",
    "FODiamondBind",
    "FOEq",
    "FOExists",
    "FOFormula",
    "FONeg",
    "FOOr",
    "FOTruncSub",
    "FormulaSynthesizer",
    "FormulaSyntaxError",
    "GameConfig",
    "LengthMismatchError",
    "LPError",
    "ModalFormula",
    "MorphismCandidate",
    "Neg",
    "NonExpansiveError",
    "NotWinnableError",
    "Or",
    "PTSError",
    "ParameterError",
    "PriceFunction",
    "PseudometricMatrix",
    "RangeError",
    "RankViolationError",
    "RationalSyntaxError",
    "SlackTooSmallError",
    "StateFunction",
    "StrategyCertificate",
    "SystemFormatError",
    "TransitionSystem",
    "TruncSub",
    "UnboundVariableError",
    "UnknownAtomError",
    "WeightSumError",
    "approximate_nonexpansive",
    "atom_gap_matrix",
    "behavioural_distance",
    "build_system",
    "certificate_from_dict",
    "certificate_to_dict",
    "check_morphism",
    "disjoint_union",
    "duality_gap",
    "eval_fo",
    "eval_modal",
    "eval_modal_all",
    "exhaustive_spoiler",
    "fo_from_dict",
    "fo_to_dict",
    "free_variables",
    "gaifman_distance",
    "gaifman_distances_from",
    "game_distance",
    "kantorovich_lift",
    "load_system",
    "logical_distance_lb",
    "mcshane_extend",
    "modal_from_dict",
    "modal_rank",
    "modal_to_dict",
    "neighborhood",
    "normalize_modal",
    "optimal_price_profile",
    "pair_approximation",
    "parse_fo",
    "parse_modal",
    "partial_isomorphism",
    "quantifier_rank",
    "random_system",
    "render_fo",
    "render_modal",
    "restrict",
    "save_system",
    "simplify_modal",
    "skewed_halves",
    "skewed_twin",
    "standard_translation",
    "successor_expectation",
    "synthesize_duplicator_strategy",
    "system_from_dict",
    "system_to_dict",
    "unravel",
    "validate_system",
    "verify_certificate",
    "wasserstein_lift",
    "ceil_to_grid",
    "check_unit_interval",
    "decimal_repr",
    "floor_to_grid",
    "format_rational",
    "nearest_grid",
    "parse_rational",
    "random_distribution",
    "random_modal_formula",
    "random_pseudometric",
    "random_unit",
    "run_suite",
    "witness_formula",
    "write_fixtures",
]
