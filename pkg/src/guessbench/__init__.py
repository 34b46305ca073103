"""Card-guessing games over fixed-multiplicity decks: exact optima under
three feedback models, seeded large-scale simulation, and numeric stress
tests for the tail bounds the asymptotics lean on."""

from ._version import __version__
from .combinatorics import (
    ConstraintState,
    binomial_pmf,
    chernoff_rhs,
    count_arrangements,
    hypergeom_pmf,
    iter_arrangements,
    last_card_fraction,
    next_card_distribution,
    shuffle_count,
)
from .core import (
    DeckSpec,
    FeedbackModel,
    GameRecord,
    History,
    TallyState,
    chain_length,
    derive_tallies,
    observe,
    validate_shuffle,
)
from .exact import (
    PartialSolution,
    PersistenceViolation,
    PointwiseReport,
    PolicyPlayer,
    enumerable_specs,
    exact_chain_mean,
    exact_value,
    expectimax_value,
    export_value_table,
    first_third_distribution,
    iter_shuffles,
    optimal_complete,
    optimal_partial,
    probe_persistence,
    solve_partial,
    verify_pointwise,
)
from .montecarlo import (
    RegimeCounts,
    RepeatTimeEstimate,
    StatSummary,
    classify_guesses,
    default_epsilon,
    estimate_chain,
    estimate_repeat_time,
    estimate_tail,
    estimate_value,
    exact_distinct_prefix_probability,
    play_game,
    rng_stream,
    sample_shuffle,
)
from .strategies import (
    Strategy,
    StrategyId,
    StrategySpec,
    compatible,
    make_strategy,
    parse_strategy,
)

__all__ = [
    "__version__",
    "ConstraintState",
    "DeckSpec",
    "FeedbackModel",
    "GameRecord",
    "History",
    "PartialSolution",
    "PersistenceViolation",
    "PointwiseReport",
    "PolicyPlayer",
    "RegimeCounts",
    "RepeatTimeEstimate",
    "StatSummary",
    "Strategy",
    "StrategyId",
    "StrategySpec",
    "TallyState",
    "binomial_pmf",
    "chain_length",
    "chernoff_rhs",
    "classify_guesses",
    "compatible",
    "count_arrangements",
    "default_epsilon",
    "derive_tallies",
    "enumerable_specs",
    "estimate_chain",
    "estimate_repeat_time",
    "estimate_tail",
    "estimate_value",
    "exact_chain_mean",
    "exact_distinct_prefix_probability",
    "exact_value",
    "expectimax_value",
    "export_value_table",
    "first_third_distribution",
    "hypergeom_pmf",
    "iter_arrangements",
    "iter_shuffles",
    "last_card_fraction",
    "make_strategy",
    "next_card_distribution",
    "observe",
    "optimal_complete",
    "optimal_partial",
    "parse_strategy",
    "play_game",
    "probe_persistence",
    "rng_stream",
    "sample_shuffle",
    "shuffle_count",
    "solve_partial",
    "validate_shuffle",
    "verify_pointwise",
]
