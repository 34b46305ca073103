from fractions import Fraction

import numpy as np
import pytest

from guessbench.core import DeckSpec, FeedbackModel, History, observe
from guessbench.strategies import (
    StrategyId,
    StrategySpec,
    compatible,
    make_strategy,
    parse_strategy,
    posterior_by_pair,
    replay,
)
from oracles import all_shuffles


def play(spec, model, strat, deck):
    guesses, score = [], 0
    for card in deck:
        g = strat.next_guess()
        guesses.append(g)
        score += g == card
        strat.observe(observe(model, g, card))
    return guesses, score


@pytest.mark.parametrize(
    "text",
    [
        "complete-greedy-max",
        "nofb-constant:card=3",
        "partial-two-phase:phase=7,threshold=4.5",
        "partial-uniform:seed=11",
        "partial-ladder",
    ],
)
def test_parse_round_trips(text):
    spec = parse_strategy(text)
    assert parse_strategy(spec.label()) == spec


def test_parse_rejects_unknown():
    with pytest.raises(ValueError, match="unknown strategy"):
        parse_strategy("greedy")
    with pytest.raises(ValueError, match="bad strategy parameter"):
        parse_strategy("nofb-constant:deck=3")
    with pytest.raises(ValueError, match="bad strategy parameter"):
        parse_strategy("nofb-constant:card")


def test_parse_threshold_auto():
    spec = parse_strategy("partial-two-phase:threshold=auto")
    assert spec.threshold is None


def test_native_models_and_determinism():
    assert StrategySpec(StrategyId.NOFB_CYCLIC).native_model is FeedbackModel.NONE
    assert StrategySpec(StrategyId.PARTIAL_MLE).native_model is FeedbackModel.PARTIAL
    assert (
        StrategySpec(StrategyId.COMPLETE_GREEDY_MIN).native_model
        is FeedbackModel.COMPLETE
    )
    assert StrategySpec(StrategyId.PARTIAL_UNIFORM).deterministic is False
    assert StrategySpec(StrategyId.PARTIAL_TWO_PHASE).deterministic is True


def test_greedy_max_trace_on_1212():
    deck = DeckSpec(2, 2)
    strat = make_strategy(StrategySpec(StrategyId.COMPLETE_GREEDY_MAX), deck)
    guesses, score = play(deck, FeedbackModel.COMPLETE, strat, (1, 2, 1, 2))
    assert guesses == [1, 2, 1, 2]
    assert score == 4


def test_greedy_max_per_deck_scores():
    # all six decks of (2,2) in lexicographic order, traced by hand
    deck = DeckSpec(2, 2)
    scores = []
    for word in all_shuffles(2, 2):
        strat = make_strategy(StrategySpec(StrategyId.COMPLETE_GREEDY_MAX), deck)
        scores.append(play(deck, FeedbackModel.COMPLETE, strat, word)[1])
    assert scores == [3, 4, 3, 3, 2, 2]
    assert Fraction(sum(scores), 6) == Fraction(17, 6)


def test_greedy_min_dodges_exhausted_types():
    deck = DeckSpec(1, 3)
    strat = make_strategy(StrategySpec(StrategyId.COMPLETE_GREEDY_MIN), deck)
    guesses, score = play(deck, FeedbackModel.COMPLETE, strat, (2, 1, 3))
    # after seeing card 2 the min count is type 2's zero, a guaranteed miss;
    # once type 1 is also spent the tie reverts to the lowest index
    assert guesses == [1, 2, 1]
    assert score == 0


def test_nofb_constant_and_cyclic():
    deck = DeckSpec(2, 3)
    strat = make_strategy(StrategySpec(StrategyId.NOFB_CONSTANT), deck)
    assert [strat.next_guess() for _ in range(3)] == [1, 1, 1]
    strat = make_strategy(StrategySpec(StrategyId.NOFB_CONSTANT, card=3), deck)
    assert strat.next_guess() == 3
    strat = make_strategy(StrategySpec(StrategyId.NOFB_CYCLIC), deck)
    assert [strat.next_guess() for _ in range(6)] == [1, 2, 3, 1, 2, 3]


def test_posterior_by_pair_known_points():
    assert posterior_by_pair([1, 1, 1], [1, 0, 0]) == [
        Fraction(1, 2),
        Fraction(1, 4),
        Fraction(1, 4),
    ]
    assert posterior_by_pair([2, 0], [0, 1]) == [Fraction(1), Fraction(0)]
    # relabeled types reuse the same pair multiset
    assert posterior_by_pair([1, 1, 1], [0, 1, 0]) == [
        Fraction(1, 4),
        Fraction(1, 2),
        Fraction(1, 4),
    ]


def test_mle_picks_posterior_mode_and_persists():
    deck = DeckSpec(2, 2)
    strat = make_strategy(StrategySpec(StrategyId.PARTIAL_MLE), deck)
    assert strat.next_guess() == 1
    strat.observe(False)
    # a missed type stays the most likely next card here
    assert strat.next_guess() == 1
    strat.observe(True)
    assert strat.remaining == [1, 2]
    assert strat.wrong == [1, 0]


def test_min_mle_picks_least_likely():
    deck = DeckSpec(1, 3)
    strat = make_strategy(StrategySpec(StrategyId.PARTIAL_MIN_MLE), deck)
    strat.next_guess()
    strat.observe(False)
    # type 1 missed once: its posterior 1/2 beats 1/4, so min play avoids it
    assert strat.next_guess() == 2


def test_uniform_strategy_draws_from_stream():
    deck = DeckSpec(2, 3)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([5])))
    strat = make_strategy(StrategySpec(StrategyId.PARTIAL_UNIFORM), deck, rng)
    guesses = [strat.next_guess() for _ in range(deck.total)]
    assert all(1 <= g <= 3 for g in guesses)
    rng2 = np.random.Generator(np.random.Philox(np.random.SeedSequence([5])))
    strat2 = make_strategy(StrategySpec(StrategyId.PARTIAL_UNIFORM), deck, rng2)
    assert [strat2.next_guess() for _ in range(deck.total)] == guesses


def test_two_phase_defaults_never_switch_at_small_m():
    # threshold m/2 + sqrt(m) exceeds the phase hit maximum here, so the
    # strategy keeps guessing type 1 and scores exactly m on every deck
    deck = DeckSpec(2, 2)
    for word in all_shuffles(2, 2):
        strat = make_strategy(StrategySpec(StrategyId.PARTIAL_TWO_PHASE), deck)
        assert play(deck, FeedbackModel.PARTIAL, strat, word)[1] == 2


def test_two_phase_explicit_switch():
    deck = DeckSpec(1, 2)
    spec = StrategySpec(StrategyId.PARTIAL_TWO_PHASE, phase=1, threshold=1.0)
    strat = make_strategy(spec, deck)
    guesses, score = play(deck, FeedbackModel.PARTIAL, strat, (1, 2))
    assert guesses == [1, 2]
    assert score == 2
    strat = make_strategy(spec, deck)
    guesses, score = play(deck, FeedbackModel.PARTIAL, strat, (2, 1))
    assert guesses == [1, 1]
    assert score == 1


def test_ladder_traces():
    deck = DeckSpec(1, 2)
    strat = make_strategy(StrategySpec(StrategyId.PARTIAL_LADDER), deck)
    guesses, score = play(deck, FeedbackModel.PARTIAL, strat, (1, 2))
    assert guesses == [1, 2]
    assert score == 2

    deck = DeckSpec(2, 2)
    strat = make_strategy(StrategySpec(StrategyId.PARTIAL_LADDER), deck)
    guesses, score = play(deck, FeedbackModel.PARTIAL, strat, (2, 2, 1, 1))
    assert guesses == [1, 1, 1, 2]
    assert score == 1
    # the target caps at n: once type n is found it stays the guess
    strat = make_strategy(StrategySpec(StrategyId.PARTIAL_LADDER), deck)
    guesses, score = play(deck, FeedbackModel.PARTIAL, strat, (1, 2, 1, 2))
    assert guesses == [1, 2, 2, 2]
    assert score == 3


def test_make_strategy_validation():
    deck = DeckSpec(2, 2)
    with pytest.raises(ValueError):
        make_strategy(StrategySpec(StrategyId.NOFB_CONSTANT, card=5), deck)
    with pytest.raises(ValueError):
        make_strategy(StrategySpec(StrategyId.PARTIAL_TWO_PHASE, phase=9), deck)
    with pytest.raises(ValueError):
        make_strategy(StrategySpec(StrategyId.PARTIAL_TWO_PHASE), DeckSpec(3, 1))
    with pytest.raises(ValueError):
        make_strategy(StrategySpec(StrategyId.PARTIAL_UNIFORM, seed=-1), deck)


def test_compatibility_rules():
    nofb = StrategySpec(StrategyId.NOFB_CONSTANT)
    for model in FeedbackModel:
        assert compatible(nofb, model)
    mle = StrategySpec(StrategyId.PARTIAL_MLE)
    assert compatible(mle, FeedbackModel.PARTIAL)
    assert not compatible(mle, FeedbackModel.COMPLETE)
    assert not compatible(mle, FeedbackModel.NONE)
    greedy = StrategySpec(StrategyId.COMPLETE_GREEDY_MAX)
    assert compatible(greedy, FeedbackModel.COMPLETE)
    assert not compatible(greedy, FeedbackModel.PARTIAL)


def test_replay_reconstructs_state():
    deck = DeckSpec(2, 2)
    spec = StrategySpec(StrategyId.PARTIAL_MLE)
    live = make_strategy(spec, deck)
    history = History(FeedbackModel.PARTIAL)
    for obs in (False, True, False):
        g = live.next_guess()
        live.observe(obs)
        history = history.extended(g, obs)
    rebuilt = replay(spec, deck, history)
    assert rebuilt.remaining == live.remaining
    assert rebuilt.wrong == live.wrong
    assert rebuilt.next_guess() == live.next_guess()


def test_replay_rejects_divergent_history():
    deck = DeckSpec(2, 2)
    history = History(FeedbackModel.PARTIAL, (2,), (False,))
    with pytest.raises(ValueError, match="diverges"):
        replay(StrategySpec(StrategyId.PARTIAL_MLE), deck, history)
