"""Seeded simulation of guessing games at scales enumeration cannot reach.

Trials are partitioned into fixed-size blocks; block b draws its decks from
the counter-based stream (seed, 0, b) and any strategy randomness from
(strategy seed, 1, b).  Results are merged as integer score histograms, so
estimates are bit-identical for a given (seed, trials) no matter how many
workers run the blocks.

Common strategies have vectorized kernels; the per-step generic path is the
semantic reference and consumes the streams identically, so both paths yield
the same trial-by-trial scores (tested, not assumed).
"""

from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import DeckSpec, FeedbackModel, GameRecord, observe
from .strategies import StrategyId, StrategySpec, compatible, make_strategy

RNG_FAMILY = "philox4x64"
BLOCK_SIZE = 4096
_CHUNK = 512
_DECK_TAG = 0
_STRATEGY_TAG = 1


def rng_stream(seed: int, *path: int) -> np.random.Generator:
    """Independent reproducible stream for (seed, path)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, *path])))


def sample_shuffle(spec: DeckSpec, rng: np.random.Generator) -> np.ndarray:
    """Uniform shuffle by in-place sequential swaps of the canonical word."""
    return rng.permutation(np.array(spec.canonical_word(), dtype=np.int16))


def play_game(
    spec: DeckSpec,
    model: FeedbackModel,
    strategy,
    shuffle,
    strategy_id: str = "",
    seed: int | None = None,
) -> GameRecord:
    """Drive one strategy instance through a full deck."""
    guesses: list[int] = []
    correct: list[bool] = []
    word = tuple(int(c) for c in shuffle)
    for card in word:
        g = int(strategy.next_guess())
        guesses.append(g)
        correct.append(g == card)
        strategy.observe(observe(model, g, card))
    return GameRecord(
        spec=spec,
        model=model,
        strategy=strategy_id,
        seed=seed,
        shuffle=word,
        guesses=tuple(guesses),
        correct=tuple(correct),
        score=sum(correct),
    )


# ===== score summaries =====


@dataclass(frozen=True)
class StatSummary:
    """Integer score histogram plus the moments derived from it."""

    trials: int
    histogram: tuple[tuple[int, int], ...]

    @classmethod
    def from_counter(cls, counts: Counter[int]) -> StatSummary:
        return cls(sum(counts.values()), tuple(sorted(counts.items())))

    @staticmethod
    def merge(parts: list[StatSummary]) -> StatSummary:
        total: Counter[int] = Counter()
        for part in parts:
            total.update(dict(part.histogram))
        return StatSummary.from_counter(total)

    @property
    def mean(self) -> float:
        return sum(s * c for s, c in self.histogram) / self.trials

    @property
    def variance(self) -> float:
        if self.trials < 2:
            return 0.0
        mu = self.mean
        return sum(c * (s - mu) ** 2 for s, c in self.histogram) / (self.trials - 1)

    @property
    def sd(self) -> float:
        return math.sqrt(self.variance)

    @property
    def se(self) -> float:
        return self.sd / math.sqrt(self.trials)

    @property
    def min(self) -> int:
        return self.histogram[0][0]

    @property
    def max(self) -> int:
        return self.histogram[-1][0]

    def tail_frequency(self, threshold: float) -> float:
        """Fraction of trials with score strictly above ``threshold``."""
        return sum(c for s, c in self.histogram if s > threshold) / self.trials


# ===== vectorized per-block kernels =====


def _kernel_greedy(maximize: bool):
    def kernel(spec: DeckSpec, sspec: StrategySpec, decks: np.ndarray, strat_rng) -> np.ndarray:
        rows = np.arange(decks.shape[0])
        counts = np.full((decks.shape[0], spec.num_types), spec.multiplicity, dtype=np.int64)
        scores = np.zeros(decks.shape[0], dtype=np.int64)
        for t in range(decks.shape[1]):
            guess = counts.argmax(axis=1) if maximize else counts.argmin(axis=1)
            revealed = decks[:, t] - 1
            scores += guess == revealed
            counts[rows, revealed] -= 1
        return scores

    return kernel


def _kernel_constant(spec, sspec, decks, strat_rng):
    card = sspec.card if sspec.card is not None else 1
    return (decks == card).sum(axis=1)


def _kernel_cyclic(spec, sspec, decks, strat_rng):
    pattern = np.array([t % spec.num_types + 1 for t in range(spec.total)], dtype=np.int16)
    return (decks == pattern).sum(axis=1)


def _kernel_uniform(spec, sspec, decks, strat_rng):
    guesses = strat_rng.integers(1, spec.num_types + 1, size=decks.shape)
    return (guesses == decks).sum(axis=1)


def _kernel_two_phase(spec, sspec, decks, strat_rng):
    template = make_strategy(sspec, spec)
    phase, threshold = template.phase, template.threshold
    early_hits = (decks[:, :phase] == 1).sum(axis=1)
    switched = early_hits >= threshold
    late_twos = (decks[:, phase:] == 2).sum(axis=1)
    return np.where(switched, early_hits + late_twos, spec.multiplicity)


def _kernel_ladder(spec, sspec, decks, strat_rng):
    n = spec.num_types
    target = np.ones(decks.shape[0], dtype=np.int64)
    scores = np.zeros(decks.shape[0], dtype=np.int64)
    for t in range(decks.shape[1]):
        hit = decks[:, t] == np.minimum(target, n)
        scores += hit
        target += hit & (target <= n)
    return scores


_KERNELS = {
    StrategyId.COMPLETE_GREEDY_MAX: _kernel_greedy(True),
    StrategyId.COMPLETE_GREEDY_MIN: _kernel_greedy(False),
    StrategyId.NOFB_CONSTANT: _kernel_constant,
    StrategyId.NOFB_CYCLIC: _kernel_cyclic,
    StrategyId.PARTIAL_UNIFORM: _kernel_uniform,
    StrategyId.PARTIAL_TWO_PHASE: _kernel_two_phase,
    StrategyId.PARTIAL_LADDER: _kernel_ladder,
}


def _blocks(trials: int) -> list[tuple[int, int]]:
    return [
        (b, min(BLOCK_SIZE, trials - b * BLOCK_SIZE))
        for b in range((trials + BLOCK_SIZE - 1) // BLOCK_SIZE)
    ]


def _block_scores(
    spec: DeckSpec,
    model: FeedbackModel,
    sspec: StrategySpec,
    count: int,
    seed: int,
    block_id: int,
) -> np.ndarray:
    deck_rng = rng_stream(seed, _DECK_TAG, block_id)
    strat_rng = rng_stream(sspec.seed or 0, _STRATEGY_TAG, block_id)
    word = np.array(spec.canonical_word(), dtype=np.int16)
    kernel = _KERNELS.get(sspec.id)
    if kernel is not None and model is sspec.native_model:
        scores = np.empty(count, dtype=np.int64)
        done = 0
        while done < count:
            step = min(_CHUNK, count - done)
            decks = np.stack([deck_rng.permutation(word) for _ in range(step)])
            scores[done : done + step] = kernel(spec, sspec, decks, strat_rng)
            done += step
        return scores
    scores = np.empty(count, dtype=np.int64)
    for i in range(count):
        deck = deck_rng.permutation(word)
        strat = make_strategy(sspec, spec, strat_rng)
        hits = 0
        for card in deck:
            g = strat.next_guess()
            card = int(card)
            if g == card:
                hits += 1
            strat.observe(observe(model, g, card))
        scores[i] = hits
    return scores


def _score_block_job(payload) -> list[tuple[int, int]]:
    m, n, model_value, sspec, count, seed, block_id = payload
    scores = _block_scores(
        DeckSpec(m, n), FeedbackModel(model_value), sspec, count, seed, block_id
    )
    return sorted(Counter(scores.tolist()).items())


def _resolve_model(sspec: StrategySpec, model: FeedbackModel | None) -> FeedbackModel:
    if model is None:
        return sspec.native_model
    if not compatible(sspec, model):
        raise ValueError(f"{sspec.label()} cannot play under {model.value} feedback")
    return model


def estimate_value(
    spec: DeckSpec,
    model: FeedbackModel | None,
    strategy: StrategySpec,
    trials: int,
    seed: int,
    workers: int = 1,
) -> StatSummary:
    """Simulate ``trials`` games and summarize scores.

    Deterministic in (seed, trials) regardless of ``workers``: blocks own
    disjoint stream indices and histograms merge associatively.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    model = _resolve_model(strategy, model)
    jobs = [
        (spec.multiplicity, spec.num_types, model.value, strategy, count, seed, block_id)
        for block_id, count in _blocks(trials)
    ]
    hist: Counter[int] = Counter()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for items in pool.map(_score_block_job, jobs):
                hist.update(dict(items))
    else:
        for job in jobs:
            hist.update(dict(_score_block_job(job)))
    return StatSummary.from_counter(hist)


def estimate_tail(
    spec: DeckSpec,
    model: FeedbackModel | None,
    strategy: StrategySpec,
    lam: float,
    trials: int,
    seed: int,
    workers: int = 1,
) -> float:
    """Empirical P[score > lam * mn]."""
    if not 0 < lam <= 1:
        raise ValueError("lam must lie in (0, 1]")
    summary = estimate_value(spec, model, strategy, trials, seed, workers)
    return summary.tail_frequency(lam * spec.total)


def iter_game_records(
    spec: DeckSpec,
    model: FeedbackModel | None,
    strategy: StrategySpec,
    trials: int,
    seed: int,
):
    """Full game records along the generic path, same decks as estimate_value."""
    model = _resolve_model(strategy, model)
    word = np.array(spec.canonical_word(), dtype=np.int16)
    for block_id, count in _blocks(trials):
        deck_rng = rng_stream(seed, _DECK_TAG, block_id)
        strat_rng = rng_stream(strategy.seed or 0, _STRATEGY_TAG, block_id)
        for _ in range(count):
            deck = deck_rng.permutation(word)
            strat = make_strategy(strategy, spec, strat_rng)
            yield play_game(spec, model, strat, deck, strategy.label(), seed)


# ===== waiting times and chain statistic =====


@dataclass(frozen=True)
class RepeatTimeEstimate:
    """Empirical distribution of the first time a type reaches j copies."""

    spec: DeckSpec
    j: int
    trials: int
    histogram: tuple[tuple[int, int], ...]

    def survival(self, t: int) -> float:
        return sum(c for v, c in self.histogram if v > t) / self.trials

    def survival_se(self, t: int) -> float:
        p = self.survival(t)
        return math.sqrt(p * (1 - p) / self.trials)


def estimate_repeat_time(spec: DeckSpec, j: int, trials: int, seed: int) -> RepeatTimeEstimate:
    """Simulate the draw count at which some type first hits j occurrences."""
    if not 1 <= j <= spec.multiplicity:
        raise ValueError(f"j must lie in 1..{spec.multiplicity}")
    if trials < 1:
        raise ValueError("trials must be positive")
    word = np.array(spec.canonical_word(), dtype=np.int16)
    hist: Counter[int] = Counter()
    for block_id, count in _blocks(trials):
        deck_rng = rng_stream(seed, _DECK_TAG, block_id)
        for _ in range(count):
            deck = deck_rng.permutation(word)
            seen = [0] * spec.num_types
            for t, card in enumerate(deck, start=1):
                seen[card - 1] += 1
                if seen[card - 1] == j:
                    hist[t] += 1
                    break
    return RepeatTimeEstimate(spec, j, trials, tuple(sorted(hist.items())))


def exact_distinct_prefix_probability(spec: DeckSpec, t: int) -> Fraction:
    """P[first t cards are t distinct types], the exact survival of the
    first repeat time: product over k < t of m(n-k) / (mn-k)."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    m, n, mn = spec.multiplicity, spec.num_types, spec.total
    if t > mn:
        return Fraction(0)
    out = Fraction(1)
    for k in range(1, t):
        out *= Fraction(m * (n - k), mn - k)
        if out == 0:
            break
    return out


def estimate_chain(spec: DeckSpec, trials: int, seed: int) -> StatSummary:
    """Simulated distribution of the initial increasing-chain length."""
    if trials < 1:
        raise ValueError("trials must be positive")
    word = np.array(spec.canonical_word(), dtype=np.int16)
    n = spec.num_types
    hist: Counter[int] = Counter()
    for block_id, count in _blocks(trials):
        deck_rng = rng_stream(seed, _DECK_TAG, block_id)
        done = 0
        while done < count:
            step = min(_CHUNK, count - done)
            decks = np.stack([deck_rng.permutation(word) for _ in range(step)])
            target = np.ones(step, dtype=np.int64)
            for t in range(spec.total):
                # comparison against the raw target self-limits at n + 1
                target += decks[:, t] == target
            hist.update((target - 1).tolist())
            done += step
    return StatSummary.from_counter(hist)


# ===== regime classification =====


def default_epsilon(m: int) -> float:
    """min(1/8, (log m / m)^(1/4)); the cap binds at desk scales."""
    if m < 2:
        return 0.125
    return min(0.125, (math.log(m) / m) ** 0.25)


@dataclass(frozen=True)
class RegimeCounts:
    """Per-game guess counts split by how often the guessed type was tried before."""

    epsilon: float
    sub_guesses: int
    sub_correct: int
    critical: tuple[tuple[int, int, int], ...]  # (type, guesses, correct)
    super_guesses: int
    super_correct: int


def classify_guesses(record: GameRecord, epsilon: float) -> RegimeCounts:
    """Label each guess by the guessed type's prior guess count.

    A guess of type i at a point where i was guessed a(i) times before is
    subcritical when a(i) < eps*mn, supercritical when a(i) >= (1-eps)*mn,
    critical in between.
    """
    if not 0 < epsilon < 0.5:
        raise ValueError("epsilon must lie in (0, 1/2)")
    mn = record.spec.total
    low, high = epsilon * mn, (1 - epsilon) * mn
    prior = [0] * record.spec.num_types
    sub_g = sub_c = sup_g = sup_c = 0
    crit_g = Counter()
    crit_c = Counter()
    for guess, hit in zip(record.guesses, record.correct):
        a = prior[guess - 1]
        if a < low:
            sub_g += 1
            sub_c += hit
        elif a >= high:
            sup_g += 1
            sup_c += hit
        else:
            crit_g[guess] += 1
            crit_c[guess] += hit
        prior[guess - 1] += 1
    critical = tuple((t, crit_g[t], crit_c[t]) for t in sorted(crit_g))
    return RegimeCounts(epsilon, sub_g, sub_c, critical, sup_g, sup_c)
