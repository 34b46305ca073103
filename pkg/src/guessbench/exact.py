"""Exact engines: enumeration, backward induction, and verification sweeps.

Values are Fractions throughout.  Two independent routes exist for the
partial-feedback game: ``solve_partial`` runs backward induction on canonical
tally states, while ``expectimax_value`` searches the raw tree of observable
histories, merging nodes only when their sets of consistent deck suffixes are
literally identical.  Agreement between the two is the core consistency check
for the tally-state reduction.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Literal

from .combinatorics import ConstraintState, _count, last_card_fraction, shuffle_count
from .core import DeckSpec, FeedbackModel, chain_length, observe
from .strategies import Strategy, StrategySpec, compatible, make_strategy

Sense = Literal["max", "min"]

PairState = tuple[tuple[int, int], ...]

DEFAULT_ENUM_LIMIT = 10**6
DEFAULT_STATE_LIMIT = 400_000


def _check_sense(sense: str) -> Callable:
    if sense == "max":
        return max
    if sense == "min":
        return min
    raise ValueError(f"sense must be 'max' or 'min', got {sense!r}")


def iter_shuffles(spec: DeckSpec) -> Iterator[tuple[int, ...]]:
    """All distinct shuffles in lexicographic order."""
    counts = [spec.multiplicity] * spec.num_types
    word: list[int] = []
    total = spec.total

    def rec() -> Iterator[tuple[int, ...]]:
        if len(word) == total:
            yield tuple(word)
            return
        for t in range(1, len(counts) + 1):
            if counts[t - 1]:
                counts[t - 1] -= 1
                word.append(t)
                yield from rec()
                word.pop()
                counts[t - 1] += 1

    return rec()


def enumerable_specs(size_limit: int = 10**4, max_total: int = 16) -> list[DeckSpec]:
    """Deck specs whose full shuffle set fits under ``size_limit``."""
    out = []
    for m in range(1, max_total + 1):
        for n in range(1, max_total // m + 1):
            spec = DeckSpec(m, n)
            if shuffle_count(spec) <= size_limit:
                out.append(spec)
    return out


def _play_score(spec: DeckSpec, model: FeedbackModel, strat: Strategy, deck) -> int:
    score = 0
    for card in deck:
        guess = strat.next_guess()
        if guess == card:
            score += 1
        strat.observe(observe(model, guess, card))
    return score


def exact_value(
    spec: DeckSpec,
    strategy: StrategySpec | Callable[[DeckSpec], Strategy],
    model: FeedbackModel | None = None,
    limit: int = DEFAULT_ENUM_LIMIT,
) -> Fraction:
    """Expected score of a deterministic strategy by full enumeration.

    ``strategy`` is a StrategySpec or a factory producing a fresh strategy
    per game.  Randomized specs are rejected; estimate those by simulation.
    """
    if isinstance(strategy, StrategySpec):
        if not strategy.deterministic:
            raise ValueError(f"{strategy.label()} is randomized; use montecarlo.estimate_value")
        if model is None:
            model = strategy.native_model
        elif not compatible(strategy, model):
            raise ValueError(f"{strategy.label()} cannot play under {model.value} feedback")
        factory = lambda deck: make_strategy(strategy, deck)
    else:
        if model is None:
            raise ValueError("model is required when passing a strategy factory")
        factory = strategy
    size = shuffle_count(spec)
    if size > limit:
        raise ValueError(
            f"{size} shuffles exceed the enumeration limit {limit}; raise it or simulate"
        )
    total_score = sum(_play_score(spec, model, factory(spec), deck) for deck in iter_shuffles(spec))
    return Fraction(total_score, size)


# ===== complete feedback: backward induction on count multisets =====


def optimal_complete(spec: DeckSpec, sense: Sense = "max") -> Fraction:
    """Value of best (or worst) play under complete feedback.

    The drawn card is revealed either way, so a state is just the multiset of
    remaining counts; the per-turn optimum is the largest (smallest) count
    over the deck size, and the transition law is guess-independent.
    """
    _check_sense(sense)
    maximize = sense == "max"
    memo: dict[tuple[int, ...], Fraction] = {}

    def value(counts: tuple[int, ...]) -> Fraction:
        cached = memo.get(counts)
        if cached is not None:
            return cached
        size = sum(counts)
        if size == 0:
            return Fraction(0)
        best = Fraction(counts[0] if maximize else counts[-1], size)
        acc = best
        for v, mult in Counter(counts).items():
            if v == 0:
                continue
            idx = counts.index(v)
            succ = tuple(
                sorted(counts[:idx] + (v - 1,) + counts[idx + 1 :], reverse=True)
            )
            acc += Fraction(mult * v, size) * value(succ)
        memo[counts] = acc
        return acc

    start = tuple([spec.multiplicity] * spec.num_types)
    return value(start)


# ===== partial feedback: backward induction on (remaining, wrong) pairs =====


@dataclass(frozen=True)
class PartialSolution:
    spec: DeckSpec
    sense: Sense
    value: Fraction
    root: PairState
    values: dict[PairState, Fraction]
    policy: dict[PairState, tuple[tuple[int, int], ...]] | None


def _replace_pair(state: PairState, idx: int, pair: tuple[int, int]) -> PairState:
    return tuple(sorted(state[:idx] + (pair,) + state[idx + 1 :]))


def _state_vectors(state: PairState) -> tuple[tuple[int, ...], tuple[int, ...]]:
    return tuple(p[0] for p in state), tuple(p[1] for p in state)


def solve_partial(
    spec: DeckSpec,
    sense: Sense = "max",
    track_policy: bool = False,
    state_limit: int = DEFAULT_STATE_LIMIT,
) -> PartialSolution:
    """Backward induction over canonical (remaining, wrong-guess) pair multisets.

    A guess of a type with pair (m_i, a_i) is correct with the exact
    last-card fraction f; correct play removes a copy, incorrect play adds a
    banned position for that type.  Terminal states have as many banned
    positions as remaining copies: no draws are left.  Guessing an exhausted
    type is legal with f = 0, which minimal play exploits.
    """
    choose = _check_sense(sense)
    values: dict[PairState, Fraction] = {}
    policy: dict[PairState, tuple[tuple[int, int], ...]] | None = (
        {} if track_policy else None
    )

    def value(state: PairState) -> Fraction:
        cached = values.get(state)
        if cached is not None:
            return cached
        if len(values) >= state_limit:
            raise RuntimeError(
                f"more than {state_limit} partial states; raise state_limit if intended"
            )
        m_sum = sum(p[0] for p in state)
        a_sum = sum(p[1] for p in state)
        if a_sum == m_sum:
            values[state] = Fraction(0)
            return values[state]
        denom = _count(*_state_vectors(state))
        best: Fraction | None = None
        best_actions: list[tuple[int, int]] = []
        seen: set[tuple[int, int]] = set()
        for idx, pair in enumerate(state):
            if pair in seen:
                continue
            seen.add(pair)
            mi, ai = pair
            if mi == 0:
                frac = Fraction(0)
            else:
                reduced = _replace_pair(state, idx, (mi - 1, ai))
                frac = Fraction(_count(*_state_vectors(reduced)), denom)
            act = Fraction(0)
            if frac:
                act += frac * (1 + value(_replace_pair(state, idx, (mi - 1, ai))))
            if frac != 1:
                act += (1 - frac) * value(_replace_pair(state, idx, (mi, ai + 1)))
            if best is None or choose(best, act) != best:
                best, best_actions = act, [pair]
            elif act == best and pair not in best_actions:
                best_actions.append(pair)
        values[state] = best
        if policy is not None:
            policy[state] = tuple(best_actions)
        return best

    root: PairState = tuple((spec.multiplicity, 0) for _ in range(spec.num_types))
    top = value(root)
    return PartialSolution(spec, sense, top, root, values, policy)


def optimal_partial(
    spec: DeckSpec, sense: Sense = "max", state_limit: int = DEFAULT_STATE_LIMIT
) -> Fraction:
    return solve_partial(spec, sense, state_limit=state_limit).value


class PolicyPlayer:
    """Replays a solved partial-feedback policy against concrete decks.

    Tracks each concrete type's (remaining, wrong-guess) pair, looks up the
    canonical multiset in the solution's policy, and maps the chosen pair
    back to the lowest matching type index.
    """

    model = FeedbackModel.PARTIAL

    def __init__(self, solution: PartialSolution):
        if solution.policy is None:
            raise ValueError("solution was computed without track_policy")
        self._policy = solution.policy
        self._pairs = [
            [solution.spec.multiplicity, 0] for _ in range(solution.spec.num_types)
        ]
        self._last = 0

    def next_guess(self) -> int:
        state = tuple(sorted((m, a) for m, a in self._pairs))
        pair = min(self._policy[state])
        for i, (m, a) in enumerate(self._pairs):
            if (m, a) == pair:
                self._last = i + 1
                return self._last
        raise RuntimeError("optimal action matches no concrete type")

    def observe(self, obs) -> None:
        if obs:
            self._pairs[self._last - 1][0] -= 1
        else:
            self._pairs[self._last - 1][1] += 1


def export_value_table(solution: PartialSolution, path: str) -> None:
    """Write the state-value table as CSV: state, exact value, optimal actions."""
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["state", "value_num", "value_den", "optimal_actions"])
        for state in sorted(solution.values):
            val = solution.values[state]
            actions = ""
            if solution.policy is not None and state in solution.policy:
                actions = ";".join(f"{m}:{a}" for m, a in solution.policy[state])
            writer.writerow(
                ["|".join(f"{m}:{a}" for m, a in state), val.numerator, val.denominator, actions]
            )


# ===== partial feedback: independent expectimax over observable histories =====


def expectimax_value(spec: DeckSpec, sense: Sense = "max", limit: int = 10**4) -> Fraction:
    """Reference value by exhaustive search over feedback histories.

    Decks consistent with the history are carried as an explicit multiset of
    their remaining suffixes (packed little-endian into ints).  Nodes merge
    only when these multisets coincide exactly, which is sound regardless of
    any state-reduction theory: identical futures have identical values.
    """
    choose = _check_sense(sense)
    size = shuffle_count(spec)
    if size > limit:
        raise ValueError(f"{size} shuffles exceed the search limit {limit}")
    base = spec.num_types + 1
    weights = [base**t for t in range(spec.total)]
    root: dict[int, int] = {}
    for deck in iter_shuffles(spec):
        root[sum(c * w for c, w in zip(deck, weights))] = 1
    memo: dict[tuple[tuple[int, int], ...], Fraction] = {}

    def value(node: tuple[tuple[int, int], ...]) -> Fraction:
        if node[0][0] == 0:  # empty suffixes: the deck ran out
            return Fraction(0)
        cached = memo.get(node)
        if cached is not None:
            return cached
        total = 0
        shifted: dict[int, int] = {}
        groups: dict[int, dict[int, int]] = {}
        for code, cnt in node:
            total += cnt
            first, rest = code % base, code // base
            grp = groups.setdefault(first, {})
            grp[rest] = grp.get(rest, 0) + cnt
            shifted[rest] = shifted.get(rest, 0) + cnt
        best: Fraction | None = None
        for g in range(1, spec.num_types + 1):
            matched = groups.get(g, {})
            hit = sum(matched.values())
            act = Fraction(0)
            if hit:
                act += Fraction(hit, total) * (1 + value(tuple(sorted(matched.items()))))
            if hit != total:
                missed = {
                    rest: cnt - matched.get(rest, 0)
                    for rest, cnt in shifted.items()
                    if cnt != matched.get(rest, 0)
                }
                act += Fraction(total - hit, total) * value(tuple(sorted(missed.items())))
            best = act if best is None else choose(best, act)
        memo[node] = best
        return best

    return value(tuple(sorted(root.items())))


# ===== persistence probe =====


@dataclass(frozen=True)
class PersistenceViolation:
    """An optimal guess that stopped being optimal right after missing."""

    state: PairState
    guess: tuple[int, int]
    successor: PairState
    successor_optimal: tuple[tuple[int, int], ...]


def probe_persistence(
    spec: DeckSpec, state_limit: int = DEFAULT_STATE_LIMIT
) -> list[PersistenceViolation]:
    """Search optimal max-sense play for non-persistent guesses.

    Walks every state reachable under some optimal action and checks that
    a type guessed optimally and incorrectly stays in the successor's optimal
    action set.  An empty list means persistence holds for this spec.
    """
    solution = solve_partial(spec, "max", track_policy=True, state_limit=state_limit)
    assert solution.policy is not None
    violations: list[PersistenceViolation] = []
    seen: set[PairState] = set()
    stack: list[PairState] = [solution.root]
    while stack:
        state = stack.pop()
        if state in seen:
            continue
        seen.add(state)
        if sum(p[1] for p in state) == sum(p[0] for p in state):
            continue
        denom = _count(*_state_vectors(state))
        for pair in solution.policy[state]:
            mi, ai = pair
            idx = state.index(pair)
            if mi == 0:
                frac = Fraction(0)
            else:
                reduced = _replace_pair(state, idx, (mi - 1, ai))
                frac = Fraction(_count(*_state_vectors(reduced)), denom)
            if frac:
                stack.append(_replace_pair(state, idx, (mi - 1, ai)))
            if frac != 1:
                successor = _replace_pair(state, idx, (mi, ai + 1))
                terminal = sum(p[1] for p in successor) == sum(p[0] for p in successor)
                if not terminal and (mi, ai + 1) not in solution.policy[successor]:
                    violations.append(
                        PersistenceViolation(
                            state, pair, successor, solution.policy[successor]
                        )
                    )
                stack.append(successor)
    return violations


# ===== word statistics and early-game distributions =====


def exact_chain_mean(spec: DeckSpec, limit: int = DEFAULT_ENUM_LIMIT) -> Fraction:
    """Mean initial increasing-chain length over all shuffles."""
    size = shuffle_count(spec)
    if size > limit:
        raise ValueError(f"{size} shuffles exceed the enumeration limit {limit}")
    return Fraction(sum(chain_length(deck) for deck in iter_shuffles(spec)), size)


def first_third_distribution(
    spec: DeckSpec,
    strategy: StrategySpec,
    limit: int = 10**4,
) -> dict[int, Fraction]:
    """Exact pmf of corrects among the first floor(mn/3) guesses."""
    if not strategy.deterministic:
        raise ValueError("exact early-game pmf needs a deterministic strategy")
    size = shuffle_count(spec)
    if size > limit:
        raise ValueError(f"{size} shuffles exceed the enumeration limit {limit}")
    model = strategy.native_model
    cutoff = spec.total // 3
    hist: Counter[int] = Counter()
    for deck in iter_shuffles(spec):
        strat = make_strategy(strategy, spec)
        hits = 0
        for t in range(cutoff):
            guess = strat.next_guess()
            if guess == deck[t]:
                hits += 1
            strat.observe(observe(model, guess, deck[t]))
        hist[hits] += 1
    return {k: Fraction(hist[k], size) for k in sorted(hist)}


# ===== pointwise bound sweep =====


def iter_constraint_grid(max_total: int, max_types: int = 4) -> Iterator[ConstraintState]:
    """Every constraint state with at most ``max_types`` types and total ``max_total``."""

    def vectors(length: int, top: int) -> Iterator[tuple[int, ...]]:
        if length == 0:
            yield ()
            return
        for head in range(top + 1):
            for tail in vectors(length - 1, top - head):
                yield (head,) + tail

    for ntypes in range(1, max_types + 1):
        for remaining in vectors(ntypes, max_total):
            total = sum(remaining)
            if total == 0:
                continue
            for forbidden in vectors(ntypes, total - 1):
                if any(a > total - m for m, a in zip(remaining, forbidden)):
                    continue
                yield ConstraintState(remaining, forbidden)


@dataclass(frozen=True)
class PointwiseReport:
    max_ratio: Fraction
    witnesses: tuple[tuple[ConstraintState, int], ...]
    witness_count: int
    states_checked: int

    @property
    def passed(self) -> bool:
        return self.max_ratio <= 1


def verify_pointwise(max_total: int, max_types: int = 4, witness_cap: int = 64) -> PointwiseReport:
    """Check f_i <= m_i / (total - a_i) across the whole grid, exactly.

    Reports the largest ratio of the two sides and the states attaining it;
    the claim holds iff that maximum is at most one.
    """
    best = Fraction(0)
    witnesses: list[tuple[ConstraintState, int]] = []
    witness_count = 0
    checked = 0
    for state in iter_constraint_grid(max_total, max_types):
        checked += 1
        total = state.total
        for card in range(1, state.num_types + 1):
            m_i = state.remaining[card - 1]
            if m_i == 0:
                continue
            frac = last_card_fraction(state, card)
            ratio = frac * Fraction(total - state.forbidden[card - 1], m_i)
            if ratio > best:
                best = ratio
                witnesses = [(state, card)]
                witness_count = 1
            elif ratio == best:
                witness_count += 1
                if len(witnesses) < witness_cap:
                    witnesses.append((state, card))
    return PointwiseReport(best, tuple(witnesses), witness_count, checked)
