"""Exact counting for constrained multiset arrangements.

The central object is a constraint state (remaining, forbidden): words use
``remaining[i]`` copies of type ``i+1``, and the first ``forbidden[0]``
positions must avoid type 1, the next ``forbidden[1]`` positions type 2, and
so on.  Which positions carry which single-type ban never matters for counts,
only the two vectors do, so leading blocks are the canonical layout.

Counting is by inclusion-exclusion over violated banned positions.  Choosing
k_i banned positions of type i to violate contributes
(-1)^{|k|} * prod C(a_i, k_i) * (T - |k|)! / prod (m_i - k_i)!  with
T = sum(m).  Grouping terms by |k| turns each type into an integer polynomial
sum_k (-1)^k C(a_i, k) m_i!/(m_i-k)! z^k; the count is then
sum_K [z^K](prod poly_i) * (T - K)! / prod m_i!, all in exact integers.

Everything here returns ints or fractions.Fraction; no floats except in the
explicitly float-valued bound evaluator chernoff_rhs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator

from .core import DeckSpec


@dataclass(frozen=True)
class ConstraintState:
    """Remaining copies per type plus per-type counts of banned positions.

    Requires sum(forbidden) < sum(remaining), so at least one unconstrained
    slot remains, and forbidden[i] <= total - remaining[i] per type.  The
    per-type cap is exactly Hall's condition here (a banned slot for type i
    must hold one of the total - remaining[i] other cards; slots banning
    different types can always share), so valid states have at least one
    arrangement.  Callers that need the fully covered boundary case (for the
    numerators of last-card fractions) go through the module internals.
    """

    remaining: tuple[int, ...]
    forbidden: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.remaining) != len(self.forbidden) or not self.remaining:
            raise ValueError("remaining and forbidden must be equal-length, nonempty")
        if any(x < 0 for x in self.remaining) or any(x < 0 for x in self.forbidden):
            raise ValueError("counts must be nonnegative")
        total = sum(self.remaining)
        if sum(self.forbidden) >= total:
            raise ValueError("need sum(forbidden) < sum(remaining)")
        for m_i, a_i in zip(self.remaining, self.forbidden):
            if a_i > total - m_i:
                raise ValueError("a type has more banned slots than non-matching cards")

    @property
    def num_types(self) -> int:
        return len(self.remaining)

    @property
    def total(self) -> int:
        return sum(self.remaining)


def _convolve(p: list[int], q: list[int]) -> list[int]:
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return out


@lru_cache(maxsize=None)
def _count(remaining: tuple[int, ...], forbidden: tuple[int, ...]) -> int:
    """Inclusion-exclusion count; allows sum(forbidden) == sum(remaining)."""
    total = sum(remaining)
    poly = [1]
    for m_i, a_i in zip(remaining, forbidden):
        top = min(a_i, m_i)
        if top == 0:
            continue
        poly = _convolve(
            poly,
            [(-1) ** k * math.comb(a_i, k) * math.perm(m_i, k) for k in range(top + 1)],
        )
    num = sum(coeff * math.factorial(total - k) for k, coeff in enumerate(poly))
    den = math.prod(math.factorial(m_i) for m_i in remaining)
    count, rem = divmod(num, den)
    if rem or count < 0:
        raise AssertionError(f"inclusion-exclusion produced a non-count: {num}/{den}")
    return count


def count_arrangements(state: ConstraintState) -> int:
    """Number of words satisfying the constraint state."""
    return _count(state.remaining, state.forbidden)


def iter_arrangements(state: ConstraintState, max_total: int = 10) -> Iterator[tuple[int, ...]]:
    """Yield every satisfying word in lexicographic order.

    Guarded by ``max_total`` since output size is factorial; raise it
    deliberately for bigger sweeps.
    """
    if state.total > max_total:
        raise ValueError(f"total {state.total} exceeds enumeration guard {max_total}")
    banned: list[int] = []
    for t, a_i in enumerate(state.forbidden, start=1):
        banned.extend([t] * a_i)
    total = state.total
    counts = list(state.remaining)
    word: list[int] = []

    def rec(pos: int) -> Iterator[tuple[int, ...]]:
        if pos == total:
            yield tuple(word)
            return
        ban = banned[pos] if pos < len(banned) else 0
        for t in range(1, len(counts) + 1):
            if counts[t - 1] and t != ban:
                counts[t - 1] -= 1
                word.append(t)
                yield from rec(pos + 1)
                word.pop()
                counts[t - 1] += 1

    return rec(0)


def last_card_fraction(state: ConstraintState, card: int) -> Fraction:
    """Fraction of satisfying words whose final letter is ``card``.

    Dropping a final letter ``card`` leaves the banned blocks untouched, so
    the numerator is the count with one fewer copy of ``card``; zero when no
    copies remain.
    """
    if not 1 <= card <= state.num_types:
        raise ValueError(f"card {card} outside 1..{state.num_types}")
    i = card - 1
    if state.remaining[i] == 0:
        return Fraction(0)
    reduced = state.remaining[:i] + (state.remaining[i] - 1,) + state.remaining[i + 1 :]
    return Fraction(_count(reduced, state.forbidden), _count(state.remaining, state.forbidden))


def next_card_distribution(state: ConstraintState) -> tuple[Fraction, ...]:
    """Last-letter distribution over all types; sums to one exactly."""
    return tuple(last_card_fraction(state, card) for card in range(1, state.num_types + 1))


def shuffle_count(spec: DeckSpec) -> int:
    """Number of distinct shuffles: (mn)! / (m!)^n."""
    return math.factorial(spec.total) // math.factorial(spec.multiplicity) ** spec.num_types


def hypergeom_pmf(population: int, good: int, draws: int, k: int) -> Fraction:
    """P[exactly k good cards among ``draws`` of ``population``], exact.

    Normalized by C(population, good): choose where the good cards sit, then
    count placements putting k of them inside the drawn prefix.
    """
    if population < 0 or not 0 <= good <= population or not 0 <= draws <= population:
        raise ValueError("need 0 <= good, draws <= population")
    if k < max(0, good + draws - population) or k > min(good, draws):
        return Fraction(0)
    return Fraction(
        math.comb(draws, k) * math.comb(population - draws, good - k),
        math.comb(population, good),
    )


def binomial_pmf(trials: int, p: Fraction, k: int) -> Fraction:
    """Exact Binomial(trials, p) mass at k for rational p."""
    p = Fraction(p)
    if trials < 0 or not 0 <= p <= 1:
        raise ValueError("need trials >= 0 and p in [0, 1]")
    if k < 0 or k > trials:
        return Fraction(0)
    return math.comb(trials, k) * p**k * (1 - p) ** (trials - k)


def chernoff_rhs(trials: int, p: float, lam: float) -> float:
    """Upper-tail bound exp(-lam^2 * p * trials / 2) for Binomial(trials, p)."""
    if trials < 0 or not 0 <= p <= 1 or lam <= 0:
        raise ValueError("need trials >= 0, p in [0, 1], lam > 0")
    return math.exp(-0.5 * lam * lam * p * trials)
