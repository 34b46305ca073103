import itertools
import math
from fractions import Fraction

import pytest

from guessbench.bounds import (
    FAIL,
    INCONCLUSIVE,
    PASS,
    WalkSpec,
    binomial_pmf_map,
    check_dominance,
    conditional_tail_rhs,
    damped_draw_pmf,
    empirical_maximal,
    first_third_dominance_reports,
    first_third_pmf,
    hyp_single_tail_exact,
    hyp_tail_report,
    hypergeometric_pmf_map,
    regime_bound_report,
    single_tail_grid,
    union_bound_rhs,
)
from guessbench.combinatorics import binomial_pmf, hypergeom_pmf
from guessbench.core import DeckSpec
from guessbench.exact import first_third_distribution
from guessbench.strategies import StrategyId, StrategySpec
from oracles import brute_uniform_prefix_hits


def test_union_bound_rhs_golden():
    assert union_bound_rhs(1.0, 1.0, 1.0, 1.0, 16, 16) == pytest.approx(
        8 * math.exp(-1 / 16)
    )
    base = union_bound_rhs(0.5, 1.0, 1.0, 0.5, 16, 32)
    assert union_bound_rhs(0.5, 2.0, 1.0, 0.5, 16, 32) == pytest.approx(2 * base)
    assert union_bound_rhs(0.5, 1.0, 1.0, 0.5, 16, 64) == pytest.approx(2 * base)


def test_union_bound_rhs_preconditions():
    with pytest.raises(ValueError):
        union_bound_rhs(0.0, 1.0, 1.0, 0.5, 16, 32)
    with pytest.raises(ValueError):
        union_bound_rhs(0.5, -1.0, 1.0, 0.5, 16, 32)
    with pytest.raises(ValueError):
        union_bound_rhs(0.5, 1.0, 0.0, 0.5, 16, 32)
    with pytest.raises(ValueError):
        union_bound_rhs(0.5, 1.0, 1.0, 1.5, 16, 32)
    with pytest.raises(ValueError):
        union_bound_rhs(0.5, 1.0, 1.0, 0.5, 32, 16)
    # k0 below 2/lam
    with pytest.raises(ValueError):
        union_bound_rhs(0.5, 1.0, 0.1, 0.5, 16, 32)


def test_walk_spec_validation():
    with pytest.raises(ValueError):
        WalkSpec(-0.1, 10)
    with pytest.raises(ValueError):
        WalkSpec(0.5, 0)


def test_empirical_maximal_degenerate_walks():
    # a zero-success walk never exceeds a positive cutoff
    report = empirical_maximal(WalkSpec(0.0, 64), 1.0, 16, 32, 500, 0)
    assert report.lhs == 0.0
    assert report.verdict == INCONCLUSIVE  # rhs blows past one at p = 0
    # huge lam: S_k > 4.5k is impossible and the rhs is tiny
    report = empirical_maximal(WalkSpec(0.5, 64), 8.0, 16, 64, 500, 0)
    assert report.lhs == 0.0
    assert report.rhs < 1
    assert report.verdict == PASS


def test_empirical_maximal_deterministic_and_bounded():
    a = empirical_maximal(WalkSpec(0.5, 256), 0.2, 16, 256, 3000, 9)
    b = empirical_maximal(WalkSpec(0.5, 256), 0.2, 16, 256, 3000, 9)
    assert a == b
    assert 0.0 < a.lhs <= 1.0
    assert a.lhs_radius > 0
    with pytest.raises(ValueError):
        empirical_maximal(WalkSpec(0.5, 64), 1.0, 16, 128, 100, 0)
    with pytest.raises(ValueError):
        empirical_maximal(WalkSpec(0.5, 64), 1.0, 16, 32, 0, 0)


def test_hyp_single_tail_exact_golden():
    assert hyp_single_tail_exact(20, 4, 5, 1.0) == Fraction(31, 969)
    assert hyp_single_tail_exact(20, 4, 0, 1.0) == 0
    # drawing everything finds every good card, never more
    assert hyp_single_tail_exact(20, 4, 20, 0.25) == 0


def test_hyp_tail_report_single():
    report = hyp_tail_report(20, 4, 5, 1.0)
    assert report.bound == "hyp-tail-single"
    assert report.verdict == PASS
    assert report.lhs == pytest.approx(31 / 969)
    assert report.rhs == pytest.approx(3 * math.exp(-5 * 4 / 40))
    assert "31/969" in report.notes

    assert hyp_tail_report(20, 4, 0, 1.0).verdict == PASS
    assert hyp_tail_report(20, 4, 20, 0.25).verdict == PASS


def test_hyp_tail_report_hypothesis_violation():
    report = hyp_tail_report(5, 3, 2, 1.0)
    assert report.verdict == INCONCLUSIVE
    assert "violated" in report.notes


def test_hyp_tail_report_validation():
    with pytest.raises(ValueError):
        hyp_tail_report(10, 11, 2, 1.0)
    with pytest.raises(ValueError):
        hyp_tail_report(10, 2, 11, 1.0)
    with pytest.raises(ValueError):
        hyp_tail_report(10, 2, 2, 0.0)
    with pytest.raises(ValueError):
        hyp_tail_report(10, 2, 2, 1.0, mode="weird")
    with pytest.raises(ValueError):
        hyp_tail_report(10, 2, 2, 1.0, mode="maximal")
    with pytest.raises(ValueError):
        hyp_tail_report(10, 2, 2, 1.0, mode="maximal", window=(4, 12))


def test_hyp_tail_report_maximal():
    a = hyp_tail_report(30, 4, 30, 1.0, mode="maximal", window=(8, 30), trials=2000, seed=1)
    b = hyp_tail_report(30, 4, 30, 1.0, mode="maximal", window=(8, 30), trials=2000, seed=1)
    assert a == b
    assert a.bound == "hyp-tail-maximal"
    assert 0.0 <= a.lhs <= 1.0
    # the provable constants leave the rhs above one at this scale
    assert a.rhs >= 1
    assert a.verdict == INCONCLUSIVE
    assert "c_prime=3" in a.notes

    payload = a.to_json_dict()
    assert payload["verdict"] == INCONCLUSIVE
    assert payload["params"]["b0"] == 8


def test_single_tail_grid_all_pass():
    reports = single_tail_grid(20)
    assert len(reports) > 400
    assert all(r.bound == "hyp-tail-single" for r in reports)
    assert all(r.verdict == PASS for r in reports)


def test_dominance_reflexive_and_monotone():
    pmf = binomial_pmf_map(6, Fraction(1, 3))
    assert check_dominance(pmf, pmf).dominates

    low = binomial_pmf_map(10, Fraction(1, 4))
    high = binomial_pmf_map(10, Fraction(1, 2))
    assert check_dominance(high, low).dominates
    flipped = check_dominance(low, high)
    assert not flipped.dominates
    assert flipped.witness is not None
    assert flipped.upper_survival < flipped.lower_survival


def test_dominance_antisymmetry():
    pmfs = [
        binomial_pmf_map(5, Fraction(1, 3)),
        hypergeometric_pmf_map(10, 4, 5),
        {0: Fraction(1, 2), 3: Fraction(1, 2)},
    ]
    for a, b in itertools.product(pmfs, repeat=2):
        if check_dominance(a, b).dominates and check_dominance(b, a).dominates:
            support = set(a) | set(b)
            assert all(
                a.get(k, Fraction(0)) == b.get(k, Fraction(0)) for k in support
            )


def test_dominance_transitive_chain():
    chain = [binomial_pmf_map(8, Fraction(i, 10)) for i in (2, 4, 7)]
    assert check_dominance(chain[1], chain[0]).dominates
    assert check_dominance(chain[2], chain[1]).dominates
    assert check_dominance(chain[2], chain[0]).dominates


def test_dominance_validates_pmfs():
    good = binomial_pmf_map(3, Fraction(1, 2))
    with pytest.raises(ValueError):
        check_dominance(good, {0: Fraction(1, 2)})
    with pytest.raises(ValueError):
        check_dominance({0: Fraction(3, 2), 1: Fraction(-1, 2)}, good)


def test_pmf_maps_match_scalar_functions():
    bmap = binomial_pmf_map(7, Fraction(2, 5))
    assert sum(bmap.values()) == 1
    assert all(bmap[k] == binomial_pmf(7, Fraction(2, 5), k) for k in bmap)
    hmap = hypergeometric_pmf_map(12, 5, 6)
    assert sum(hmap.values()) == 1
    assert all(hmap[k] == hypergeom_pmf(12, 5, 6, k) for k in hmap)


def test_damped_draw_pmf_recovers_hypergeometric():
    # the hypergeometric map keeps explicit zero entries; compare as functions
    for population, good, draws in [(6, 3, 4), (7, 2, 5), (5, 5, 3)]:
        ones = [Fraction(1)] * draws
        damped = damped_draw_pmf(population, good, draws, ones)
        reference = hypergeometric_pmf_map(population, good, draws)
        for k in set(damped) | set(reference):
            assert damped.get(k, Fraction(0)) == reference.get(k, Fraction(0))


def test_damped_draw_pmf_dominated_by_hypergeometric():
    population, good = 6, 3
    for draws in (1, 2, 3):
        envelope = hypergeometric_pmf_map(population, good, draws)
        for damping in itertools.product(
            (Fraction(0), Fraction(1, 2), Fraction(1)), repeat=draws
        ):
            pmf = damped_draw_pmf(population, good, draws, list(damping))
            assert sum(pmf.values()) == 1
            assert check_dominance(envelope, pmf).dominates


def test_damped_draw_pmf_validation():
    with pytest.raises(ValueError):
        damped_draw_pmf(6, 3, 2, [Fraction(1)])
    with pytest.raises(ValueError):
        damped_draw_pmf(6, 3, 2, [Fraction(1), Fraction(3, 2)])
    assert damped_draw_pmf(6, 3, 3, [Fraction(0)] * 3) == {0: Fraction(1)}


def test_first_third_pmf_uniform_closed_form():
    spec = DeckSpec(2, 3)
    pmf = first_third_pmf(spec, StrategySpec(StrategyId.PARTIAL_UNIFORM))
    assert pmf == binomial_pmf_map(2, Fraction(1, 3))
    assert pmf == brute_uniform_prefix_hits(2, 3)


def test_first_third_pmf_deterministic_delegates():
    spec = DeckSpec(2, 3)
    sspec = StrategySpec(StrategyId.PARTIAL_MLE)
    assert first_third_pmf(spec, sspec) == dict(first_third_distribution(spec, sspec))


def test_first_third_dominance_reports_small():
    reports = first_third_dominance_reports(size_limit=720)
    assert reports
    assert all(r.spec.num_types >= 3 for r in reports)
    assert all(r.result.dominates for r in reports)
    only = first_third_dominance_reports(
        size_limit=720, strategies=[StrategySpec(StrategyId.PARTIAL_LADDER)]
    )
    assert {r.strategy for r in only} == {"partial-ladder"}


def test_conditional_tail_rhs():
    assert conditional_tail_rhs(1.0) == pytest.approx(1.0)
    assert conditional_tail_rhs(math.exp(-1)) == pytest.approx(1001.0)
    assert conditional_tail_rhs(0.5) == pytest.approx(-1000 * math.log(0.5) + 1)
    with pytest.raises(ValueError):
        conditional_tail_rhs(0.0)
    with pytest.raises(ValueError):
        conditional_tail_rhs(1.5)


def test_regime_bound_report():
    sub, crit = regime_bound_report(
        DeckSpec(2, 2), StrategySpec(StrategyId.NOFB_CONSTANT), 0.125, 200, 0
    )
    for report in (sub, crit):
        assert report.rhs is None
        assert report.verdict == INCONCLUSIVE
        assert 0.0 <= report.lhs <= 1.0
        assert dict(report.params)["strategy"] == "nofb-constant"
    with pytest.raises(ValueError):
        regime_bound_report(DeckSpec(2, 2), StrategySpec(StrategyId.NOFB_CONSTANT), 0.2, 10, 0)
    with pytest.raises(ValueError):
        regime_bound_report(DeckSpec(2, 2), StrategySpec(StrategyId.NOFB_CONSTANT), 0.1, 0, 0)


def test_verdict_constants():
    assert {PASS, FAIL, INCONCLUSIVE} == {"PASS", "FAIL", "INCONCLUSIVE"}
