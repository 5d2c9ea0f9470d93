import math

import pytest

from syncmarket.errors import EmptyGrid, EmptyMarket, ZeroDenominator
from syncmarket.mechanisms import (AlphaFactor, EfficientRule, PhysicalBid,
                                   TabulatedRule, VirtualBid, ZERO_RULE,
                                   efficient_score, estimate_market,
                                   optimal_brand_bid, optimal_deadline,
                                   run_epvisa, run_omniscient, run_pvisa,
                                   select_alpha, truthful_physical_bids,
                                   truthful_virtual_bids, TIE_NO_WINNER)
from syncmarket.generate import GeneratorConfig

from conftest import make_scenario

A2 = AlphaFactor(2.0)


def vbids(brand, *perf):
    return [VirtualBid(0, brand)] + [VirtualBid(k + 1, p)
                                     for k, p in enumerate(perf)]


def pbids(*prices, deadlines=None):
    if deadlines is None:
        return [PhysicalBid(i, p) for i, p in enumerate(prices)]
    return [PhysicalBid(i, p, d)
            for i, (p, d) in enumerate(zip(prices, deadlines))]


# -- scoring and parameter helpers ----------------------------------------

def test_efficient_score_is_price_plus_weighted_deadline():
    assert efficient_score(1.0, 0.5, 1.0, 2.0, 4.0) == pytest.approx(4.0)
    assert efficient_score(1.0, 0.0, 1.0, 2.0, 4.0) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        efficient_score(-1.0, 0.5, 1.0, 2.0, 4.0)


def test_select_alpha_formula_and_floor():
    assert select_alpha(1.0, 3.0, 2.0).alpha == pytest.approx(1.5)
    assert select_alpha(1.0, 1.0, 2.0).alpha == 1.0
    assert select_alpha(0.0, 3.0, 2.0).alpha == 1.0
    with pytest.raises(ZeroDenominator):
        select_alpha(1.0, 3.0, 0.0)


def test_alpha_factor_rejects_values_below_one():
    with pytest.raises(ValueError):
        AlphaFactor(0.5)


def test_optimal_deadline_monotone_rule_returns_cap():
    linear = EfficientRule(gamma=1.0, brand_term=1.0, perf_term=0.0)
    assert optimal_deadline(1.0, linear, 0.9, 0.1) == pytest.approx(0.9)
    assert optimal_deadline(1.0, ZERO_RULE, 0.9, 0.1) == pytest.approx(0.9)


def test_optimal_deadline_flat_region_takes_largest():
    rule = TabulatedRule(((0.0, 0.0), (0.5, 3.0), (1.0, 3.0)))
    assert optimal_deadline(1.0, rule, 1.0, 0.1) == pytest.approx(1.0)


def test_optimal_brand_bid_on_grids():
    # winning against a certain higher value is a loss: stay out
    assert optimal_brand_bid(3.0, [5.0] * 10, [0.0, 10.0]) == 0.0
    # winning against a certain lower value is a gain: bid high
    assert optimal_brand_bid(3.0, [2.0] * 10, [0.0, 10.0]) == 10.0
    # two-point market: win only the cheap half
    assert optimal_brand_bid(4.0, [1.0, 9.0], [0.0, 2.0, 10.0]) == 2.0
    with pytest.raises(EmptyGrid):
        optimal_brand_bid(4.0, [1.0], [])


# -- omniscient benchmark --------------------------------------------------

def test_omniscient_prefers_top_match_above_threshold():
    s = make_scenario([1.0], [[0.0, 3.0]], expected_brand_match=2.0)
    out = run_omniscient(s)
    assert (out.winner_av, out.winner_mbp) == (0, 1)
    assert out.payment_dt == out.payment_ar == 0.0


def test_omniscient_falls_back_to_brand_below_threshold():
    s = make_scenario([1.0], [[2.0, 1.0]], expected_brand_match=2.0)
    assert run_omniscient(s).winner_mbp == 0


def test_omniscient_drops_ad_when_pair_misses_deadline():
    s = make_scenario([1.0], [[0.0, 3.0]], deadlines=[0.4],
                      expected_brand_match=2.0)
    out = run_omniscient(s)
    assert out.winner_mbp is None
    assert out.display_duration_s == 0.0
    assert out.total_welfare == pytest.approx(1.0)


# -- plain second-price design ---------------------------------------------

def test_second_price_physical_winner_and_payment():
    s = make_scenario([5.0, 3.0, 4.0], [[1, 1]] * 3)
    out = run_pvisa(s, pbids(5, 3, 4), vbids(0.0))
    assert out.winner_av == 0
    assert out.payment_dt == 4.0


def test_second_price_virtual_winner_and_duration_scaled_payment():
    s = make_scenario([1.0], [[2.0, 3.0, 1.0]])
    out = run_pvisa(s, pbids(1), vbids(2.0, 6.0, 3.0))
    assert out.winner_mbp == 1
    assert out.payment_ar == pytest.approx(0.5 * 3.0)


def test_sole_bidder_wins_and_pays_nothing():
    s = make_scenario([5.0], [[1, 1]])
    out = run_pvisa(s, pbids(5), vbids(0.0))
    assert out.winner_av == 0 and out.payment_dt == 0.0


def test_winner_never_pays_more_than_its_bid():
    s = make_scenario([5.0, 3.0, 4.0], [[1, 1]] * 3)
    out = run_pvisa(s, pbids(5, 3, 4), vbids(0.0))
    assert out.payment_dt <= 5.0  # individual rationality under truth


def test_ad_allocation_voided_beyond_announced_threshold():
    s = make_scenario([1.0], [[2.0, 3.0]])
    out = run_pvisa(s, pbids(1), vbids(0.0, 6.0), threshold_deadline_s=0.3)
    assert out.winner_mbp is None
    assert out.payment_ar == 0.0 and out.display_duration_s == 0.0


def test_physical_tie_goes_to_lowest_id_and_is_flagged():
    s = make_scenario([5.0, 5.0, 3.0], [[1, 1]] * 3)
    out = run_pvisa(s, pbids(5, 5, 3), vbids(0.0))
    assert out.winner_av == 0 and out.tie_physical


def test_virtual_tie_with_strict_policy_has_no_ad_winner():
    s = make_scenario([1.0], [[2.0, 3.0, 1.0]])
    out = run_pvisa(s, pbids(1), vbids(0.0, 4.0, 4.0),
                    tie_policy=TIE_NO_WINNER)
    assert out.winner_mbp is None and out.tie_virtual


def test_empty_physical_market_errors():
    s = make_scenario([1.0], [[1, 1]])
    with pytest.raises(EmptyMarket):
        run_pvisa(s, [], vbids(0.0))


# -- enhanced second-score design ------------------------------------------

def test_zero_rule_collapses_to_plain_second_price_physical():
    s = make_scenario([5.0, 3.0, 4.0], [[1, 1]] * 3)
    plain = run_pvisa(s, pbids(5, 3, 4), vbids(0.0))
    scored = run_epvisa(s, pbids(5, 3, 4), vbids(0.0, 0.0), ZERO_RULE,
                        AlphaFactor(1.0))
    assert scored.winner_av == plain.winner_av
    assert scored.payment_dt == pytest.approx(plain.payment_dt)


def test_scaled_runner_up_payment(half_second_scenario):
    out = run_epvisa(half_second_scenario, pbids(1), vbids(0.0, 6.0, 2.0),
                     ZERO_RULE, A2)
    assert out.winner_mbp == 1
    assert out.payment_ar == pytest.approx(0.5 * 2.0 * 2.0)


def test_close_race_goes_to_brand_at_its_own_bid(half_second_scenario):
    out = run_epvisa(half_second_scenario, pbids(1), vbids(1.0, 3.0, 2.0),
                     ZERO_RULE, A2)
    assert out.winner_mbp == 0
    assert out.payment_ar == pytest.approx(0.5 * 1.0)


def test_exact_threshold_tie_goes_to_brand(half_second_scenario):
    out = run_epvisa(half_second_scenario, pbids(1), vbids(1.0, 4.0, 2.0),
                     ZERO_RULE, A2)
    assert out.winner_mbp == 0  # 4 > 2*2 is false


def test_alpha_one_never_picks_brand_over_positive_bid(half_second_scenario):
    out = run_epvisa(half_second_scenario, pbids(1), vbids(9.0, 0.1, 0.05),
                     ZERO_RULE, AlphaFactor(1.0))
    assert out.winner_mbp == 1


def test_infinite_alpha_always_picks_brand(half_second_scenario):
    out = run_epvisa(half_second_scenario, pbids(1), vbids(0.5, 9.0, 8.0),
                     ZERO_RULE, AlphaFactor(math.inf))
    assert out.winner_mbp == 0
    out = run_epvisa(half_second_scenario, pbids(1), vbids(0.5, 9.0),
                     ZERO_RULE, AlphaFactor(math.inf))
    assert out.winner_mbp == 0


def test_scored_allocation_and_critical_payment():
    # deadline-weighted rule flips the winner away from the top price
    s = make_scenario([0.4, 0.6], [[1, 1], [1, 1]],
                      deadlines=[1.0, 0.5])
    rule = EfficientRule(gamma=1.0, brand_term=1.0, perf_term=0.0)
    bids = pbids(0.4, 0.6, deadlines=[1.0, 0.5])
    out = run_epvisa(s, bids, vbids(0.0, 0.0), rule, AlphaFactor(1.0))
    assert out.winner_av == 0          # score 1.4 beats 1.1
    assert out.payment_dt == pytest.approx(0.1)  # 1.1 - phi(1.0)


def test_minus_sign_convention_flips_the_scores():
    s = make_scenario([0.4, 0.6], [[1, 1], [1, 1]],
                      deadlines=[1.0, 0.5])
    rule = EfficientRule(gamma=1.0, brand_term=1.0, perf_term=0.0)
    bids = pbids(0.4, 0.6, deadlines=[1.0, 0.5])
    out = run_epvisa(s, bids, vbids(0.0, 0.0), rule, AlphaFactor(1.0),
                     score_sign="minus")
    assert out.winner_av == 1          # -0.6 vs 0.1


def test_raising_a_bid_never_lowers_its_score_rank():
    s = make_scenario([0.4, 0.6, 0.2], [[1, 1]] * 3,
                      deadlines=[1.0, 0.5, 0.8])
    rule = EfficientRule(gamma=1.0, brand_term=1.0, perf_term=0.0)
    base = pbids(0.4, 0.6, 0.2, deadlines=[1.0, 0.5, 0.8])
    for raise_idx in range(3):
        for bump in (0.1, 1.0, 10.0):
            raised = list(base)
            b = raised[raise_idx]
            raised[raise_idx] = PhysicalBid(b.av_id, b.price + bump,
                                            b.deadline_s)
            lo = run_epvisa(s, base, vbids(0.0, 0.0), rule, AlphaFactor(1.0))
            hi = run_epvisa(s, raised, vbids(0.0, 0.0), rule, AlphaFactor(1.0))
            if lo.winner_av == raise_idx:
                assert hi.winner_av == raise_idx


def test_virtual_payment_is_homogeneous_in_the_bids(half_second_scenario):
    base = run_epvisa(half_second_scenario, pbids(1), vbids(1.0, 6.0, 2.0),
                      ZERO_RULE, A2)
    for c in (0.1, 10.0):
        scaled = run_epvisa(half_second_scenario, pbids(1),
                            vbids(1.0 * c, 6.0 * c, 2.0 * c), ZERO_RULE, A2)
        assert scaled.winner_mbp == base.winner_mbp
        assert scaled.payment_ar == pytest.approx(base.payment_ar * c,
                                                  rel=1e-12)


def test_infeasible_providers_are_screened_out():
    # provider 1 carries a heavy ad layer; its pair misses the deadline
    s = make_scenario([1.0], [[2.0, 3.0, 1.0]], ar_bits=0.0)
    heavy = s.mbps[1].ar_task.__class__(40e6, 0.0)
    mbps = list(s.mbps)
    mbps[1] = type(mbps[1])(id=1, kind=mbps[1].kind, ar_task=heavy)
    s = type(s)(rsu=s.rsu, avs=s.avs, mbps=tuple(mbps), match=s.match,
                gamma=s.gamma, expected_brand_match=s.expected_brand_match)
    out = run_epvisa(s, pbids(1), vbids(0.0, 9.0, 1.0), ZERO_RULE,
                     AlphaFactor(1.0))
    assert out.winner_mbp == 2  # the feasible positive bid wins


def test_outcomes_respect_the_deadline(half_second_scenario):
    for alpha in (1.0, 2.0, math.inf):
        out = run_epvisa(half_second_scenario, pbids(1),
                         vbids(1.0, 6.0, 2.0), ZERO_RULE,
                         AlphaFactor(alpha))
        cap = half_second_scenario.avs[out.winner_av].dt_task.deadline_s
        assert out.display_duration_s <= cap
        assert out.payment_dt >= 0 and out.payment_ar >= 0


# -- truthful bid builders and market estimates ----------------------------

def test_truthful_bid_builders():
    s = make_scenario([0.5, 0.7], [[1, 2, 3], [0, 1, 2]])
    pb = truthful_physical_bids(s, with_deadlines=True)
    assert [(b.av_id, b.price, b.deadline_s) for b in pb] == \
        [(0, 0.5, 1.0), (1, 0.7, 1.0)]
    vb = truthful_virtual_bids(s, winner_av=1, brand_bid=0.25)
    assert [(b.mbp_id, b.price) for b in vb] == \
        [(0, 0.25), (1, 0.7), (2, 1.4)]


def test_market_estimates_order_and_alpha():
    est = estimate_market(GeneratorConfig(rng_seed=0), n_samples=500)
    assert est.e_q1 >= est.e_q2 > 0
    assert est.e_q0 > 0
    assert est.alpha(1.0).alpha >= 1.0
