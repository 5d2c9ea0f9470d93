import numpy as np
import pytest

from syncmarket.errors import (InfeasibleOutcome, InstanceTooLarge,
                               ZeroBenchmark)
from syncmarket.generate import GeneratorConfig, sample_scenario
from syncmarket.market import MechanismOutcome
from syncmarket.mechanisms import run_omniscient
from syncmarket.welfare import (brute_force_benchmark,
                                summed_value_upper_bound, score_outcome,
                                welfare_ratio)

from conftest import make_scenario


def outcome(av, mbp, duration):
    return MechanismOutcome(winner_av=av, winner_mbp=mbp, payment_dt=0.0,
                            payment_ar=0.0, display_duration_s=duration,
                            surplus_dt=0.0, surplus_brand=0.0,
                            surplus_perf=0.0, total_welfare=0.0)


def test_empty_outcome_scores_zero():
    s = make_scenario([0.5], [[1, 1]])
    r = score_outcome(s, outcome(None, None, 0.0))
    assert (r.w_dt, r.w_brand, r.w_perf, r.display_s, r.total) == \
        (0.0, 0.0, 0.0, 0.0, 0.0)


def test_brand_win_composition():
    # 16 Mbit task on a 20 MHz link: display duration 0.8 s
    s = make_scenario([0.5], [[4.0, 1.0]], dt_bits=[16e6])
    r = score_outcome(s, outcome(0, 0, 0.8))
    assert r.w_dt == 0.5 and r.w_brand == 2.0 and r.w_perf == 0.0
    assert r.display_s == pytest.approx(0.8)
    assert r.total == pytest.approx(0.5 + 0.8 * 2.0)  # 2.1


def test_composition_identity_holds_exactly():
    s = sample_scenario(GeneratorConfig(rng_seed=5), 0)
    r = score_outcome(s, run_omniscient(s))
    recomposed = r.w_dt + r.display_s * (s.gamma * r.w_brand + r.w_perf)
    assert r.total == pytest.approx(recomposed, rel=1e-12)
    assert min(r.w_dt, r.w_brand, r.w_perf, r.display_s) >= 0


def test_ad_winner_without_vehicle_is_rejected():
    s = make_scenario([0.5], [[1, 1]])
    with pytest.raises(InfeasibleOutcome):
        score_outcome(s, outcome(None, 1, 0.5))


def test_over_deadline_outcome_is_rejected():
    s = make_scenario([0.5], [[1, 1]], deadlines=[0.4])
    with pytest.raises(InfeasibleOutcome):
        score_outcome(s, outcome(0, 1, 0.5))


def test_linear_in_the_common_valuation():
    s = make_scenario([0.5], [[4.0, 1.0]])
    from syncmarket.market import scale_common_valuation
    r1 = score_outcome(s, outcome(0, 0, 0.5))
    r2 = score_outcome(scale_common_valuation(s, 0, 3.0), outcome(0, 0, 0.5))
    assert r2.total == pytest.approx(3.0 * r1.total, rel=1e-12)


def test_brute_force_forced_dt_only():
    s = make_scenario([0.7], [[1, 1]], deadlines=[0.4])  # pairs take 0.5 s
    report, alloc = brute_force_benchmark(s)
    assert alloc == (0, None)
    assert report.total == pytest.approx(0.7)


def test_brute_force_matches_hand_enumeration():
    # two vehicles (0.5 s and 0.8 s tasks), brand + two providers
    s = make_scenario([0.6, 0.9], [[2, 3, 1], [1, 0.5, 4]],
                      dt_bits=[10e6, 16e6])
    report, alloc = brute_force_benchmark(s)
    candidates = {}
    for i, (nu, dur) in enumerate(((0.6, 0.5), (0.9, 0.8))):
        candidates[(i, None)] = nu
        for k in range(3):
            candidates[(i, k)] = nu + dur * nu * s.match.h[i, k]
    best = max(candidates, key=candidates.get)
    assert alloc == best == (1, 2)
    assert report.total == pytest.approx(candidates[best])  # 0.9 + .8*.9*4


def test_brute_force_guard():
    s = sample_scenario(GeneratorConfig(num_avs=2, num_perf_mbps=2), 0)
    huge = type(s.match)(np.zeros((2000, 600)))
    bad = type(s)(rsu=s.rsu, avs=s.avs * 1000, mbps=s.mbps * 200,
                  match=huge, gamma=1.0, expected_brand_match=1.0)
    with pytest.raises(InstanceTooLarge):
        brute_force_benchmark(bad)


def test_welfare_ratio():
    s = make_scenario([0.5], [[4.0, 1.0]])
    r = score_outcome(s, outcome(0, 0, 0.5))
    assert welfare_ratio(r, r) == 1.0
    half = score_outcome(s, outcome(0, None, 0.0))
    assert welfare_ratio(half, r) < 1.0
    zero = score_outcome(s, outcome(None, None, 0.0))
    with pytest.raises(ZeroBenchmark):
        welfare_ratio(r, zero)


def test_benchmark_ordering_chain_on_random_small_instances():
    cfg = GeneratorConfig(num_avs=3, num_perf_mbps=3, rng_seed=11)
    for t in range(25):
        s = sample_scenario(cfg, t)
        brute, _ = brute_force_benchmark(s)
        omni = score_outcome(s, run_omniscient(s))
        assert brute.total + 1e-9 >= omni.total


def test_summed_value_upper_bounds_the_threshold_value():
    s = make_scenario([0.5], [[4.0, 3.0]], expected_brand_match=4.0)
    omni = score_outcome(s, run_omniscient(s))
    assert summed_value_upper_bound(s, 0) >= omni.total
