"""Surplus accounting and welfare benchmarks.

Welfare of an outcome is the digital-twin surplus plus the display
duration times the weighted virtual surplus:

    total = w_dt + display_s * (gamma * w_brand + w_perf)

``brute_force_benchmark`` enumerates every feasible allocation exactly
and is the ground-truth optimum for small instances; the omniscient
mechanism is constrained to its threshold rule and can fall short of it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

from .delays import pair_duration
from .errors import InfeasibleOutcome, InstanceTooLarge, ZeroBenchmark
from .market import MarketScenario, MechanismOutcome, ad_value

_MAX_BRUTE_CELLS = 10 ** 6
_FEAS_TOL = 1e-12


@dataclass(frozen=True)
class WelfareReport:
    w_dt: float
    w_brand: float
    w_perf: float
    display_s: float
    total: float
    ratio_vs_benchmark: Optional[float] = None


def _compose(gamma: float, w_dt: float, w_brand: float, w_perf: float,
             display_s: float, ratio=None) -> WelfareReport:
    total = w_dt + display_s * (gamma * w_brand + w_perf)
    return WelfareReport(w_dt=w_dt, w_brand=w_brand, w_perf=w_perf,
                         display_s=display_s, total=total,
                         ratio_vs_benchmark=ratio)


def score_outcome(scenario: MarketScenario,
                  outcome: MechanismOutcome) -> WelfareReport:
    """Recompute the welfare decomposition of an outcome from raw scenario
    fields (realized valuations and match qualities)."""
    if outcome.winner_av is None:
        if outcome.winner_mbp is not None:
            raise InfeasibleOutcome("ad winner without a physical winner")
        return _compose(scenario.gamma, 0.0, 0.0, 0.0, 0.0)
    av = scenario.avs[outcome.winner_av]
    w_dt, w_brand, w_perf, display = av.valuation, 0.0, 0.0, 0.0
    if outcome.winner_mbp is not None:
        display = pair_duration(scenario, outcome.winner_av, outcome.winner_mbp)
        if display > av.dt_task.deadline_s + _FEAS_TOL:
            raise InfeasibleOutcome(
                f"pair delay {display} exceeds deadline {av.dt_task.deadline_s}")
        q = ad_value(av.valuation,
                     scenario.match.h[outcome.winner_av, outcome.winner_mbp])
        if outcome.winner_mbp == 0:
            w_brand = q
        else:
            w_perf = q
    return _compose(scenario.gamma, w_dt, w_brand, w_perf, display)


def brute_force_benchmark(
        scenario: MarketScenario) -> Tuple[WelfareReport,
                                           Tuple[Optional[int], Optional[int]]]:
    """Exact optimum by enumerating every (vehicle, provider) pair, each
    DT-only allocation, and the empty allocation, subject to the winning
    pair's delay fitting the vehicle's deadline."""
    n_cells = scenario.num_avs * len(scenario.mbps)
    if n_cells > _MAX_BRUTE_CELLS:
        raise InstanceTooLarge(f"{n_cells} candidate pairs exceed the "
                               f"{_MAX_BRUTE_CELLS} enumeration guard")
    best_total = 0.0
    best_alloc: Tuple[Optional[int], Optional[int]] = (None, None)
    best_report = _compose(scenario.gamma, 0.0, 0.0, 0.0, 0.0)
    for i, av in enumerate(scenario.avs):
        candidates = [(av.valuation, 0.0, 0.0, 0.0, (i, None))]
        for k in range(len(scenario.mbps)):
            duration = pair_duration(scenario, i, k)
            if duration > av.dt_task.deadline_s:
                continue
            q = ad_value(av.valuation, scenario.match.h[i, k])
            w_brand = q if k == 0 else 0.0
            w_perf = q if k != 0 else 0.0
            candidates.append((av.valuation, w_brand, w_perf, duration, (i, k)))
        for w_dt, w_brand, w_perf, duration, alloc in candidates:
            total = w_dt + duration * (scenario.gamma * w_brand + w_perf)
            if total > best_total:
                best_total = total
                best_alloc = alloc
                best_report = _compose(scenario.gamma, w_dt, w_brand, w_perf,
                                       duration)
    return best_report, best_alloc


def welfare_ratio(mech_report: WelfareReport,
                  benchmark_report: WelfareReport) -> float:
    if benchmark_report.total <= 0:
        raise ZeroBenchmark("benchmark welfare must be > 0")
    return mech_report.total / benchmark_report.total


def summed_value_upper_bound(scenario: MarketScenario, av_id: int) -> float:
    """Diagnostic upper envelope for one vehicle: valuation plus the full
    deadline times (gamma * expected brand value + realized top performance
    value).  Sums both virtual terms instead of taking their max, so it
    upper-bounds the threshold-rule benchmark for that vehicle."""
    av = scenario.avs[av_id]
    top = float(scenario.match.h[av_id, 1:].max())
    rate = (scenario.gamma * av.valuation * scenario.expected_brand_match
            + av.valuation * top)
    return av.valuation + av.dt_task.deadline_s * rate
