"""Domain types for the physical-virtual synchronization market.

One auction instance couples a physical submarket (vehicles bidding to
have their digital-twin update executed by the roadside unit) with a
virtual submarket (billboard providers bidding for the ad position shown
while that update runs).  Types here only hold data and enforce
structural invariants; all behavior lives in the sibling modules.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .errors import ScenarioError

BRAND = "brand"
PERFORMANCE = "performance"


@dataclass(frozen=True)
class RsuProfile:
    """Compute and radio resources of the roadside unit (the seller)."""

    cpu_freq_hz: float
    gpu_freq_hz: float
    uplink_bw_hz: float
    downlink_bw_hz: float
    tx_power_w: float
    noise_power_w: float
    threshold_deadline_s: float = 0.0
    total_bw_hz: Optional[float] = None


@dataclass(frozen=True)
class DtTask:
    """Digital-twin update workload: bits to upload, cycles to run, deadline."""

    size_bits: float
    cycles_per_bit: float
    deadline_s: float


@dataclass(frozen=True)
class ArTask:
    """One ad layer: bits to push downlink and GPU cycles per bit to render."""

    layer_size_bits: float
    cycles_per_bit: float


@dataclass(frozen=True)
class AvProfile:
    """A vehicle: private valuation for its twin update plus channel state."""

    id: int
    valuation: float
    dt_task: DtTask
    tx_power_w: float
    channel_gain: float
    noise_power_w: float
    cache_size: int


@dataclass(frozen=True)
class MbpProfile:
    """A billboard provider. kind is BRAND (id 0, blind to its realized
    match quality) or PERFORMANCE."""

    id: int
    kind: str
    ar_task: ArTask


@dataclass(frozen=True)
class MatchQualityMatrix:
    """Matched-preference-cache counts, one row per vehicle, column 0 = brand.

    Entries are integer counts for discrete match distributions but are
    stored as floats so continuous power-law draws (used by the analytic
    worst-case constructions) fit the same container.
    """

    h: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "h", np.asarray(self.h, dtype=float))

    @property
    def num_avs(self) -> int:
        return self.h.shape[0]

    @property
    def num_mbps(self) -> int:
        return self.h.shape[1]


@dataclass(frozen=True)
class MarketScenario:
    """One auction instance: one RSU, I vehicles, K performance providers
    plus one brand provider, and the realized match-quality matrix.

    ``expected_brand_match`` is the auctioneer's knowledge of the brand
    provider's mean match quality; the realized column 0 of ``match`` is
    never revealed to the brand provider itself.
    """

    rsu: RsuProfile
    avs: Sequence[AvProfile]
    mbps: Sequence[MbpProfile]
    match: MatchQualityMatrix
    gamma: float
    expected_brand_match: float

    @property
    def num_avs(self) -> int:
        return len(self.avs)

    @property
    def num_perf_mbps(self) -> int:
        return len(self.mbps) - 1


@dataclass(frozen=True)
class MechanismOutcome:
    """Winners, payments, display duration and surplus decomposition of one
    mechanism run.  ``winner_mbp`` is None when the ad allocation was voided
    (infeasible pair) or the market had no virtual winner."""

    winner_av: Optional[int]
    winner_mbp: Optional[int]
    payment_dt: float
    payment_ar: float
    display_duration_s: float
    surplus_dt: float
    surplus_brand: float
    surplus_perf: float
    total_welfare: float
    tie_physical: bool = False
    tie_virtual: bool = False


def ad_value(valuation: float, match_quality: float) -> float:
    """Value of the ad position: common valuation times match quality."""
    if valuation < 0 or match_quality < 0:
        raise ValueError("ad_value requires nonnegative inputs")
    return valuation * match_quality


@dataclass(frozen=True)
class Violation:
    kind: str
    detail: str

    def __str__(self):
        return f"{self.kind}: {self.detail}"


def _positive_fields(rsu: RsuProfile):
    for name in ("cpu_freq_hz", "gpu_freq_hz", "uplink_bw_hz",
                 "downlink_bw_hz", "tx_power_w", "noise_power_w"):
        yield name, getattr(rsu, name)


def validate_scenario(scenario: MarketScenario) -> MarketScenario:
    """Check every structural invariant; return the scenario unchanged if
    all hold, otherwise raise ScenarioError listing each violation."""
    v = []
    rsu = scenario.rsu
    for name, value in _positive_fields(rsu):
        if value <= 0:
            v.append(Violation("NonPositiveResource", f"rsu.{name}={value}"))
    if rsu.threshold_deadline_s < 0:
        v.append(Violation("NonPositiveResource",
                           f"rsu.threshold_deadline_s={rsu.threshold_deadline_s}"))
    if rsu.total_bw_hz is not None:
        if not np.isclose(rsu.uplink_bw_hz + rsu.downlink_bw_hz, rsu.total_bw_hz):
            v.append(Violation("DimensionMismatch",
                               "uplink + downlink bandwidth != declared total"))

    if len(scenario.avs) == 0:
        v.append(Violation("DimensionMismatch", "empty physical submarket (0 AVs)"))
    if len(scenario.mbps) < 2:
        v.append(Violation("DimensionMismatch",
                           "need the brand MBP plus at least one performance MBP"))

    brands = [m for m in scenario.mbps if m.kind == BRAND]
    if len(brands) != 1 or (brands and brands[0].id != 0):
        v.append(Violation("DimensionMismatch",
                           "exactly one brand MBP with id 0 required"))
    if scenario.mbps and scenario.mbps[0].kind != BRAND:
        v.append(Violation("DimensionMismatch", "brand MBP must be listed first"))

    for i, av in enumerate(scenario.avs):
        if av.valuation < 0:
            v.append(Violation("NonPositiveResource", f"avs[{i}].valuation<0"))
        if av.channel_gain < 0:
            v.append(Violation("NonPositiveResource", f"avs[{i}].channel_gain<0"))
        if av.cache_size < 0:
            v.append(Violation("NonPositiveResource", f"avs[{i}].cache_size<0"))
        if av.dt_task.deadline_s <= 0:
            v.append(Violation("NonPositiveResource", f"avs[{i}].deadline<=0"))
        if av.dt_task.size_bits < 0 or av.dt_task.cycles_per_bit < 0:
            v.append(Violation("NonPositiveResource", f"avs[{i}].dt_task negative"))

    h = scenario.match.h
    if h.shape != (len(scenario.avs), len(scenario.mbps)):
        v.append(Violation("DimensionMismatch",
                           f"match matrix {h.shape} vs "
                           f"({len(scenario.avs)}, {len(scenario.mbps)})"))
    else:
        for i, av in enumerate(scenario.avs):
            for k in range(h.shape[1]):
                if h[i, k] < 0:
                    v.append(Violation("CacheOverflow", f"h[{i},{k}]<0"))
                elif h[i, k] > av.cache_size:
                    v.append(Violation(
                        "CacheOverflow",
                        f"h[{i},{k}]={h[i, k]} exceeds cache C_{i}={av.cache_size}"))

    if scenario.gamma < 0:
        v.append(Violation("NonPositiveResource", f"gamma={scenario.gamma}"))
    if scenario.expected_brand_match < 0:
        v.append(Violation("NonPositiveResource", "expected_brand_match<0"))

    if v:
        raise ScenarioError(v)
    return scenario


def scale_common_valuation(scenario: MarketScenario, av_id: int,
                           factor: float) -> MarketScenario:
    """Return a copy with one vehicle's valuation scaled; used by the
    adverse-selection checks (all ad values scale with it implicitly)."""
    avs = list(scenario.avs)
    av = avs[av_id]
    avs[av_id] = replace(av, valuation=av.valuation * factor)
    return replace(scenario, avs=tuple(avs))
