"""Wireless rate and delay formulas.

All rates use the Shannon form B*log2(1 + g*P/sigma^2) so they come out
in bit/s.  Transmit powers and noise powers only enter through their
ratio, so any consistent unit works.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import NonPositiveNoise, ZeroRate
from .market import ArTask, DtTask, MarketScenario


@dataclass(frozen=True)
class DelayBreakdown:
    transmit_s: float
    compute_s: float

    @property
    def total(self) -> float:
        return self.transmit_s + self.compute_s


def link_rate(bandwidth_hz: float, gain: float, tx_power_w: float,
              noise_power_w: float) -> float:
    """Achievable rate in bit/s; serves uplink and downlink by argument
    choice."""
    if noise_power_w <= 0:
        raise NonPositiveNoise(f"noise power {noise_power_w} must be > 0")
    if bandwidth_hz <= 0:
        raise ValueError("bandwidth must be > 0")
    if gain < 0 or tx_power_w < 0:
        raise ValueError("gain and power must be >= 0")
    return bandwidth_hz * math.log2(1.0 + gain * tx_power_w / noise_power_w)


def dt_delays(task: DtTask, uplink_rate: float, cpu_freq_hz: float) -> DelayBreakdown:
    """Upload + CPU execution delay of a digital-twin task."""
    if cpu_freq_hz <= 0:
        raise ValueError("cpu frequency must be > 0")
    if task.size_bits == 0:
        return DelayBreakdown(0.0, 0.0)
    if uplink_rate <= 0:
        raise ZeroRate("cannot deliver a nonempty DT task at zero rate")
    transmit = task.size_bits / uplink_rate
    compute = task.size_bits * task.cycles_per_bit / cpu_freq_hz
    return DelayBreakdown(transmit, compute)


def ar_delays(task: ArTask, matched_caches: float, downlink_rate: float,
              cpu_freq_hz: float, gpu_freq_hz: float) -> DelayBreakdown:
    """Downlink + render delay of an ad with one basic layer plus
    ``matched_caches`` enhancement layers.

    The CPU input term is bits/cpu_freq as printed in the source model;
    it carries no cycles-per-bit factor.
    """
    if matched_caches < 0:
        raise ValueError("matched_caches must be >= 0")
    if cpu_freq_hz <= 0 or gpu_freq_hz <= 0:
        raise ValueError("processor frequencies must be > 0")
    layers = matched_caches + 1.0
    bits = layers * task.layer_size_bits
    if bits == 0:
        return DelayBreakdown(0.0, 0.0)
    if downlink_rate <= 0:
        raise ZeroRate("cannot deliver a nonempty AR layer at zero rate")
    transmit = bits / downlink_rate
    compute = bits / cpu_freq_hz + bits * task.cycles_per_bit / gpu_freq_hz
    return DelayBreakdown(transmit, compute)


def total_sync_delay(z_dt: int, dt: DelayBreakdown,
                     z_ar: int, ar: DelayBreakdown) -> float:
    """Indicator-weighted total synchronization delay."""
    if z_dt not in (0, 1) or z_ar not in (0, 1):
        raise ValueError("allocation indicators must be 0 or 1")
    return z_dt * dt.total + z_ar * ar.total


def is_feasible(total_delay_s: float, deadline_s: float) -> bool:
    """Closed inequality: the boundary total == deadline is feasible."""
    if deadline_s <= 0:
        raise ValueError("deadline must be > 0")
    return total_delay_s <= deadline_s


# -- scenario-level helpers used by the mechanisms ------------------------

def av_uplink_rate(scenario: MarketScenario, av_id: int) -> float:
    av = scenario.avs[av_id]
    return link_rate(scenario.rsu.uplink_bw_hz, av.channel_gain,
                     av.tx_power_w, scenario.rsu.noise_power_w)


def av_downlink_rate(scenario: MarketScenario, av_id: int) -> float:
    av = scenario.avs[av_id]
    return link_rate(scenario.rsu.downlink_bw_hz, av.channel_gain,
                     scenario.rsu.tx_power_w, av.noise_power_w)


def av_dt_breakdown(scenario: MarketScenario, av_id: int) -> DelayBreakdown:
    av = scenario.avs[av_id]
    return dt_delays(av.dt_task, av_uplink_rate(scenario, av_id),
                     scenario.rsu.cpu_freq_hz)


def pair_duration(scenario: MarketScenario, av_id: int, mbp_id: int) -> float:
    """Total delay of the (vehicle, provider) pair with both allocations
    active; this is also the ad's displaying duration."""
    dt = av_dt_breakdown(scenario, av_id)
    mbp = scenario.mbps[mbp_id]
    ar = ar_delays(mbp.ar_task, scenario.match.h[av_id, mbp_id],
                   av_downlink_rate(scenario, av_id),
                   scenario.rsu.cpu_freq_hz, scenario.rsu.gpu_freq_hz)
    return total_sync_delay(1, dt, 1, ar)
