"""Random scenario generation.

Every scenario is a pure function of (rng_seed, trial_index): the RNG is
keyed on that pair, so trials can run in any order or on any number of
workers and still produce bit-identical scenarios.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .distributions import (Constant, Distribution, PowerLaw, Uniform, Zipf,
                            dist_from_dict, dist_to_dict,
                            pareto_order_stat_mean)
from .errors import InvalidEpsilon
from .market import (BRAND, PERFORMANCE, ArTask, AvProfile, DtTask,
                     MarketScenario, MatchQualityMatrix, MbpProfile,
                     RsuProfile, validate_scenario)

MB_BITS = 8e6               # 1 MB of payload in bits
GCYCLES_PER_MB = 125.0      # 1 Gcycles/MB expressed in cycles/bit


@dataclass(frozen=True)
class GeneratorConfig:
    """Distributions and scalars describing one market population.

    Defaults reproduce the reference simulation setup: 30 vehicles, 30
    performance providers plus the brand, 20 MHz up/down, 3.6 GHz CPU and
    19 GHz GPU, uniform task workloads, Zipf(2) match qualities, gamma 1.
    Transmit powers are expressed in noise-normalized units (noise power
    fixed at 1), so only the SNR they induce is meaningful.
    """

    num_avs: int = 30
    num_perf_mbps: int = 30
    cache_size: int = 30
    valuation: Distribution = Uniform(0.0, 1.0)
    channel_gain: Distribution = Uniform(0.0, 1.0)
    av_tx_power: Distribution = Uniform(0.0, 1.0)
    rsu_tx_power: Distribution = Uniform(0.0, 10.0)
    dt_size_bits: Distribution = Uniform(0.0, 1.0 * MB_BITS)
    dt_cycles_per_bit: Distribution = Uniform(0.0, 1.0 * GCYCLES_PER_MB)
    dt_deadline_s: Distribution = Uniform(0.9, 1.1)
    ar_size_bits: Distribution = Uniform(0.0, 1.0 * MB_BITS)
    ar_cycles_per_bit: Distribution = Uniform(0.0, 1.0 * GCYCLES_PER_MB)
    match: Distribution = Zipf(2.0)
    brand_match: Optional[Distribution] = None  # defaults to `match`
    gamma: float = 1.0
    noise_power_w: float = 1.0
    uplink_bw_hz: float = 20e6
    downlink_bw_hz: float = 20e6
    cpu_freq_hz: float = 3.6e9
    gpu_freq_hz: float = 19e9
    rsu_threshold_deadline_s: float = 0.9
    dt_scale: float = 1.0   # multiplies DT size and cycle density
    ar_scale: float = 1.0   # multiplies AR size and cycle density
    rng_seed: int = 0

    def __post_init__(self):
        if self.num_avs < 1 or self.num_perf_mbps < 1:
            raise ValueError("need at least one AV and one performance MBP")
        if self.cache_size < 0:
            raise ValueError("cache_size must be >= 0")

    def brand_dist(self) -> Distribution:
        return self.brand_match if self.brand_match is not None else self.match


def clamped_match_mean(dist: Distribution, cache_cap: int) -> float:
    """Analytic mean of the match distribution after clamping to the cache."""
    if isinstance(dist, Zipf):
        return dist.truncated(cache_cap).mean()
    if isinstance(dist, PowerLaw):
        return dist.clamped_mean(float(cache_cap))
    if isinstance(dist, Constant):
        return min(dist.value, float(cache_cap))
    if isinstance(dist, Uniform):
        # assume the support already respects the cap
        return min(dist.mean(), float(cache_cap))
    raise TypeError(f"unsupported match distribution: {dist!r}")


def sample_match_quality(dist: Distribution, cache_cap: int,
                         rng: np.random.Generator, size=None):
    """Draw match qualities clamped to [0, cache_cap].

    Zipf draws come from the support truncated at the cap (integer counts);
    power-law draws stay continuous so the analytic worst-case families can
    use them un-rounded.
    """
    if cache_cap == 0:
        return 0 if size is None else np.zeros(size)
    if isinstance(dist, Zipf):
        return dist.truncated(cache_cap).sample(rng, size=size)
    draw = dist.sample(rng, size=size)
    return np.minimum(draw, cache_cap) if size is not None \
        else min(draw, float(cache_cap))


def _trial_rng(seed: int, trial_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, trial_index]))


def sample_scenario(config: GeneratorConfig, trial_index: int) -> MarketScenario:
    """Deterministic function of (config.rng_seed, trial_index)."""
    rng = _trial_rng(config.rng_seed, trial_index)
    I, K = config.num_avs, config.num_perf_mbps

    rsu = RsuProfile(
        cpu_freq_hz=config.cpu_freq_hz,
        gpu_freq_hz=config.gpu_freq_hz,
        uplink_bw_hz=config.uplink_bw_hz,
        downlink_bw_hz=config.downlink_bw_hz,
        tx_power_w=float(config.rsu_tx_power.sample(rng)),
        noise_power_w=config.noise_power_w,
        threshold_deadline_s=config.rsu_threshold_deadline_s,
    )

    valuations = np.atleast_1d(config.valuation.sample(rng, size=I))
    gains = np.atleast_1d(config.channel_gain.sample(rng, size=I))
    powers = np.atleast_1d(config.av_tx_power.sample(rng, size=I))
    sizes = np.atleast_1d(config.dt_size_bits.sample(rng, size=I)) * config.dt_scale
    cycles = np.atleast_1d(config.dt_cycles_per_bit.sample(rng, size=I)) * config.dt_scale
    deadlines = np.atleast_1d(config.dt_deadline_s.sample(rng, size=I))

    avs = tuple(
        AvProfile(
            id=i,
            valuation=float(valuations[i]),
            dt_task=DtTask(float(sizes[i]), float(cycles[i]), float(deadlines[i])),
            tx_power_w=float(powers[i]),
            channel_gain=float(gains[i]),
            noise_power_w=config.noise_power_w,
            cache_size=config.cache_size,
        )
        for i in range(I)
    )

    ar_sizes = np.atleast_1d(config.ar_size_bits.sample(rng, size=K + 1)) * config.ar_scale
    ar_cycles = np.atleast_1d(config.ar_cycles_per_bit.sample(rng, size=K + 1)) * config.ar_scale
    mbps = tuple(
        MbpProfile(id=k, kind=BRAND if k == 0 else PERFORMANCE,
                   ar_task=ArTask(float(ar_sizes[k]), float(ar_cycles[k])))
        for k in range(K + 1)
    )

    h = np.empty((I, K + 1), dtype=float)
    h[:, 0] = np.atleast_1d(
        sample_match_quality(config.brand_dist(), config.cache_size, rng, size=I))
    h[:, 1:] = np.atleast_2d(
        sample_match_quality(config.match, config.cache_size, rng, size=(I, K)))

    scenario = MarketScenario(
        rsu=rsu, avs=avs, mbps=mbps,
        match=MatchQualityMatrix(h),
        gamma=config.gamma,
        expected_brand_match=clamped_match_mean(config.brand_dist(),
                                                config.cache_size),
    )
    return validate_scenario(scenario)


def worst_case_config_prop1(epsilon: float, a: float, gamma: float,
                            num_avs: int = 2, num_perf_mbps: int = 2,
                            rng_seed: int = 0) -> GeneratorConfig:
    """Adversarial family on which a plain second-price design stays near
    half of the omniscient welfare.

    Performance match qualities are continuous Pareto(a) draws; the brand
    quality is deterministic at (1 + epsilon) * E[top match] / gamma, so the
    construction identity gamma * E[m_brand] = (1 + epsilon) * E[m_(1)]
    holds exactly.  Durations are held constant so the comparison isolates
    the virtual allocation.
    """
    if epsilon <= 0:
        raise InvalidEpsilon(f"epsilon must be > 0, got {epsilon}")
    if a <= 1:
        raise ValueError("tail exponent must be > 1")
    if num_avs < 2 or num_perf_mbps < 2:
        raise ValueError("need at least 2 AVs and 2 performance MBPs")
    if gamma <= 0:
        raise ValueError("gamma must be > 0")
    top_mean = pareto_order_stat_mean(num_perf_mbps, a, 1)
    mu_brand = (1.0 + epsilon) * top_mean / gamma
    return _fixed_duration_config(
        num_avs=num_avs, num_perf_mbps=num_perf_mbps,
        match=PowerLaw(a), brand_match=Constant(mu_brand),
        gamma=gamma, rng_seed=rng_seed)


def power_law_bound_config(a: float = 2.0, num_perf_mbps: int = 30,
                           gamma: float = 1.0, brand_quality: float = 8.0,
                           num_avs: int = 1, rng_seed: int = 0) -> GeneratorConfig:
    """Benchmark family for the power-law welfare-bound checks: a single
    vehicle with valuation 1 and constant display duration, continuous
    Pareto(a) matches, deterministic brand quality.  One vehicle keeps the
    physical allocation identical across mechanisms, isolating the virtual
    submarket the bounds speak about."""
    return _fixed_duration_config(
        num_avs=num_avs, num_perf_mbps=num_perf_mbps,
        match=PowerLaw(a), brand_match=Constant(brand_quality),
        gamma=gamma, rng_seed=rng_seed)


def _fixed_duration_config(num_avs, num_perf_mbps, match, brand_match,
                           gamma, rng_seed) -> GeneratorConfig:
    # SNR pinned at 1 gives rate == bandwidth; a 10 Mbit task then takes
    # exactly 0.5 s, well inside the unit deadline, for every vehicle.
    return GeneratorConfig(
        num_avs=num_avs,
        num_perf_mbps=num_perf_mbps,
        cache_size=10 ** 9,
        valuation=Constant(1.0),
        channel_gain=Constant(1.0),
        av_tx_power=Constant(1.0),
        rsu_tx_power=Constant(1.0),
        dt_size_bits=Constant(10e6),
        dt_cycles_per_bit=Constant(0.0),
        dt_deadline_s=Constant(1.0),
        ar_size_bits=Constant(0.0),
        ar_cycles_per_bit=Constant(0.0),
        match=match,
        brand_match=brand_match,
        gamma=gamma,
        rsu_threshold_deadline_s=1.0,
        rng_seed=rng_seed,
    )


# -- config (de)serialization ---------------------------------------------

_DIST_FIELDS = ("valuation", "channel_gain", "av_tx_power", "rsu_tx_power",
                "dt_size_bits", "dt_cycles_per_bit", "dt_deadline_s",
                "ar_size_bits", "ar_cycles_per_bit", "match", "brand_match")


def config_to_dict(config: GeneratorConfig) -> dict:
    out = {}
    for name, value in vars(config).items():
        if name in _DIST_FIELDS:
            out[name] = None if value is None else dist_to_dict(value)
        else:
            out[name] = value
    return out


def config_from_dict(data: dict) -> GeneratorConfig:
    kwargs = {}
    for name, value in data.items():
        if name in _DIST_FIELDS:
            kwargs[name] = None if value is None else dist_from_dict(value)
        else:
            kwargs[name] = value
    return GeneratorConfig(**kwargs)
