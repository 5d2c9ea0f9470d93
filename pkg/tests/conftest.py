"""Hand-built scenarios shared across the test modules.

All builders pin SNR = 1 on both links (rate == bandwidth), so delays are
exact decimal fractions: a 10 Mbit task on a 20 MHz link takes 0.5 s.
"""

import numpy as np
import pytest

from syncmarket.market import (ArTask, AvProfile, BRAND, DtTask,
                               MarketScenario, MatchQualityMatrix,
                               MbpProfile, PERFORMANCE, RsuProfile)

BW = 20e6


def make_rsu(threshold_deadline_s=1.0):
    return RsuProfile(cpu_freq_hz=3.6e9, gpu_freq_hz=19e9,
                      uplink_bw_hz=BW, downlink_bw_hz=BW,
                      tx_power_w=1.0, noise_power_w=1.0,
                      threshold_deadline_s=threshold_deadline_s)


def make_scenario(valuations, match, *, dt_bits=None, deadlines=None,
                  ar_bits=0.0, gamma=1.0, expected_brand_match=1.0,
                  cache_size=10 ** 6, threshold_deadline_s=1.0):
    """I vehicles x (1 + K) providers with unit-SNR links.

    ``match`` is the realized match matrix (column 0 = brand); provider
    ad layers default to empty so every pair's delay equals the vehicle's
    twin-update delay: dt_bits / 20e6 seconds.
    """
    match = np.asarray(match, dtype=float)
    n_av, n_mbp = match.shape
    dt_bits = dt_bits if dt_bits is not None else [10e6] * n_av
    deadlines = deadlines if deadlines is not None else [1.0] * n_av
    avs = tuple(
        AvProfile(id=i, valuation=float(valuations[i]),
                  dt_task=DtTask(float(dt_bits[i]), 0.0, float(deadlines[i])),
                  tx_power_w=1.0, channel_gain=1.0, noise_power_w=1.0,
                  cache_size=cache_size)
        for i in range(n_av))
    mbps = tuple(
        MbpProfile(id=k, kind=BRAND if k == 0 else PERFORMANCE,
                   ar_task=ArTask(float(ar_bits), 0.0))
        for k in range(n_mbp))
    return MarketScenario(rsu=make_rsu(threshold_deadline_s), avs=avs,
                          mbps=mbps, match=MatchQualityMatrix(match),
                          gamma=gamma,
                          expected_brand_match=float(expected_brand_match))


@pytest.fixture
def half_second_scenario():
    """One vehicle, two performance providers, display duration 0.5 s."""
    return make_scenario([1.0], [[2.0, 3.0, 1.0]])
