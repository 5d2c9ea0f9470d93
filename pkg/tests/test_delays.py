import pytest

from syncmarket.delays import (DelayBreakdown, ar_delays, dt_delays,
                               is_feasible, link_rate, pair_duration,
                               total_sync_delay)
from syncmarket.errors import NonPositiveNoise, ZeroRate
from syncmarket.market import ArTask, DtTask

from conftest import make_scenario


def test_link_rate_unit_snr_gives_bandwidth():
    assert link_rate(20e6, 1.0, 1.0, 1.0) == pytest.approx(20e6)


def test_link_rate_snr_three_doubles_bandwidth():
    assert link_rate(10e6, 1.0, 3.0, 1.0) == pytest.approx(20e6)


def test_link_rate_zero_gain_is_zero():
    assert link_rate(20e6, 0.0, 5.0, 1.0) == 0.0


def test_link_rate_rejects_nonpositive_noise():
    with pytest.raises(NonPositiveNoise):
        link_rate(20e6, 1.0, 1.0, 0.0)


def test_dt_delays_transmit_and_compute():
    d = dt_delays(DtTask(8e6, 125.0, 1.0), uplink_rate=20e6,
                  cpu_freq_hz=3.6e9)
    assert d.transmit_s == pytest.approx(0.4)
    assert d.compute_s == pytest.approx(8e6 * 125.0 / 3.6e9)  # ~0.2778 s


def test_dt_delays_empty_task_is_free():
    d = dt_delays(DtTask(0.0, 125.0, 1.0), uplink_rate=20e6,
                  cpu_freq_hz=3.6e9)
    assert (d.transmit_s, d.compute_s) == (0.0, 0.0)


def test_dt_delays_zero_rate_with_payload_errors():
    with pytest.raises(ZeroRate):
        dt_delays(DtTask(8e6, 125.0, 1.0), uplink_rate=0.0,
                  cpu_freq_hz=3.6e9)


def test_ar_delays_layer_count_multiplies_payload():
    d = ar_delays(ArTask(8e6, 125.0), matched_caches=1, downlink_rate=20e6,
                  cpu_freq_hz=3.6e9, gpu_freq_hz=19e9)
    assert d.transmit_s == pytest.approx(0.8)  # (1+1) layers * 8e6 / 20e6
    assert d.compute_s == pytest.approx(16e6 / 3.6e9 + 16e6 * 125.0 / 19e9)


def test_ar_delays_empty_layer_is_free():
    d = ar_delays(ArTask(0.0, 0.0), matched_caches=0, downlink_rate=20e6,
                  cpu_freq_hz=3.6e9, gpu_freq_hz=19e9)
    assert (d.transmit_s, d.compute_s) == (0.0, 0.0)


def test_total_sync_delay_sums_active_sides():
    dt = DelayBreakdown(0.4, 0.2778)
    ar = DelayBreakdown(0.8, 0.1097)
    assert total_sync_delay(1, dt, 1, ar) == pytest.approx(1.5875)
    assert total_sync_delay(1, dt, 0, ar) == pytest.approx(0.6778)
    assert total_sync_delay(0, dt, 0, ar) == 0.0


def test_total_sync_delay_rejects_non_binary_indicators():
    with pytest.raises(ValueError):
        total_sync_delay(2, DelayBreakdown(0, 0), 0, DelayBreakdown(0, 0))


def test_feasibility_boundary_is_inclusive():
    assert not is_feasible(1.5875, 1.1)
    assert is_feasible(0.6778, 0.9)
    assert is_feasible(0.9, 0.9)


def test_pair_duration_matches_hand_computation():
    # 10 Mbit twin update on a 20 MHz unit-SNR link, empty ad layers
    s = make_scenario([1.0], [[2.0, 3.0]])
    assert pair_duration(s, 0, 0) == pytest.approx(0.5)
    assert pair_duration(s, 0, 1) == pytest.approx(0.5)
