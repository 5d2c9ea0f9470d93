import math

import pytest

from syncmarket.distributions import Constant
from syncmarket.errors import IoFailure
from syncmarket.experiments import (CSV_COLUMNS, ExperimentConfig,
                                    _cell_seed, build_cell_policy,
                                    emit_results, read_results_csv,
                                    run_cell_trial, run_duration_grid,
                                    run_sweep)
from syncmarket.generate import GeneratorConfig

SMALL = GeneratorConfig(num_avs=4, num_perf_mbps=4)


def small_config(**kw):
    defaults = dict(generator=SMALL, trials=20, seed=0)
    defaults.update(kw)
    return ExperimentConfig(**defaults)


def test_config_rejects_unknown_axis_and_mechanism():
    with pytest.raises(ValueError):
        small_config(sweep_param="bandwidth")
    with pytest.raises(ValueError):
        small_config(mechanisms=("vcg",))


def test_single_trial_rows_equal_a_direct_run():
    from dataclasses import replace
    cfg = small_config(trials=1)
    rows = run_sweep(cfg)
    generator = replace(SMALL, rng_seed=_cell_seed(0, 0))
    direct = run_cell_trial(generator, build_cell_policy(generator),
                            cfg.mechanisms, trial=0)
    for row in rows:
        total, wdt, brand, perf, duration, ratio = direct[row.mechanism]
        assert row.mean_total == pytest.approx(total, rel=1e-12)
        assert row.mean_duration_s == pytest.approx(duration, rel=1e-12)
        assert row.ci_total == 0.0


def test_mean_matches_independent_streaming_pass():
    from dataclasses import replace
    cfg = small_config(trials=6)
    rows = run_sweep(cfg)
    generator = replace(SMALL, rng_seed=_cell_seed(0, 0))
    policy = build_cell_policy(generator)
    for row in rows:
        totals = [run_cell_trial(generator, policy, (row.mechanism,), t)
                  [row.mechanism][0] for t in range(6)]
        assert row.mean_total == pytest.approx(math.fsum(totals) / 6,
                                               rel=1e-12)


def test_sweep_has_one_row_per_cell_and_mechanism():
    cfg = small_config(sweep_param="num_avs", sweep_values=(2.0, 4.0),
                      trials=3)
    rows = run_sweep(cfg)
    assert len(rows) == 2 * 3
    assert {(r.param_name, r.param_value, r.mechanism) for r in rows} == {
        ("num_avs", v, m) for v in (2.0, 4.0)
        for m in ("omniscient", "pvisa", "epvisa")}
    assert all(r.ci_total >= 0 and r.ci_ratio >= 0 for r in rows)


def test_worker_count_does_not_change_emitted_bytes(tmp_path):
    paths = []
    for workers in (1, 2):
        cfg = small_config(trials=16, workers=workers,
                           sweep_param="num_avs", sweep_values=(3.0, 4.0))
        path = tmp_path / f"w{workers}.csv"
        emit_results(run_sweep(cfg), str(path))
        paths.append(path.read_bytes())
    assert paths[0] == paths[1]


def test_csv_round_trip(tmp_path):
    rows = run_sweep(small_config(trials=2))
    path = tmp_path / "out.csv"
    emit_results(rows, str(path))
    back = read_results_csv(str(path))
    assert len(back) == len(rows)
    for a, b in zip(back, rows):
        for field in CSV_COLUMNS:
            x, y = getattr(a, field), getattr(b, field)
            if isinstance(x, float) and math.isnan(x):
                assert math.isnan(y)
            else:
                assert x == y
    header = path.read_text().splitlines()[0]
    assert header == ",".join(CSV_COLUMNS)


def test_empty_row_list_writes_header_only(tmp_path):
    path = tmp_path / "empty.csv"
    emit_results([], str(path))
    assert path.read_text().strip() == ",".join(CSV_COLUMNS)


def test_jsonl_format(tmp_path):
    import json
    rows = run_sweep(small_config(trials=2))
    path = tmp_path / "out.jsonl"
    emit_results(rows, str(path), format="jsonl")
    lines = path.read_text().splitlines()
    assert len(lines) == len(rows)
    assert json.loads(lines[0])["mechanism"] == rows[0].mechanism


def test_emit_to_unwritable_path_errors():
    with pytest.raises(IoFailure):
        emit_results([], "/no/such/dir/out.csv")


def test_duration_grid_identity_scale_matches_default_cell():
    base = run_sweep(small_config(trials=4))
    grid = run_duration_grid(small_config(trials=4), [1.0], [1.0])
    for b, g in zip(base, grid):
        assert g.param_name == "dt_scale@ar=1"
        assert g.mean_duration_s == pytest.approx(b.mean_duration_s,
                                                  rel=1e-12)
        assert g.mean_total == pytest.approx(b.mean_total, rel=1e-12)


def test_duration_grid_rejects_nonpositive_axes():
    with pytest.raises(ValueError):
        run_duration_grid(small_config(), [0.0], [1.0])


def test_single_provider_market_gets_the_minimal_scaling_factor():
    gen = GeneratorConfig(num_avs=2, num_perf_mbps=1)
    assert build_cell_policy(gen, n_samples=64).alpha.alpha == 1.0


def test_brand_contract_bid_is_nonnegative_and_bounded():
    policy = build_cell_policy(GeneratorConfig(num_avs=3, num_perf_mbps=3),
                               n_samples=64)
    assert policy.pvisa_brand_bid >= 0.0
    assert policy.epvisa_brand_bid >= 0.0


def test_degenerate_match_market_still_builds_a_policy():
    gen = GeneratorConfig(num_avs=2, num_perf_mbps=2,
                          match=Constant(0.0), brand_match=Constant(0.0))
    policy = build_cell_policy(gen, n_samples=16)
    assert policy.alpha.alpha >= 1.0
