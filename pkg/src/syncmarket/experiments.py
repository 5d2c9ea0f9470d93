"""Monte Carlo experiment harness: sweeps, duration grids, CSV output.

Determinism contract: every emitted number is a pure function of
(config, seed).  Per-trial RNG streams are keyed on (seed, cell, trial),
trials are re-ordered by index after parallel execution, and all
reductions run serially with compensated summation, so any worker count
produces byte-identical output files.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import IoFailure, ZeroDenominator
from .generate import (GeneratorConfig, config_from_dict, config_to_dict,
                       clamped_match_mean, sample_match_quality,
                       sample_scenario)
from .mechanisms import (AlphaFactor, EfficientRule, ScoringRule,
                         SurplusAwareRule, estimate_market,
                         optimal_brand_bid, run_epvisa, run_omniscient,
                         run_pvisa, truthful_physical_bids,
                         truthful_virtual_bids)
from .welfare import score_outcome

OMNISCIENT = "omniscient"
PVISA = "pvisa"
EPVISA = "epvisa"
ALL_MECHANISMS = (OMNISCIENT, PVISA, EPVISA)

SWEEP_PARAMS = ("num_avs", "num_perf_mbps", "cache_size", "gamma",
                "dt_scale", "ar_scale")

CSV_COLUMNS = ("cell_id", "param_name", "param_value", "mechanism", "trials",
               "mean_total", "ci_total", "mean_wdt", "mean_brand",
               "mean_perf", "mean_duration_s", "mean_ratio", "ci_ratio")

_Z99 = 2.576
_PRE_TRIAL_SAMPLES = 1000


@dataclass(frozen=True)
class ExperimentConfig:
    generator: GeneratorConfig
    mechanisms: Tuple[str, ...] = ALL_MECHANISMS
    sweep_param: Optional[str] = None
    sweep_values: Tuple[float, ...] = ()
    trials: int = 10000
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.sweep_param is not None and self.sweep_param not in SWEEP_PARAMS:
            raise ValueError(f"unknown sweep parameter {self.sweep_param!r}; "
                             f"choose from {SWEEP_PARAMS}")
        for m in self.mechanisms:
            if m not in ALL_MECHANISMS:
                raise ValueError(f"unknown mechanism {m!r}")


@dataclass(frozen=True)
class ResultRow:
    cell_id: str
    param_name: str
    param_value: float
    mechanism: str
    trials: int
    mean_total: float
    ci_total: float
    mean_wdt: float
    mean_brand: float
    mean_perf: float
    mean_duration_s: float
    mean_ratio: float
    ci_ratio: float


def _apply_param(generator: GeneratorConfig, name: str, value) -> GeneratorConfig:
    if name in ("num_avs", "num_perf_mbps", "cache_size"):
        value = int(value)
    return replace(generator, **{name: value})


def _cell_seed(seed: int, cell_index: int) -> int:
    return int(np.random.SeedSequence([seed, cell_index]).generate_state(1)[0])


@dataclass(frozen=True)
class CellPolicy:
    """Per-cell auctioneer-side quantities, estimated from pre-trial draws
    of the cell's own distributions (a seed stream disjoint from trials)."""

    rule: ScoringRule
    alpha: AlphaFactor
    pvisa_brand_bid: float
    epvisa_brand_bid: float


def build_surplus_rule(generator: GeneratorConfig,
                       n_samples: int = 256) -> SurplusAwareRule:
    """Prior samples of the virtual submarket for the surplus-aware
    scoring rule: each draw records the winning provider's match count and
    slot plus the per-second ad surplus at the mean valuation."""
    rng = np.random.default_rng(
        np.random.SeedSequence([generator.rng_seed, 3 * 10 ** 9]))
    mu0 = clamped_match_mean(generator.brand_dist(), generator.cache_size)
    nu_mean = generator.valuation.mean()
    matches, slots, rates = [], [], []
    for _ in range(n_samples):
        row = np.atleast_1d(sample_match_quality(
            generator.match, generator.cache_size, rng,
            size=generator.num_perf_mbps)).astype(float)
        m0 = float(sample_match_quality(generator.brand_dist(),
                                        generator.cache_size, rng))
        top = float(row.max())
        if top > generator.gamma * mu0:
            matches.append(top)
            slots.append(int(row.argmax()))
            rates.append(nu_mean * top)
        else:
            matches.append(m0)
            slots.append(-1)
            rates.append(generator.gamma * nu_mean * mu0)
    return SurplusAwareRule(gamma=generator.gamma,
                            sample_matches=tuple(matches),
                            sample_slots=tuple(slots),
                            sample_rates=tuple(rates))


def build_cell_policy(generator: GeneratorConfig,
                      n_samples: int = _PRE_TRIAL_SAMPLES) -> CellPolicy:
    est = estimate_market(generator, n_samples)
    rng = np.random.default_rng(
        np.random.SeedSequence([generator.rng_seed, 2 * 10 ** 9]))
    nu_mean = generator.valuation.mean()
    tops = []
    for _ in range(n_samples):
        m = np.atleast_1d(sample_match_quality(
            generator.match, generator.cache_size, rng,
            size=generator.num_perf_mbps)).astype(float)
        tops.append(nu_mean * float(m.max()))
    hi = max(max(tops), est.e_q0, 1e-9)
    grid = np.linspace(0.0, hi, 101)
    b0 = optimal_brand_bid(est.e_q0, tops, grid)
    try:
        alpha = est.alpha(generator.gamma)
    except ZeroDenominator:
        # no expected second-highest ad value (single performance bidder):
        # fall back to the minimal legal factor, the one-bidder second-price
        # convention (the runner-up bid is zero anyway)
        alpha = AlphaFactor(1.0)
    return CellPolicy(
        rule=build_surplus_rule(generator),
        alpha=alpha,
        pvisa_brand_bid=float(b0),
        epvisa_brand_bid=generator.gamma * est.e_q0,
    )


def run_cell_trial(generator: GeneratorConfig, policy: CellPolicy,
                   mechanisms: Sequence[str], trial: int) -> Dict[str, tuple]:
    """One seeded scenario through every requested mechanism.  Returns
    per-mechanism tuples (total, wdt, brand, perf, duration, ratio)."""
    scenario = sample_scenario(generator, trial)
    bench = run_omniscient(scenario)
    bench_report = score_outcome(scenario, bench)
    pbids = truthful_physical_bids(scenario)
    pbids_dl = truthful_physical_bids(scenario, with_deadlines=True)

    def vbid_builder(brand_bid):
        # performance providers bid their value for whichever vehicle won
        return lambda winner: truthful_virtual_bids(scenario, winner,
                                                    brand_bid)

    out: Dict[str, tuple] = {}
    for mech in mechanisms:
        if mech == OMNISCIENT:
            report = bench_report
        elif mech == PVISA:
            o = run_pvisa(scenario, pbids,
                          vbid_builder(policy.pvisa_brand_bid),
                          scenario.rsu.threshold_deadline_s)
            report = score_outcome(scenario, o)
        else:
            o = run_epvisa(scenario, pbids_dl,
                           vbid_builder(policy.epvisa_brand_bid),
                           policy.rule, policy.alpha)
            report = score_outcome(scenario, o)
        ratio = report.total / bench_report.total \
            if bench_report.total > 0 else 1.0
        out[mech] = (report.total, report.w_dt, report.w_brand,
                     report.w_perf, report.display_s, ratio)
    return out


def _trial_batch(args) -> List[Tuple[int, Dict[str, tuple]]]:
    gen_dict, policy, mechanisms, t0, t1 = args
    generator = config_from_dict(gen_dict)
    return [(t, run_cell_trial(generator, policy, mechanisms, t))
            for t in range(t0, t1)]


def _mean_ci(values: Sequence[float]) -> Tuple[float, float]:
    n = len(values)
    mean = math.fsum(values) / n
    if n < 2:
        return mean, 0.0
    var = math.fsum((x - mean) ** 2 for x in values) / (n - 1)
    return mean, _Z99 * math.sqrt(var) / math.sqrt(n)


def _run_cell(cell_id: str, param_name: str, param_value: float,
              generator: GeneratorConfig, mechanisms: Sequence[str],
              trials: int, workers: int) -> List[ResultRow]:
    policy = build_cell_policy(generator)
    per_trial: List[Optional[Dict[str, tuple]]] = [None] * trials
    if workers <= 1:
        for t in range(trials):
            per_trial[t] = run_cell_trial(generator, policy, mechanisms, t)
    else:
        gen_dict = config_to_dict(generator)
        chunk = max(1, math.ceil(trials / (4 * workers)))
        jobs = [(gen_dict, policy, tuple(mechanisms), t0,
                 min(trials, t0 + chunk))
                for t0 in range(0, trials, chunk)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for batch in pool.map(_trial_batch, jobs):
                for t, result in batch:
                    per_trial[t] = result

    rows = []
    for mech in mechanisms:
        cols = list(zip(*(per_trial[t][mech] for t in range(trials))))
        totals, wdts, brands, perfs, durations, ratios = cols
        mean_total, ci_total = _mean_ci(totals)
        mean_ratio, ci_ratio = _mean_ci(ratios)
        rows.append(ResultRow(
            cell_id=cell_id, param_name=param_name, param_value=param_value,
            mechanism=mech, trials=trials,
            mean_total=mean_total, ci_total=ci_total,
            mean_wdt=math.fsum(wdts) / trials,
            mean_brand=math.fsum(brands) / trials,
            mean_perf=math.fsum(perfs) / trials,
            mean_duration_s=math.fsum(durations) / trials,
            mean_ratio=mean_ratio, ci_ratio=ci_ratio))
    return rows


def run_sweep(config: ExperimentConfig) -> List[ResultRow]:
    """One cell per sweep value (a single default cell when no sweep axis
    is configured), every mechanism per cell."""
    cells: List[Tuple[str, float]] = []
    if config.sweep_param is None:
        cells = [("default", float("nan"))]
    else:
        cells = [(config.sweep_param, v) for v in config.sweep_values]
        if not cells:
            raise ValueError("sweep_values is empty")
    rows: List[ResultRow] = []
    for idx, (name, value) in enumerate(cells):
        generator = config.generator
        if name != "default":
            generator = _apply_param(generator, name, value)
        generator = replace(generator,
                            rng_seed=_cell_seed(config.seed, idx))
        rows.extend(_run_cell(f"cell-{idx:03d}", name, value, generator,
                              config.mechanisms, config.trials,
                              config.workers))
    return rows


def run_duration_grid(config: ExperimentConfig,
                      dt_scale_axis: Sequence[float],
                      ar_scale_axis: Sequence[float]) -> List[ResultRow]:
    """Cross product of DT and AR requirement scales.  The row's
    param_value carries the DT scale; the AR scale is encoded in
    param_name as ``dt_scale@ar=<value>`` so the flat schema can hold the
    2-D grid."""
    if any(s <= 0 for s in list(dt_scale_axis) + list(ar_scale_axis)):
        raise ValueError("scale axes must be positive")
    rows: List[ResultRow] = []
    idx = 0
    for ar in ar_scale_axis:
        for dt in dt_scale_axis:
            generator = replace(config.generator, dt_scale=float(dt),
                                ar_scale=float(ar),
                                rng_seed=_cell_seed(config.seed, idx))
            rows.extend(_run_cell(f"cell-{idx:03d}", f"dt_scale@ar={ar:g}",
                                  float(dt), generator, config.mechanisms,
                                  config.trials, config.workers))
            idx += 1
    return rows


def emit_results(rows: Sequence[ResultRow], path: str,
                 format: str = "csv") -> None:
    """Write rows as CSV (exact documented column set) or JSON lines.
    Floats are written with repr-level precision."""
    if format not in ("csv", "jsonl"):
        raise ValueError("format must be 'csv' or 'jsonl'")
    try:
        with open(path, "w", newline="") as fh:
            if format == "csv":
                writer = csv.writer(fh)
                writer.writerow(CSV_COLUMNS)
                for row in rows:
                    writer.writerow([_fmt(getattr(row, c)) for c in CSV_COLUMNS])
            else:
                for row in rows:
                    fh.write(json.dumps(
                        {c: getattr(row, c) for c in CSV_COLUMNS},
                        sort_keys=False) + "\n")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    return value


def read_results_csv(path: str) -> List[ResultRow]:
    """Round-trip reader for the documented CSV schema."""
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
                raise ValueError(f"unexpected columns in {path}: "
                                 f"{reader.fieldnames}")
            rows = []
            for rec in reader:
                rows.append(ResultRow(
                    cell_id=rec["cell_id"], param_name=rec["param_name"],
                    param_value=float(rec["param_value"]),
                    mechanism=rec["mechanism"], trials=int(rec["trials"]),
                    **{c: float(rec[c]) for c in CSV_COLUMNS[5:]}))
            return rows
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
