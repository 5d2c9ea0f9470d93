"""Two-sided synchronization-market auction simulator.

A physical submarket (vehicles bidding for digital-twin task execution on
a roadside unit) coupled with a virtual submarket (billboard providers
bidding for the AR ad position displayed while the task runs).  Provides
three mechanisms (omniscient benchmark, plain second-price, enhanced
second-score), welfare accounting, economic-property verification, and a
Monte Carlo experiment harness with a CLI.
"""

from .distributions import (Constant, PowerLaw, Uniform, Zipf,
                            pareto_order_stat_mean)
from .errors import SyncMarketError
from .generate import GeneratorConfig, sample_scenario
from .market import (ArTask, AvProfile, DtTask, MarketScenario,
                     MatchQualityMatrix, MbpProfile, MechanismOutcome,
                     RsuProfile, ad_value, validate_scenario)
from .mechanisms import (AlphaFactor, EfficientRule, PhysicalBid,
                         TabulatedRule, VirtualBid, efficient_score,
                         optimal_brand_bid, optimal_deadline, run_epvisa,
                         run_omniscient, run_pvisa, select_alpha)
from .welfare import (WelfareReport, brute_force_benchmark, score_outcome,
                      welfare_ratio)
from .experiments import (ExperimentConfig, ResultRow, build_cell_policy,
                          emit_results, read_results_csv, run_duration_grid,
                          run_sweep)
from .verification import (check_adverse_selection_free, check_bound,
                           check_false_name_proofness,
                           check_strategy_proofness, gamma_floor)

__all__ = [name for name in dir() if not name.startswith("_")]
