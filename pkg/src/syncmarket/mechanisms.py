"""The three allocation mechanisms and their supporting bid strategies.

* omniscient benchmark: knows every valuation and the brand provider's
  mean match quality; awards the ad to the top performance provider
  whenever its realized match beats gamma times the brand mean.
* plain second-price design (both submarkets run a second-price auction).
* enhanced second-score design: physical bids are scored with a
  synchronization scoring rule, and the virtual submarket uses a price
  scaling factor so the brand provider wins exactly when the top two
  performance bids are close.

Payments in the scored physical auction are critical payments (the bid
that would have tied the runner-up's score); this is what makes the
auction strategy-proof, and it reduces to the plain second price when the
scoring rule is identically zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .delays import av_dt_breakdown, pair_duration
from .errors import EmptyGrid, EmptyMarket, ZeroDenominator
from .market import MarketScenario, MechanismOutcome, ad_value

TIE_LOWEST_ID = "lowest-id"
TIE_NO_WINNER = "no-winner"


@dataclass(frozen=True)
class PhysicalBid:
    av_id: int
    price: float
    deadline_s: Optional[float] = None

    def __post_init__(self):
        if self.price < 0:
            raise ValueError("bid price must be >= 0")
        if self.deadline_s is not None and self.deadline_s <= 0:
            raise ValueError("submitted deadline must be > 0")


@dataclass(frozen=True)
class VirtualBid:
    mbp_id: int
    price: float  # per second of display

    def __post_init__(self):
        if self.price < 0:
            raise ValueError("bid price must be >= 0")


@dataclass(frozen=True)
class AlphaFactor:
    alpha: float

    def __post_init__(self):
        if self.alpha < 1:
            raise ValueError("price scaling factor must be >= 1")


@dataclass(frozen=True)
class EfficientRule:
    """phi(eta) = eta * (gamma * brand_term + perf_term), the market-level
    per-second surplus estimate of the virtual submarket."""

    gamma: float
    brand_term: float
    perf_term: float

    def phi(self, deadline_s: float) -> float:
        return deadline_s * (self.gamma * self.brand_term + self.perf_term)


@dataclass(frozen=True)
class TabulatedRule:
    """Piecewise-linear nondecreasing rule through (eta, phi) knots."""

    knots: tuple

    def __post_init__(self):
        knots = tuple(sorted((float(x), float(y)) for x, y in self.knots))
        if not knots or knots[0] != (0.0, 0.0):
            raise ValueError("tabulated rule must start at (0, 0)")
        ys = [y for _, y in knots]
        if any(b < a for a, b in zip(ys, ys[1:])):
            raise ValueError("tabulated rule must be nondecreasing")
        object.__setattr__(self, "knots", knots)

    def phi(self, deadline_s: float) -> float:
        xs = [x for x, _ in self.knots]
        ys = [y for _, y in self.knots]
        return float(np.interp(deadline_s, xs, ys))


@dataclass(frozen=True)
class SurplusAwareRule:
    """Efficient rule with per-bidder externality terms.

    The externality of serving vehicle i is the auctioneer's estimate of
    the virtual-submarket surplus it can realize while that vehicle's task
    runs: expected display duration times the per-second ad surplus,
    averaged over prior samples of the match-quality market and zeroed on
    samples whose delay would miss the submitted deadline.  The term
    depends only on public state (channel, tasks, deadline), never on the
    bid price, so the critical-payment pricing stays strategy-proof.

    ``sample_matches`` holds prior match-count draws, ``sample_slots`` the
    winning provider slot per draw (-1 = brand), ``sample_rates`` the
    per-second surplus of each draw at the mean valuation.
    """

    gamma: float
    sample_matches: tuple
    sample_slots: tuple
    sample_rates: tuple
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __getstate__(self):
        state = self.__dict__.copy()
        state["_cache"] = {}
        return state

    def __setstate__(self, state):
        self.__dict__.update(state)

    def externalities(self, scenario, requests) -> list:
        """Externality per (av_id, deadline_s) request, vectorized over the
        prior samples.  Results are memoized per scenario object: deviation
        sweeps rerun the mechanism many times on one scenario and the terms
        are bid-independent."""
        key = (id(scenario), tuple(requests))
        hit = self._cache.get(key)
        if hit is not None and hit[0] is scenario:
            return hit[1]
        values = self._externalities(scenario, requests)
        if len(self._cache) >= 32:
            self._cache.clear()
        self._cache[key] = (scenario, values)
        return values

    def _externalities(self, scenario, requests) -> list:
        from .delays import av_downlink_rate, av_dt_breakdown

        matches = np.asarray(self.sample_matches, dtype=float)
        slots = np.asarray(self.sample_slots, dtype=int)
        rates = np.asarray(self.sample_rates, dtype=float)
        n_perf = len(scenario.mbps) - 1
        idx = np.where(slots < 0, 0, 1 + slots % n_perf)
        sizes = np.array([m.ar_task.layer_size_bits for m in scenario.mbps])
        cycles = np.array([m.ar_task.cycles_per_bit for m in scenario.mbps])
        bits = (matches + 1.0) * sizes[idx]
        cpu, gpu = scenario.rsu.cpu_freq_hz, scenario.rsu.gpu_freq_hz
        compute = bits / cpu + bits * cycles[idx] / gpu

        out = []
        for av_id, eta in requests:
            dt = av_dt_breakdown(scenario, av_id).total
            if dt > eta:
                out.append(0.0)
                continue
            rdown = av_downlink_rate(scenario, av_id)
            with np.errstate(divide="ignore"):
                transmit = np.where(bits > 0, bits / max(rdown, 1e-300), 0.0)
            duration = dt + transmit + compute
            feasible = duration <= eta
            out.append(float(np.mean(np.where(feasible, duration * rates,
                                              0.0))))
        return out

    def externality(self, scenario, av_id: int, deadline_s: float) -> float:
        return self.externalities(scenario, [(av_id, deadline_s)])[0]


ZERO_RULE = EfficientRule(gamma=0.0, brand_term=0.0, perf_term=0.0)
ScoringRule = Union[EfficientRule, TabulatedRule, SurplusAwareRule]


def efficient_score(price: float, deadline_s: float, gamma: float,
                    brand_surplus_rate: float, perf_surplus_rate: float) -> float:
    """Synchronization score under the efficient rule: bid price plus the
    deadline-weighted virtual surplus."""
    if min(price, deadline_s, gamma, brand_surplus_rate, perf_surplus_rate) < 0:
        raise ValueError("efficient_score requires nonnegative inputs")
    return price + deadline_s * (gamma * brand_surplus_rate + perf_surplus_rate)


def select_alpha(gamma: float, expected_brand_value: float,
                 expected_second_perf_value: float) -> AlphaFactor:
    """Price scaling factor max(1, gamma * E[Q_brand] / E[Q_second])."""
    if expected_second_perf_value <= 0:
        raise ZeroDenominator("expected second performance value must be > 0")
    return AlphaFactor(max(1.0, gamma * expected_brand_value
                           / expected_second_perf_value))


def optimal_deadline(valuation: float, rule: ScoringRule,
                     deadline_cap_s: float, grid_step_s: float) -> float:
    """Grid argmax of valuation + phi(eta) over (0, cap]; ties go to the
    largest deadline, so monotone rules always return the cap."""
    if deadline_cap_s <= 0 or grid_step_s <= 0:
        raise ValueError("deadline cap and grid step must be > 0")
    n = max(1, int(round(deadline_cap_s / grid_step_s)))
    grid = [min(deadline_cap_s, (j + 1) * grid_step_s) for j in range(n)]
    if grid[-1] < deadline_cap_s:
        grid.append(deadline_cap_s)
    best = grid[0]
    best_val = valuation + rule.phi(grid[0])
    for eta in grid[1:]:
        val = valuation + rule.phi(eta)
        if val >= best_val:  # >= pushes ties toward larger eta
            best, best_val = eta, val
    return best


def optimal_brand_bid(brand_value_mean: float,
                      top_perf_value_samples: Sequence[float],
                      bid_grid: Sequence[float]) -> float:
    """Grid bid maximizing mean[(Q_brand - Q_top) 1{Q_top <= bid}]: the
    brand wins exactly the events where the top performance value is at or
    below its contract bid."""
    if len(bid_grid) == 0:
        raise EmptyGrid("bid grid is empty")
    if len(top_perf_value_samples) == 0:
        raise ValueError("need at least one top-value sample")
    samples = np.asarray(top_perf_value_samples, dtype=float)
    best_bid, best_util = None, -np.inf
    for bid in bid_grid:
        wins = samples <= bid
        util = float(np.sum((brand_value_mean - samples) * wins)) / len(samples)
        if util > best_util:
            best_bid, best_util = bid, util
    return best_bid


def truthful_physical_bids(scenario: MarketScenario,
                           with_deadlines: bool = False) -> list:
    return [PhysicalBid(av.id, av.valuation,
                        av.dt_task.deadline_s if with_deadlines else None)
            for av in scenario.avs]


def truthful_virtual_bids(scenario: MarketScenario, winner_av: int,
                          brand_bid: float) -> list:
    """Performance providers bid their realized ad value per second for the
    winning vehicle; the brand provider submits its contract bid."""
    bids = [VirtualBid(0, brand_bid)]
    nu = scenario.avs[winner_av].valuation
    for k in range(1, len(scenario.mbps)):
        bids.append(VirtualBid(k, ad_value(nu, scenario.match.h[winner_av, k])))
    return bids


# -- outcome assembly ------------------------------------------------------

def _assemble(scenario: MarketScenario, winner_av, winner_mbp, payment_dt,
              payment_ar, duration, tie_phys=False, tie_virt=False) -> MechanismOutcome:
    nu = scenario.avs[winner_av].valuation if winner_av is not None else 0.0
    s_brand = s_perf = 0.0
    if winner_av is not None and winner_mbp is not None:
        q = ad_value(nu, scenario.match.h[winner_av, winner_mbp])
        if winner_mbp == 0:
            s_brand = q
        else:
            s_perf = q
    total = nu + duration * (scenario.gamma * s_brand + s_perf)
    return MechanismOutcome(
        winner_av=winner_av, winner_mbp=winner_mbp,
        payment_dt=payment_dt, payment_ar=payment_ar,
        display_duration_s=duration,
        surplus_dt=nu, surplus_brand=s_brand, surplus_perf=s_perf,
        total_welfare=total, tie_physical=tie_phys, tie_virtual=tie_virt)


def _void_if_infeasible(scenario, winner_av, winner_mbp, payment_ar, cap_s):
    """Return (winner_mbp, payment_ar, duration): AR allocation is voided
    when the pair's total delay exceeds the cap; the DT side stands."""
    duration = pair_duration(scenario, winner_av, winner_mbp)
    if duration <= cap_s:
        return winner_mbp, payment_ar, duration
    return None, 0.0, 0.0


def _argmax_with_ties(values):
    best = max(values)
    idx = [i for i, x in enumerate(values) if x == best]
    return idx[0], len(idx) > 1


# -- the mechanisms --------------------------------------------------------

def run_omniscient(scenario: MarketScenario) -> MechanismOutcome:
    """Welfare benchmark: for each vehicle, award the ad position to the
    top performance provider when its realized match beats gamma times the
    brand's mean match, otherwise to the brand; then pick the vehicle with
    the highest valuation-plus-display surplus.  Payments are zero."""
    if scenario.num_avs == 0:
        raise EmptyMarket("no vehicles")
    gamma, mu0 = scenario.gamma, scenario.expected_brand_match
    best_val, best = -np.inf, None
    for i, av in enumerate(scenario.avs):
        perf = scenario.match.h[i, 1:]
        k_star = int(np.argmax(perf)) + 1
        m1 = float(scenario.match.h[i, k_star])
        if m1 > gamma * mu0:
            k, rate = k_star, av.valuation * m1
        else:
            k, rate = 0, gamma * av.valuation * mu0
        duration = pair_duration(scenario, i, k)
        if duration <= av.dt_task.deadline_s:
            value = av.valuation + duration * rate
        else:
            k, duration, value = None, 0.0, av.valuation
        if value > best_val:
            best_val, best = value, (i, k, duration)
    i, k, duration = best
    return _assemble(scenario, i, k, 0.0, 0.0, duration)


def run_pvisa(scenario: MarketScenario,
              physical_bids: Sequence[PhysicalBid],
              virtual_bids: Sequence[VirtualBid],
              threshold_deadline_s: Optional[float] = None,
              tie_policy: str = TIE_LOWEST_ID) -> MechanismOutcome:
    """Second-price auctions in both submarkets.  The virtual runner-up
    price is taken over all providers, brand included.  The winning pair's
    ad allocation is voided when its delay exceeds min(deadline, the RSU's
    announced threshold)."""
    if not physical_bids:
        raise EmptyMarket("physical submarket needs at least one bid")
    prices = [b.price for b in physical_bids]
    j, tie_phys = _argmax_with_ties(prices)
    winner_av = physical_bids[j].av_id
    payment_dt = max([b.price for b in physical_bids if b.av_id != winner_av],
                     default=0.0)

    if callable(virtual_bids):
        virtual_bids = virtual_bids(winner_av)
    if not virtual_bids:
        raise EmptyMarket("virtual submarket needs at least one bid")
    vprices = [b.price for b in virtual_bids]
    v, tie_virt = _argmax_with_ties(vprices)
    if tie_virt and tie_policy == TIE_NO_WINNER:
        return _assemble(scenario, winner_av, None, payment_dt, 0.0, 0.0,
                         tie_phys, tie_virt)
    winner_mbp = virtual_bids[v].mbp_id
    second = max([b.price for b in virtual_bids if b.mbp_id != winner_mbp],
                 default=0.0)

    cap = scenario.avs[winner_av].dt_task.deadline_s
    if threshold_deadline_s is not None:
        cap = min(cap, threshold_deadline_s)
    duration0 = pair_duration(scenario, winner_av, winner_mbp)
    winner_mbp, payment_ar, duration = _void_if_infeasible(
        scenario, winner_av, winner_mbp, duration0 * second, cap)
    return _assemble(scenario, winner_av, winner_mbp, payment_dt, payment_ar,
                     duration, tie_phys, tie_virt)


def run_epvisa(scenario: MarketScenario,
               physical_bids: Sequence[PhysicalBid],
               virtual_bids: Sequence[VirtualBid],
               rule: ScoringRule,
               alpha: AlphaFactor,
               threshold_deadline_s: Optional[float] = None,
               score_sign: str = "plus") -> MechanismOutcome:
    """Scored physical auction plus scaled virtual auction.

    Physical: highest synchronization score wins and pays the critical bid
    that would have tied the best competing score.  Virtual: the top
    performance bid wins only if it exceeds alpha times the runner-up
    performance bid (paying that scaled runner-up price); otherwise the
    brand provider wins and pays its own contract bid.
    """
    if not physical_bids:
        raise EmptyMarket("physical submarket needs at least one bid")
    if score_sign not in ("plus", "minus"):
        raise ValueError("score_sign must be 'plus' or 'minus'")
    sign = 1.0 if score_sign == "plus" else -1.0

    def eta_of(bid: PhysicalBid) -> float:
        if bid.deadline_s is not None:
            return bid.deadline_s
        return next(av.dt_task.deadline_s for av in scenario.avs
                    if av.id == bid.av_id)

    if hasattr(rule, "externalities"):
        exts = rule.externalities(scenario, [(b.av_id, eta_of(b))
                                             for b in physical_bids])
    else:
        exts = [rule.phi(eta_of(b)) for b in physical_bids]
    scores = [b.price + sign * u for b, u in zip(physical_bids, exts)]
    j, tie_phys = _argmax_with_ties(scores)
    winner_bid = physical_bids[j]
    winner_av = winner_bid.av_id
    rival_best = max([s for b, s in zip(physical_bids, scores)
                      if b.av_id != winner_av], default=0.0)
    eta_win = winner_bid.deadline_s
    if eta_win is None:
        eta_win = scenario.avs[winner_av].dt_task.deadline_s
    # bid level at which the winner's score would tie the best rival score
    payment_dt = max(0.0, rival_best - sign * exts[j])

    if callable(virtual_bids):
        virtual_bids = virtual_bids(winner_av)
    if not virtual_bids:
        raise EmptyMarket("virtual submarket needs at least one bid")
    cap = eta_win
    if threshold_deadline_s is not None:
        cap = min(cap, threshold_deadline_s)

    # The allocation problem is constrained to pairs that meet the winning
    # vehicle's deadline, so the virtual auction runs over the feasible
    # bid set.  Feasibility depends only on delays, never on bid prices,
    # which keeps the auction strategy-proof.
    def feasible(mbp_id: int) -> bool:
        return pair_duration(scenario, winner_av, mbp_id) <= cap

    brand_bid = next((b.price for b in virtual_bids if b.mbp_id == 0), 0.0)
    if not any(b.mbp_id != 0 for b in virtual_bids):
        raise EmptyMarket("no performance bids")
    perf = sorted((b for b in virtual_bids
                   if b.mbp_id != 0 and feasible(b.mbp_id)),
                  key=lambda b: (-b.price, b.mbp_id))
    b1_price = perf[0].price if perf else 0.0
    b2_price = perf[1].price if len(perf) > 1 else 0.0

    if perf and b1_price > alpha.alpha * b2_price:
        winner_mbp = perf[0].mbp_id
        price_per_s = alpha.alpha * b2_price
    else:
        winner_mbp = 0
        price_per_s = brand_bid

    duration0 = pair_duration(scenario, winner_av, winner_mbp)
    winner_mbp, payment_ar, duration = _void_if_infeasible(
        scenario, winner_av, winner_mbp, duration0 * price_per_s, cap)
    return _assemble(scenario, winner_av, winner_mbp, payment_dt, payment_ar,
                     duration, tie_phys, False)


# -- auctioneer-side estimates for the efficient rule and alpha ------------

@dataclass(frozen=True)
class MarketEstimates:
    """Pre-auction Monte Carlo estimates over the match-quality and
    valuation distributions (what the auctioneer can know up front)."""

    brand_rate: float       # E[Q_brand per second | brand wins the rule]
    perf_rate: float        # E[Q_top per second | top perf wins the rule]
    e_q0: float             # E[Q_brand]
    e_q1: float             # E[Q_(1)]
    e_q2: float             # E[Q_(2)]

    def rule(self, gamma: float) -> EfficientRule:
        return EfficientRule(gamma=gamma, brand_term=self.brand_rate,
                             perf_term=self.perf_rate)

    def alpha(self, gamma: float) -> AlphaFactor:
        return select_alpha(gamma, self.e_q0, self.e_q2)


def estimate_market(config, n_samples: int = 1000,
                    seed_offset: int = 10 ** 9) -> MarketEstimates:
    """Sample virtual submarkets from a generator config and average the
    omniscient-rule surplus split.  Uses a seed stream disjoint from the
    experiment trials."""
    from .generate import clamped_match_mean, sample_match_quality

    rng = np.random.default_rng(
        np.random.SeedSequence([config.rng_seed, seed_offset]))
    mu0 = clamped_match_mean(config.brand_dist(), config.cache_size)
    nu_mean = config.valuation.mean()
    gamma, K = config.gamma, config.num_perf_mbps
    brand_acc = perf_acc = q1_acc = q2_acc = 0.0
    for _ in range(n_samples):
        m = np.atleast_1d(sample_match_quality(
            config.match, config.cache_size, rng, size=K)).astype(float)
        m.sort()
        m1 = m[-1]
        m2 = m[-2] if K > 1 else 0.0
        if m1 > gamma * mu0:
            perf_acc += m1
        else:
            brand_acc += mu0
        q1_acc += m1
        q2_acc += m2
    return MarketEstimates(
        brand_rate=nu_mean * brand_acc / n_samples,
        perf_rate=nu_mean * perf_acc / n_samples,
        e_q0=nu_mean * mu0,
        e_q1=nu_mean * q1_acc / n_samples,
        e_q2=nu_mean * q2_acc / n_samples,
    )
