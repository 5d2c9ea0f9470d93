"""Sampling distributions for scenario generation.

Supports the four families the experiments need: Uniform(lo, hi),
Constant(v), Zipf(s) over a finite support, and a continuous power law
(Pareto) with survival x^-a on [1, inf).  Each family knows its mean so
generated scenarios can carry analytic expectations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DegenerateDistribution

DEFAULT_ZIPF_SUPPORT = 1000


@dataclass(frozen=True)
class Uniform:
    lo: float
    hi: float

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"Uniform requires lo <= hi, got ({self.lo}, {self.hi})")

    def sample(self, rng: np.random.Generator, size=None):
        return rng.uniform(self.lo, self.hi, size=size)

    def mean(self) -> float:
        return 0.5 * (self.lo + self.hi)


@dataclass(frozen=True)
class Constant:
    value: float

    def sample(self, rng: np.random.Generator, size=None):
        if size is None:
            return self.value
        return np.full(size, self.value, dtype=float)

    def mean(self) -> float:
        return self.value


@dataclass(frozen=True)
class Zipf:
    """Zipf over {1, ..., n_max} with P(r) proportional to r^-exponent."""

    exponent: float
    n_max: int = DEFAULT_ZIPF_SUPPORT

    def __post_init__(self):
        if self.exponent <= 1:
            raise ValueError("Zipf exponent must be > 1")
        if self.n_max < 1:
            raise ValueError("Zipf support must be nonempty")

    def _pmf(self, n_max: int) -> np.ndarray:
        r = np.arange(1, n_max + 1, dtype=float)
        w = r ** (-self.exponent)
        return w / w.sum()

    def truncated(self, cap: int) -> "Zipf":
        if cap < 1:
            raise DegenerateDistribution("Zipf support empty after clamping")
        return Zipf(self.exponent, min(self.n_max, cap))

    def sample(self, rng: np.random.Generator, size=None):
        p = self._pmf(self.n_max)
        return rng.choice(np.arange(1, self.n_max + 1), size=size, p=p)

    def mean(self) -> float:
        p = self._pmf(self.n_max)
        return float(np.dot(np.arange(1, self.n_max + 1), p))


@dataclass(frozen=True)
class PowerLaw:
    """Continuous Pareto with tail P(X > x) = x^-a for x >= 1."""

    a: float

    def __post_init__(self):
        if self.a <= 1:
            raise ValueError("PowerLaw tail exponent must be > 1")

    def sample(self, rng: np.random.Generator, size=None):
        u = rng.uniform(0.0, 1.0, size=size)
        return np.asarray(u) ** (-1.0 / self.a) if size is not None \
            else float(u ** (-1.0 / self.a))

    def mean(self) -> float:
        return self.a / (self.a - 1.0)

    def clamped_mean(self, cap: float) -> float:
        """E[min(X, cap)] = 1 + (1 - cap^(1-a)) / (a - 1)."""
        if cap < 1:
            return float(cap)
        return 1.0 + (1.0 - cap ** (1.0 - self.a)) / (self.a - 1.0)

    def order_stat_mean(self, num_draws: int, rank: int) -> float:
        """Mean of the rank-th largest of ``num_draws`` i.i.d. draws."""
        return pareto_order_stat_mean(num_draws, self.a, rank)


Distribution = Union[Uniform, Constant, Zipf, PowerLaw]


def pareto_order_stat_mean(num_draws: int, a: float, rank: int) -> float:
    """E of the rank-th largest of n i.i.d. Pareto(a) variables:
    Gamma(rank - 1/a) * Gamma(n + 1) / (Gamma(rank) * Gamma(n + 1 - 1/a)).
    """
    if rank < 1 or rank > num_draws:
        raise ValueError("rank out of range")
    if a * rank <= 1:
        raise ValueError("order-statistic mean diverges for rank <= 1/a")
    lg = (math.lgamma(rank - 1.0 / a) + math.lgamma(num_draws + 1)
          - math.lgamma(rank) - math.lgamma(num_draws + 1 - 1.0 / a))
    return math.exp(lg)


def dist_from_dict(spec) -> Distribution:
    """Parse the key-value form used in config files, e.g.
    {"uniform": [0, 1]}, {"constant": 2.5}, {"zipf": 2},
    {"powerlaw": 1.05}."""
    if isinstance(spec, (int, float)):
        return Constant(float(spec))
    if not isinstance(spec, dict) or len(spec) != 1:
        raise ValueError(f"bad distribution spec: {spec!r}")
    kind, arg = next(iter(spec.items()))
    kind = kind.lower()
    if kind == "uniform":
        lo, hi = arg
        return Uniform(float(lo), float(hi))
    if kind == "constant":
        return Constant(float(arg))
    if kind == "zipf":
        if isinstance(arg, (list, tuple)):
            return Zipf(float(arg[0]), int(arg[1]))
        return Zipf(float(arg))
    if kind == "powerlaw":
        return PowerLaw(float(arg))
    raise ValueError(f"unknown distribution kind: {kind!r}")


def dist_to_dict(dist: Distribution):
    if isinstance(dist, Uniform):
        return {"uniform": [dist.lo, dist.hi]}
    if isinstance(dist, Constant):
        return {"constant": dist.value}
    if isinstance(dist, Zipf):
        if dist.n_max != DEFAULT_ZIPF_SUPPORT:
            return {"zipf": [dist.exponent, dist.n_max]}
        return {"zipf": dist.exponent}
    if isinstance(dist, PowerLaw):
        return {"powerlaw": dist.a}
    raise TypeError(f"not a distribution: {dist!r}")
