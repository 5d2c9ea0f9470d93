"""Exception types shared across the package."""


class SyncMarketError(Exception):
    """Base class for all package errors."""


class ScenarioError(SyncMarketError):
    """A scenario violates one or more structural invariants.

    Carries the full list of violations so callers can report every
    problem at once instead of fixing them one by one.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


class NonPositiveNoise(SyncMarketError):
    pass


class ZeroRate(SyncMarketError):
    pass


class EmptyMarket(SyncMarketError):
    pass


class DegenerateDistribution(SyncMarketError):
    pass


class InvalidEpsilon(SyncMarketError):
    pass


class ZeroDenominator(SyncMarketError):
    pass


class EmptyGrid(SyncMarketError):
    pass


class InstanceTooLarge(SyncMarketError):
    pass


class InfeasibleOutcome(SyncMarketError):
    pass


class ZeroBenchmark(SyncMarketError):
    pass


class InsufficientTrials(SyncMarketError):
    pass


class OutOfDomain(SyncMarketError):
    pass


class IoFailure(SyncMarketError):
    pass
