"""QPE outcome sources used by the hybrid driver."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .analysis import qpe_distribution_analytic
from .numtheory import multiplicative_order
from .sim import DEFAULT_SUPPORT_CAP, Distribution, draw, shor_distribution

SIMULATION_MAX_N = 64


@lru_cache(maxsize=256)
def _simulated(a: int, N: int, cap: int) -> Distribution:
    return shor_distribution(a, N, cap)


_ANALYTIC: dict = {}


def _analytic(a: int, N: int) -> Distribution:
    # the distribution depends on a only through its order
    key = (multiplicative_order(a, N), N)
    if key not in _ANALYTIC:
        _ANALYTIC[key] = qpe_distribution_analytic(a, N)
    return _ANALYTIC[key]


def clear_caches() -> None:
    _simulated.cache_clear()
    _ANALYTIC.clear()


class SimulationBackend:
    """Outcomes drawn from the sparse simulation of the full Shor circuit."""

    name = "simulate"

    def __init__(self, support_cap: int = DEFAULT_SUPPORT_CAP):
        self.support_cap = support_cap

    def distribution(self, a: int, N: int) -> Distribution:
        return _simulated(a, N, self.support_cap)

    def sample_outcome(self, a: int, N: int, m: int, rng: np.random.Generator) -> int:
        return draw(self.distribution(a, N), rng)


class AnalyticBackend:
    """Outcomes drawn from the closed-form QPE distribution."""

    name = "analytic"

    def distribution(self, a: int, N: int) -> Distribution:
        return _analytic(a, N)

    def sample_outcome(self, a: int, N: int, m: int, rng: np.random.Generator) -> int:
        return draw(self.distribution(a, N), rng)


def make_backend(name: str, N: int):
    if name == "auto":
        name = "simulate" if N <= SIMULATION_MAX_N else "analytic"
    if name == "simulate":
        return SimulationBackend()
    if name == "analytic":
        return AnalyticBackend()
    raise ValueError(f"unknown backend {name!r}")
